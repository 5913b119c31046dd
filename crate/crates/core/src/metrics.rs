//! Error rate against ground truth.

use crate::error::{Error, Result};
use crate::pipeline::SegmentationResult;
use crate::seeds::{GroundTruth, SeedMap, SeedRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorCounts {
    /// Unlabeled, certain pixels whose label disagrees with the truth.
    pub wrong: usize,
    /// Unlabeled pixels outside the uncertainty band.
    pub evaluated: usize,
}

impl ErrorCounts {
    pub fn rate(&self) -> Result<f64> {
        if self.evaluated == 0 {
            return Err(Error::EmptyEvaluation);
        }
        Ok(self.wrong as f64 / self.evaluated as f64)
    }
}

pub fn error_counts(
    result: &SegmentationResult,
    gt: &GroundTruth,
    seeds: &SeedMap,
) -> Result<ErrorCounts> {
    let (w, h) = (result.width(), result.height());
    for (gw, gh, len) in [
        (gt.width(), gt.height(), gt.values().len()),
        (seeds.width(), seeds.height(), seeds.len()),
    ] {
        if gw != w || gh != h {
            return Err(Error::SizeMismatch {
                width: w,
                height: h,
                expected: w * h,
                actual: len,
            });
        }
    }
    let mut counts = ErrorCounts {
        wrong: 0,
        evaluated: 0,
    };
    for ((role, truth), label) in seeds
        .roles()
        .iter()
        .zip(gt.values())
        .zip(result.labels())
    {
        if *role != SeedRole::Unlabeled {
            continue;
        }
        let Some(expected) = truth.class() else {
            continue;
        };
        counts.evaluated += 1;
        if *label != expected {
            counts.wrong += 1;
        }
    }
    Ok(counts)
}

/// Fraction of unlabeled pixels (excluding ground-truth uncertain ones)
/// that were labeled wrongly.
pub fn error_rate(result: &SegmentationResult, gt: &GroundTruth, seeds: &SeedMap) -> Result<f64> {
    error_counts(result, gt, seeds)?.rate()
}
