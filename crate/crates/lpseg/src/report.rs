//! JSON reports and CSV traces.

use std::path::Path;

use lpseg_core::ga::{GaConfig, GenerationStats, Genome};
use lpseg_core::propagation::Checkpoint;
use lpseg_core::{Lambda, SegParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Written by `segment` next to the mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// `None` when no ground truth was supplied.
    pub error_rate: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub k: usize,
    pub lambda: Vec<f64>,
    pub wall_ms: f64,
    /// Parameters were tuned against the ground truth being reported.
    #[serde(default)]
    pub oracle_tuned: bool,
}

/// `{k, lambda[23], fitness?}`; both the optimizer's output and a
/// parameter file accepted by `segment` and manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub k: usize,
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<f64>,
    #[serde(default)]
    pub oracle_tuned: bool,
}

impl ParamsFile {
    pub fn from_genome(g: &Genome) -> Self {
        Self {
            k: g.k,
            lambda: g.lambda.to_vec(),
            fitness: g.fitness,
            oracle_tuned: true,
        }
    }

    pub fn params(&self) -> Result<SegParams> {
        Ok(SegParams::new(self.k, Lambda::from_slice(&self.lambda)?)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_owned(),
        msg: e.to_string(),
    }
}

/// `iteration,statistic`, one line per checkpoint.
pub fn write_trace(path: &Path, checkpoints: &[Checkpoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["iteration", "statistic"])
        .map_err(|e| csv_error(path, e))?;
    for cp in checkpoints {
        w.write_record([cp.iteration.to_string(), cp.statistic.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `generation,best,mean`.
pub fn write_history(path: &Path, history: &[GenerationStats]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["generation", "best", "mean"])
        .map_err(|e| csv_error(path, e))?;
    for h in history {
        w.write_record([h.generation.to_string(), h.best.to_string(), h.mean.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// JSON form of [`GaConfig`]; every field optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfigFile {
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub crossover_rate: Option<f64>,
    pub mutation_rate: Option<f64>,
    pub elitism: Option<usize>,
    pub tournament_size: Option<usize>,
    pub mutation_sigma: Option<f64>,
    pub k_range: Option<(usize, usize)>,
    pub lambda_range: Option<(f64, f64)>,
    pub rng_seed: Option<u64>,
}

impl GaConfigFile {
    pub fn apply(&self, mut cfg: GaConfig) -> GaConfig {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(
            population_size,
            generations,
            crossover_rate,
            mutation_rate,
            elitism,
            tournament_size,
            mutation_sigma,
            k_range,
            lambda_range,
            rng_seed
        );
        cfg
    }
}

pub fn lambda_vec(lambda: &Lambda) -> Vec<f64> {
    lambda.as_array().to_vec()
}
