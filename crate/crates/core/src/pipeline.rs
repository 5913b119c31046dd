//! Image + seeds to per-pixel labels.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::features::{normalize, raw_features, RgbImage, SegParams, FEATURE_COUNT};
use crate::graph::{build_knn_graph_on, PixelGraph};
use crate::kdtree::Points;
use crate::propagation::{
    decode_labels, init_domination, run_propagation, Checkpoint, ClassId, ConvergenceMonitor,
};
use crate::seeds::{background, SeedMap, SeedRole};

/// Unnormalized features of an image, reusable across weight vectors.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    width: usize,
    height: usize,
    raw: Vec<[f64; FEATURE_COUNT]>,
}

impl PreparedImage {
    pub fn new(image: &RgbImage) -> Self {
        Self {
            width: image.width(),
            height: image.height(),
            raw: raw_features(image),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn raw(&self) -> &[[f64; FEATURE_COUNT]] {
        &self.raw
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    width: usize,
    height: usize,
    classes: usize,
    labels: Vec<ClassId>,
    pub iterations: usize,
    pub converged: bool,
    pub checkpoints: Vec<Checkpoint>,
    /// Unlabeled nodes that had no neighbors.
    pub isolated: usize,
}

impl SegmentationResult {
    /// Wraps precomputed per-pixel labels (no propagation statistics).
    pub fn from_labels(width: usize, height: usize, classes: usize, labels: Vec<ClassId>) -> Result<Self> {
        crate::features::check_dims(width, height, labels.len())?;
        if let Some(c) = labels.iter().find(|c| c.get() > classes) {
            return Err(Error::ClassOutOfRange {
                class: c.get(),
                classes,
            });
        }
        Ok(Self {
            width,
            height,
            classes,
            labels,
            iterations: 0,
            converged: true,
            checkpoints: Vec::new(),
            isolated: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// One label per pixel. Ignored pixels carry the background class.
    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [ClassId] {
        &mut self.labels
    }
}

fn check_same_size(seeds: &SeedMap, width: usize, height: usize) -> Result<()> {
    if seeds.width() != width || seeds.height() != height {
        return Err(Error::SizeMismatch {
            width,
            height,
            expected: width * height,
            actual: seeds.len(),
        });
    }
    Ok(())
}

/// kNN graph over `nodes` (pixel indices in scan order). Features are
/// normalized over the whole image before the node rows are selected.
pub fn build_graph<E: Executor + ?Sized>(
    image: &PreparedImage,
    nodes: &[usize],
    params: &SegParams,
    exec: &E,
) -> Result<PixelGraph> {
    let features = normalize(&image.raw, &params.lambda).select_rows(nodes);
    let points = Points::new(features.values(), FEATURE_COUNT)?;
    Ok(build_knn_graph_on(points, params.k, exec)?.with_pixel_map(nodes.to_vec()))
}

/// Propagates `seeds` over a graph whose nodes are the seed map's
/// non-ignored pixels.
pub fn propagate<E: Executor + ?Sized>(
    seeds: &SeedMap,
    graph: &PixelGraph,
    monitor: &ConvergenceMonitor,
    exec: &E,
    on_checkpoint: impl FnMut(Checkpoint),
) -> Result<SegmentationResult> {
    let dom = init_domination(seeds.node_kinds(), seeds.classes())?;
    let outcome = run_propagation(dom, graph, monitor, exec, on_checkpoint)?;
    let node_labels = decode_labels(&outcome.matrix);
    let mut labels = Vec::with_capacity(seeds.len());
    let mut next = node_labels.into_iter();
    for role in seeds.roles() {
        labels.push(match role {
            SeedRole::Ignored => background(),
            _ => next.next().expect("one node per non-ignored pixel"),
        });
    }
    Ok(SegmentationResult {
        width: seeds.width(),
        height: seeds.height(),
        classes: seeds.classes(),
        labels,
        iterations: outcome.iterations,
        converged: outcome.converged,
        checkpoints: outcome.checkpoints,
        isolated: outcome.isolated.len(),
    })
}

/// Full run with the default stopping rule.
pub fn segment<E: Executor + ?Sized>(
    image: &RgbImage,
    seeds: &SeedMap,
    params: &SegParams,
    exec: &E,
) -> Result<SegmentationResult> {
    segment_prepared(
        &PreparedImage::new(image),
        seeds,
        params,
        &ConvergenceMonitor::default(),
        exec,
        |_| {},
    )
}

pub fn segment_prepared<E: Executor + ?Sized>(
    image: &PreparedImage,
    seeds: &SeedMap,
    params: &SegParams,
    monitor: &ConvergenceMonitor,
    exec: &E,
    on_checkpoint: impl FnMut(Checkpoint),
) -> Result<SegmentationResult> {
    check_same_size(seeds, image.width, image.height)?;
    let seeded = seeds.seeded_classes();
    if seeded < 2 {
        return Err(Error::TooFewSeededClasses(seeded));
    }
    let nodes = seeds.node_pixels();
    let graph = if seeds.count(|r| *r == SeedRole::Unlabeled) == 0 {
        // Nothing to propagate; skip the graph entirely.
        PixelGraph::from_directed(&alloc::vec![Vec::new(); nodes.len()]).with_pixel_map(nodes)
    } else {
        if params.k >= nodes.len() {
            return Err(Error::KTooLarge {
                k: params.k,
                nodes: nodes.len(),
            });
        }
        build_graph(image, &nodes, params, exec)?
    };
    propagate(seeds, &graph, monitor, exec, on_checkpoint)
}

/// Gray level for `class` out of `classes`. Two-class masks put class 1
/// (foreground) at 255 and class 2 at 0; otherwise levels are spread evenly
/// from 0 (class 1) to 255 (class `classes`).
pub fn mask_level(class: ClassId, classes: usize) -> u8 {
    if classes == 2 {
        return if class.get() == 1 { 255 } else { 0 };
    }
    (255 * class.index() / (classes - 1)) as u8
}

pub fn encode_mask(result: &SegmentationResult) -> Vec<u8> {
    result
        .labels
        .iter()
        .map(|&c| mask_level(c, result.classes))
        .collect()
}

/// `level class` lines mapping mask gray levels back to classes.
pub fn mask_legend(classes: usize) -> String {
    let mut out = String::new();
    for index in 0..classes {
        let class = ClassId::from_index(index);
        let _ = writeln!(out, "{} {}", mask_level(class, classes), class);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::features::Lambda;
    use crate::seeds::decode_trimap;
    use alloc::vec;

    fn two_tone(width: usize, height: usize) -> RgbImage {
        let px = (0..width * height)
            .map(|i| if i % width < width / 2 { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] })
            .collect();
        RgbImage::new(width, height, px).unwrap()
    }

    #[test]
    fn all_seeded_returns_seeds() {
        let img = two_tone(4, 1);
        let seeds = decode_trimap(4, 1, &[255, 255, 64, 64]).unwrap();
        let r = segment(&img, &seeds, &SegParams::default(), &Sequential).unwrap();
        assert_eq!(r.iterations, 0);
        let l: Vec<usize> = r.labels().iter().map(|c| c.get()).collect();
        assert_eq!(l, vec![1, 1, 2, 2]);
    }

    #[test]
    fn ignored_pixels_render_as_background() {
        let img = two_tone(4, 2);
        let seeds = decode_trimap(4, 2, &[255, 128, 128, 64, 0, 0, 0, 0]).unwrap();
        let params = SegParams::new(1, Lambda::ones()).unwrap();
        let r = segment(&img, &seeds, &params, &Sequential).unwrap();
        assert!(r.labels()[4..].iter().all(|c| *c == background()));
        assert_eq!(encode_mask(&r)[4..], [0, 0, 0, 0]);
    }

    #[test]
    fn rejects_k_not_below_node_count() {
        let img = two_tone(4, 1);
        let seeds = decode_trimap(4, 1, &[255, 128, 128, 64]).unwrap();
        let params = SegParams::new(4, Lambda::ones()).unwrap();
        assert_eq!(
            segment(&img, &seeds, &params, &Sequential),
            Err(Error::KTooLarge { k: 4, nodes: 4 })
        );
    }

    #[test]
    fn rejects_single_seeded_class_and_size_mismatch() {
        let img = two_tone(4, 1);
        let seeds = decode_trimap(4, 1, &[255, 128, 128, 128]).unwrap();
        assert_eq!(
            segment(&img, &seeds, &SegParams::default(), &Sequential),
            Err(Error::TooFewSeededClasses(1))
        );
        let seeds = decode_trimap(2, 2, &[255, 128, 128, 64]).unwrap();
        assert!(segment(&img, &seeds, &SegParams::default(), &Sequential).is_err());
    }

    #[test]
    fn mask_levels() {
        let c = |i| ClassId::new(i).unwrap();
        assert_eq!((mask_level(c(1), 2), mask_level(c(2), 2)), (255, 0));
        let three: Vec<u8> = (1..=3).map(|i| mask_level(c(i), 3)).collect();
        assert_eq!(three, vec![0, 127, 255]);
        assert_eq!(mask_legend(3), "0 1\n127 2\n255 3\n");
    }
}
