use alloc::vec::Vec;

use crate::error::Result;
use crate::kdtree::KdTree;
use crate::propagation::StepKernel;

/// Where the data-parallel parts of a run execute.
///
/// Both hooks have sequential defaults. Implementations may split the work
/// over node ranges in any way, but every row must be produced by the same
/// kernel call as the default so results stay bit-identical.
pub trait Executor: Sync {
    /// Directed `k`-nearest lists for every point of `tree`, in point order.
    fn knn_lists(&self, tree: &KdTree<'_>, k: usize) -> Result<Vec<Vec<usize>>> {
        knn_range(tree, k, 0, tree.len())
    }

    /// One synchronous propagation step: fill every row of `next` from `prev`.
    fn step(&self, kernel: &StepKernel<'_>, prev: &[f64], next: &mut [f64]) {
        kernel.fill_rows(0, prev, next);
    }
}

/// Neighbor lists for points `start..end`.
pub fn knn_range(tree: &KdTree<'_>, k: usize, start: usize, end: usize) -> Result<Vec<Vec<usize>>> {
    let points = tree.points();
    (start..end)
        .map(|i| tree.knn(points.point(i), k, Some(i)))
        .collect()
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {}
