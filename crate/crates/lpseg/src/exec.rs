use std::num::NonZeroUsize;
use std::thread;

use lpseg_core::propagation::StepKernel;
use lpseg_core::{knn_range, Executor, KdTree};

/// Splits kNN queries and propagation rows into `workers` contiguous node
/// ranges on scoped threads. Each row is computed exactly as in the
/// sequential path, so output does not depend on the worker count.
#[derive(Debug, Clone, Copy)]
pub struct Threaded {
    workers: NonZeroUsize,
}

impl Threaded {
    pub fn new(workers: usize) -> Self {
        Self {
            workers: NonZeroUsize::new(workers).unwrap_or(NonZeroUsize::MIN),
        }
    }

    /// One worker per available core.
    pub fn available() -> Self {
        Self {
            workers: thread::available_parallelism().unwrap_or(NonZeroUsize::MIN),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.get()
    }
}

impl Default for Threaded {
    fn default() -> Self {
        Self::available()
    }
}

impl Executor for Threaded {
    fn knn_lists(&self, tree: &KdTree<'_>, k: usize) -> lpseg_core::Result<Vec<Vec<usize>>> {
        let n = tree.len();
        let workers = self.workers().min(n.max(1));
        if workers == 1 {
            return knn_range(tree, k, 0, n);
        }
        let chunk = n.div_ceil(workers);
        thread::scope(|s| {
            let handles: Vec<_> = (0..n)
                .step_by(chunk)
                .map(|start| s.spawn(move || knn_range(tree, k, start, (start + chunk).min(n))))
                .collect();
            let mut lists = Vec::with_capacity(n);
            for h in handles {
                lists.extend(h.join().expect("knn worker panicked")?);
            }
            Ok(lists)
        })
    }

    fn step(&self, kernel: &StepKernel<'_>, prev: &[f64], next: &mut [f64]) {
        let n = kernel.n_nodes();
        let workers = self.workers().min(n.max(1));
        if workers == 1 {
            kernel.fill_rows(0, prev, next);
            return;
        }
        let rows = n.div_ceil(workers);
        let c = kernel.classes();
        thread::scope(|s| {
            for (i, out) in next.chunks_mut(rows * c).enumerate() {
                s.spawn(move || kernel.fill_rows(i * rows, prev, out));
            }
        });
    }
}
