//! Label propagation by synchronous neighborhood averaging.
//!
//! Each node carries a domination vector over `C` classes. Seeds are one-hot
//! and frozen; unlabeled nodes start uniform and at every step take the mean of
//! their neighbors' vectors from the previous step. Every `check_interval`
//! steps the mean of the unlabeled nodes' maximum entries is compared with the
//! previous checkpoint and the run stops once it rose by less than `epsilon`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph::PixelGraph;

/// 1-based class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(u16);

impl ClassId {
    pub const FIRST: ClassId = ClassId(1);

    pub fn new(id: usize) -> Option<Self> {
        match u16::try_from(id) {
            Ok(v) if v >= 1 => Some(ClassId(v)),
            _ => None,
        }
    }

    /// Class with 0-based column `index`.
    pub fn from_index(index: usize) -> Self {
        ClassId(index as u16 + 1)
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Labeled(ClassId),
    Unlabeled,
}

/// Row-major `n_nodes x classes` domination levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationMatrix {
    classes: usize,
    kinds: Vec<NodeKind>,
    values: Vec<f64>,
}

impl DominationMatrix {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn n_nodes(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.classes..(i + 1) * self.classes]
    }

    pub fn unlabeled_count(&self) -> usize {
        self.kinds
            .iter()
            .filter(|k| matches!(k, NodeKind::Unlabeled))
            .count()
    }

    /// Builds a matrix from explicit rows. Rows are taken as given; use
    /// [`init_domination`] for the standard start state.
    pub fn from_parts(classes: usize, kinds: Vec<NodeKind>, values: Vec<f64>) -> Result<Self> {
        if classes < 2 {
            return Err(Error::TooFewClasses(classes));
        }
        if values.len() != kinds.len() * classes {
            return Err(Error::Config(alloc::format!(
                "{} values for {} nodes x {} classes",
                values.len(),
                kinds.len(),
                classes
            )));
        }
        Ok(Self {
            classes,
            kinds,
            values,
        })
    }
}

/// Start state: one-hot rows for seeds, `1/C` everywhere for unlabeled nodes.
///
/// Classes without any seed are logged but accepted.
pub fn init_domination(kinds: Vec<NodeKind>, classes: usize) -> Result<DominationMatrix> {
    if classes < 2 {
        return Err(Error::TooFewClasses(classes));
    }
    let mut seeded = vec![false; classes];
    let mut values = vec![1.0 / classes as f64; kinds.len() * classes];
    for (i, kind) in kinds.iter().enumerate() {
        if let NodeKind::Labeled(c) = *kind {
            if c.get() > classes {
                return Err(Error::ClassOutOfRange {
                    class: c.get(),
                    classes,
                });
            }
            seeded[c.index()] = true;
            let row = &mut values[i * classes..(i + 1) * classes];
            row.fill(0.0);
            row[c.index()] = 1.0;
        }
    }
    for (c, _) in seeded.iter().enumerate().filter(|(_, s)| !**s) {
        log::warn!("class {} has no seeds", c + 1);
    }
    Ok(DominationMatrix {
        classes,
        kinds,
        values,
    })
}

/// Read-only context for computing rows of the next step.
#[derive(Debug, Clone, Copy)]
pub struct StepKernel<'a> {
    graph: &'a PixelGraph,
    kinds: &'a [NodeKind],
    classes: usize,
}

impl<'a> StepKernel<'a> {
    pub fn new(graph: &'a PixelGraph, dom: &'a DominationMatrix) -> Result<Self> {
        if graph.n_nodes() != dom.n_nodes() {
            return Err(Error::NodeCountMismatch {
                graph: graph.n_nodes(),
                matrix: dom.n_nodes(),
            });
        }
        Ok(Self {
            graph,
            kinds: &dom.kinds,
            classes: dom.classes,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn n_nodes(&self) -> usize {
        self.kinds.len()
    }

    /// Writes rows `first_node..` of the next state into `out` (whose length
    /// is a multiple of the class count), reading only `prev`.
    ///
    /// Seeds and isolated unlabeled nodes copy their previous row.
    pub fn fill_rows(&self, first_node: usize, prev: &[f64], out: &mut [f64]) {
        let c = self.classes;
        for (offset, row) in out.chunks_exact_mut(c).enumerate() {
            let i = first_node + offset;
            let neighbors = self.graph.neighbors(i);
            if matches!(self.kinds[i], NodeKind::Labeled(_)) || neighbors.is_empty() {
                row.copy_from_slice(&prev[i * c..(i + 1) * c]);
                continue;
            }
            row.fill(0.0);
            for &j in neighbors {
                let src = &prev[j as usize * c..(j as usize + 1) * c];
                for (acc, v) in row.iter_mut().zip(src) {
                    *acc += v;
                }
            }
            let k = neighbors.len() as f64;
            for acc in row.iter_mut() {
                *acc /= k;
            }
        }
    }
}

/// One synchronous step, returning the state at `t + 1`.
pub fn propagation_step(dom: &DominationMatrix, graph: &PixelGraph) -> Result<DominationMatrix> {
    let kernel = StepKernel::new(graph, dom)?;
    let mut next = dom.clone();
    kernel.fill_rows(0, &dom.values, &mut next.values);
    Ok(next)
}

/// Mean over unlabeled nodes of the largest domination level; 1 when there
/// are no unlabeled nodes.
pub fn convergence_statistic(dom: &DominationMatrix) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, kind) in dom.kinds.iter().enumerate() {
        if matches!(kind, NodeKind::Unlabeled) {
            sum += dom.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max);
            count += 1;
        }
    }
    if count == 0 {
        1.0
    } else {
        sum / count as f64
    }
}

/// Argmax per node, ties to the lowest class.
pub fn decode_labels(dom: &DominationMatrix) -> Vec<ClassId> {
    (0..dom.n_nodes())
        .map(|i| match dom.kinds[i] {
            NodeKind::Labeled(c) => c,
            NodeKind::Unlabeled => ClassId::from_index(argmax(dom.row(i))),
        })
        .collect()
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceMonitor {
    pub check_interval: usize,
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for ConvergenceMonitor {
    fn default() -> Self {
        Self {
            check_interval: 10,
            epsilon: 1e-3,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub iteration: usize,
    pub statistic: f64,
}

#[derive(Debug, Clone)]
pub struct PropagationOutcome {
    pub matrix: DominationMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// Checkpoints in order, starting with the post-init baseline at iteration 0.
    pub checkpoints: Vec<Checkpoint>,
    /// Unlabeled nodes without neighbors; they keep their initial row.
    pub isolated: Vec<usize>,
}

/// Iterates until the checkpoint statistic rises by less than `epsilon`
/// (any drop also stops) or `max_iterations` steps have run.
pub fn run_propagation<E: Executor + ?Sized>(
    dom0: DominationMatrix,
    graph: &PixelGraph,
    monitor: &ConvergenceMonitor,
    exec: &E,
    mut on_checkpoint: impl FnMut(Checkpoint),
) -> Result<PropagationOutcome> {
    if monitor.check_interval == 0 {
        return Err(Error::Config("check_interval must be positive".into()));
    }
    StepKernel::new(graph, &dom0)?;
    let isolated: Vec<usize> = (0..dom0.n_nodes())
        .filter(|&i| matches!(dom0.kinds[i], NodeKind::Unlabeled) && graph.degree(i) == 0)
        .collect();
    if !isolated.is_empty() {
        log::warn!(
            "{} unlabeled node(s) have no neighbors and stay uniform",
            isolated.len()
        );
    }

    let mut prev_stat = convergence_statistic(&dom0);
    let baseline = Checkpoint {
        iteration: 0,
        statistic: prev_stat,
    };
    on_checkpoint(baseline);
    let mut checkpoints = vec![baseline];

    if dom0.unlabeled_count() == 0 {
        return Ok(PropagationOutcome {
            matrix: dom0,
            iterations: 0,
            converged: true,
            checkpoints,
            isolated,
        });
    }

    let mut current = dom0;
    let mut scratch = current.values.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < monitor.max_iterations {
        {
            let kernel = StepKernel {
                graph,
                kinds: &current.kinds,
                classes: current.classes,
            };
            exec.step(&kernel, &current.values, &mut scratch);
        }
        core::mem::swap(&mut current.values, &mut scratch);
        iterations += 1;
        if iterations % monitor.check_interval == 0 {
            let stat = convergence_statistic(&current);
            let cp = Checkpoint {
                iteration: iterations,
                statistic: stat,
            };
            on_checkpoint(cp);
            checkpoints.push(cp);
            if stat - prev_stat < monitor.epsilon {
                converged = true;
                break;
            }
            prev_stat = stat;
        }
    }
    if !converged {
        log::warn!(
            "propagation hit the {} iteration cap before converging",
            monitor.max_iterations
        );
    }
    Ok(PropagationOutcome {
        matrix: current,
        iterations,
        converged,
        checkpoints,
        isolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    fn c(id: usize) -> NodeKind {
        NodeKind::Labeled(ClassId::new(id).unwrap())
    }

    const U: NodeKind = NodeKind::Unlabeled;

    fn path(n: usize) -> PixelGraph {
        let lists: Vec<Vec<usize>> = (0..n)
            .map(|i| if i + 1 < n { vec![i + 1] } else { vec![] })
            .collect();
        PixelGraph::from_directed(&lists)
    }

    #[test]
    fn init_rows() {
        let d = init_domination(vec![c(1), U], 2).unwrap();
        assert_eq!(d.row(0), &[1.0, 0.0]);
        assert_eq!(d.row(1), &[0.5, 0.5]);
        let d = init_domination(vec![U], 4).unwrap();
        assert_eq!(d.row(0), &[0.25; 4]);
        assert_eq!(
            init_domination(vec![c(3)], 2),
            Err(Error::ClassOutOfRange {
                class: 3,
                classes: 2
            })
        );
        assert_eq!(init_domination(vec![U], 1), Err(Error::TooFewClasses(1)));
    }

    #[test]
    fn step_examples() {
        // A(c1) - B - C(c2)
        let g = path(3);
        let d = init_domination(vec![c(1), U, c(2)], 2).unwrap();
        let d1 = propagation_step(&d, &g).unwrap();
        assert_eq!(d1.row(1), &[0.5, 0.5]);
        assert_eq!(d1.row(0), d.row(0));
        assert_eq!(d1.row(2), d.row(2));

        // Star with center 0 and leaves (1,0), (1,0), (0,1).
        let g = PixelGraph::from_directed(&[vec![1, 2, 3], vec![], vec![], vec![]]);
        let d = init_domination(vec![U, c(1), c(1), c(2)], 2).unwrap();
        let d1 = propagation_step(&d, &g).unwrap();
        assert!((d1.row(0)[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((d1.row(0)[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn isolated_unlabeled_node_is_frozen() {
        let g = PixelGraph::from_directed(&[vec![1], vec![], vec![]]);
        let d = init_domination(vec![c(1), c(2), U], 2).unwrap();
        let out = run_propagation(d, &g, &ConvergenceMonitor::default(), &Sequential, |_| {}).unwrap();
        assert_eq!(out.isolated, vec![2]);
        assert_eq!(out.matrix.row(2), &[0.5, 0.5]);
        assert_eq!(decode_labels(&out.matrix)[2], ClassId::FIRST);
    }

    #[test]
    fn statistic_examples() {
        let d = init_domination(vec![U, U, U], 2).unwrap();
        assert_eq!(convergence_statistic(&d), 0.5);
        let d = DominationMatrix::from_parts(2, vec![U, U], vec![0.9, 0.1, 0.6, 0.4]).unwrap();
        assert!((convergence_statistic(&d) - 0.75).abs() < 1e-15);
        let d = DominationMatrix::from_parts(3, vec![U, U], vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(convergence_statistic(&d), 1.0);
        let d = init_domination(vec![c(1), c(2)], 2).unwrap();
        assert_eq!(convergence_statistic(&d), 1.0);
    }

    #[test]
    fn decode_examples() {
        let d = DominationMatrix::from_parts(
            4,
            vec![U, U, U],
            vec![0.7, 0.3, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let labels: Vec<usize> = decode_labels(&d).into_iter().map(ClassId::get).collect();
        assert_eq!(labels, vec![1, 1, 3]);
    }

    #[test]
    fn one_class_neighborhood_reaches_fixed_point_in_one_step() {
        let g = PixelGraph::from_directed(&[vec![2], vec![2, 3], vec![], vec![]]);
        let d = init_domination(vec![U, U, c(1), c(1)], 2).unwrap();
        let out = run_propagation(d, &g, &ConvergenceMonitor::default(), &Sequential, |_| {}).unwrap();
        assert!(out.converged);
        // Fixed after one step; the statistic jumps 0.5 -> 1 at iteration 10
        // and the first flat checkpoint is 20.
        assert_eq!(out.iterations, 20);
        let stats: Vec<f64> = out.checkpoints.iter().map(|c| c.statistic).collect();
        assert_eq!(stats, vec![0.5, 1.0, 1.0]);
        assert_eq!(out.matrix.row(0), &[1.0, 0.0]);
        assert_eq!(out.matrix.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn nothing_to_do_without_unlabeled_nodes() {
        let g = path(2);
        let d = init_domination(vec![c(1), c(2)], 2).unwrap();
        let out = run_propagation(d.clone(), &g, &ConvergenceMonitor::default(), &Sequential, |_| {}).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.matrix, d);
    }

    #[test]
    fn four_node_path_splits_by_symmetry() {
        let g = path(4);
        let d = init_domination(vec![c(1), U, U, c(2)], 2).unwrap();
        let mut seen = Vec::new();
        let out = run_propagation(d, &g, &ConvergenceMonitor::default(), &Sequential, |cp| seen.push(cp)).unwrap();
        assert!(out.converged);
        assert_eq!(seen.len(), out.checkpoints.len());
        assert_eq!(seen[0].iteration, 0);
        // Fixed point: B = (2/3, 1/3), C = (1/3, 2/3).
        assert!((out.matrix.row(1)[0] - 2.0 / 3.0).abs() < 1e-3);
        assert!((out.matrix.row(2)[1] - 2.0 / 3.0).abs() < 1e-3);
        let labels = decode_labels(&out.matrix);
        assert_eq!((labels[1].get(), labels[2].get()), (1, 2));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let g = path(4);
        let d = init_domination(vec![c(1), U, U, c(2)], 2).unwrap();
        let monitor = ConvergenceMonitor {
            max_iterations: 3,
            ..Default::default()
        };
        let out = run_propagation(d, &g, &monitor, &Sequential, |_| {}).unwrap();
        assert_eq!(out.iterations, 3);
        assert!(!out.converged);
    }

    #[test]
    fn mismatched_graph_rejected() {
        let d = init_domination(vec![U, U, U], 2).unwrap();
        assert!(propagation_step(&d, &path(2)).is_err());
    }
}
