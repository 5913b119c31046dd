//! Undirected, unweighted kNN graph in compressed adjacency form.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::kdtree::{KdTree, Points};

/// `j` is in `neighbors(i)` iff `i` is in `neighbors(j)`. Lists are sorted
/// ascending and contain neither `i` itself nor duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    node_to_pixel: Vec<usize>,
}

impl PixelGraph {
    /// Symmetric closure of directed neighbor lists (`i -> j` for every `j`
    /// in `lists[i]`). Self references are dropped.
    pub fn from_directed(lists: &[Vec<usize>]) -> Self {
        let n = lists.len();
        let mut edges: Vec<(u32, u32)> = Vec::with_capacity(2 * lists.iter().map(Vec::len).sum::<usize>());
        for (i, list) in lists.iter().enumerate() {
            for &j in list {
                debug_assert!(j < n);
                if i != j {
                    edges.push((i as u32, j as u32));
                    edges.push((j as u32, i as u32));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();

        let mut offsets = vec![0usize; n + 1];
        for &(i, _) in &edges {
            offsets[i as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = edges.into_iter().map(|(_, j)| j).collect();
        Self {
            offsets,
            neighbors,
            node_to_pixel: (0..n).collect(),
        }
    }

    /// Replaces the identity node-to-pixel mapping.
    pub fn with_pixel_map(mut self, node_to_pixel: Vec<usize>) -> Self {
        assert_eq!(node_to_pixel.len(), self.n_nodes());
        self.node_to_pixel = node_to_pixel;
        self
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_ids(&self) -> &[u32] {
        &self.neighbors
    }

    pub fn node_to_pixel(&self) -> &[usize] {
        &self.node_to_pixel
    }

    /// Each undirected edge once as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_nodes()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }
}

/// Directed kNN lists for every point of the tree, computed on `exec`.
pub fn knn_lists<E: Executor + ?Sized>(tree: &KdTree<'_>, k: usize, exec: &E) -> Result<Vec<Vec<usize>>> {
    exec.knn_lists(tree, k)
}

/// Builds the OR-rule kNN graph: `i` and `j` are adjacent when either is
/// among the other's `k` nearest (Euclidean, ties to the lower id).
pub fn build_knn_graph(points: Points<'_>, k: usize) -> Result<PixelGraph> {
    build_knn_graph_on(points, k, &Sequential)
}

pub fn build_knn_graph_on<E: Executor + ?Sized>(
    points: Points<'_>,
    k: usize,
    exec: &E,
) -> Result<PixelGraph> {
    let n = points.len();
    if k == 0 {
        return Err(Error::ZeroK);
    }
    if n < 2 || k >= n {
        return Err(Error::KTooLarge { k, nodes: n });
    }
    let tree = KdTree::build(points);
    let lists = knn_lists(&tree, k, exec)?;
    Ok(PixelGraph::from_directed(&lists))
}
