//! Exact k-nearest-neighbor search with a k-d tree.
//!
//! Splits cycle through dimensions by depth at the median; points whose
//! coordinate equals the split value go to the right child. Ties in distance
//! are resolved by the lower point id, so results never depend on traversal
//! order.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

const LEAF_SIZE: usize = 8;

/// Borrowed row-major point set.
#[derive(Debug, Clone, Copy)]
pub struct Points<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> Points<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                len: data.len(),
                dim,
            });
        }
        Ok(Self { data, dim })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Squared Euclidean distance, summed in dimension order.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    points: Points<'a>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// Candidate neighbor ordered by `(distance, id)`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist: f64,
    id: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.id.cmp(&other.id))
    }
}

impl<'a> KdTree<'a> {
    pub fn build(points: Points<'a>) -> Self {
        let mut tree = KdTree {
            points,
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build_node(0, points.len(), 0);
        }
        tree
    }

    pub fn points(&self) -> Points<'a> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build_node(&mut self, start: usize, end: usize, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let pts = self.points;
        for attempt in 0..pts.dim {
            let dim = (depth + attempt) % pts.dim;
            self.order[start..end].sort_unstable_by(|&a, &b| {
                pts.point(a)[dim]
                    .total_cmp(&pts.point(b)[dim])
                    .then(a.cmp(&b))
            });
            let slice = &self.order[start..end];
            let mut value = pts.point(slice[slice.len() / 2])[dim];
            let mut split = slice.partition_point(|&i| pts.point(i)[dim] < value);
            if split == 0 {
                // The lower half all sits on the minimum; split just above it.
                split = slice.partition_point(|&i| pts.point(i)[dim] <= value);
                if split == slice.len() {
                    // Constant along this axis.
                    continue;
                }
                value = pts.point(slice[split])[dim];
            }
            let left = self.build_node(start, start + split, depth + 1);
            let right = self.build_node(start + split, end, depth + 1);
            self.nodes[id] = Node::Split {
                dim,
                value,
                left,
                right,
            };
            return id;
        }
        // Every point in this range is identical.
        id
    }

    /// Exact `k` nearest points to `query`, ascending by `(distance, id)`.
    /// `exclude` removes one point id (the query itself, for member queries).
    pub fn knn(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Result<Vec<usize>> {
        if query.len() != self.points.dim {
            return Err(Error::QueryDimension {
                expected: self.points.dim,
                actual: query.len(),
            });
        }
        let available = self.len() - usize::from(exclude.is_some_and(|e| e < self.len()));
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if k > available {
            return Err(Error::KTooLarge {
                k,
                nodes: available,
            });
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, exclude, &mut heap);
        Ok(heap.into_sorted_vec().into_iter().map(|c| c.id).collect())
    }

    fn search(
        &self,
        node: usize,
        query: &[f64],
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &id in &self.order[start..end] {
                    if Some(id) == exclude {
                        continue;
                    }
                    let cand = Candidate {
                        dist: squared_distance(query, self.points.point(id)),
                        id,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if heap.peek().is_some_and(|worst| cand < *worst) {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = query[dim] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, query, k, exclude, heap);
                // A far-side point at exactly the current worst distance can
                // still win on id, so only strictly farther planes are pruned.
                let bound = diff * diff;
                let visit_far = heap.len() < k || heap.peek().is_some_and(|w| bound <= w.dist);
                if visit_far {
                    self.search(far, query, k, exclude, heap);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn brute(points: Points<'_>, q: usize, k: usize) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> = (0..points.len())
            .filter(|&j| j != q)
            .map(|j| (squared_distance(points.point(q), points.point(j)), j))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|p| p.1).collect()
    }

    #[test]
    fn nearest_member() {
        let data = [0.0, 1.0, 10.0];
        let pts = Points::new(&data, 1).unwrap();
        let tree = KdTree::build(pts);
        assert_eq!(tree.knn(&[0.0], 1, Some(0)).unwrap(), vec![1]);
        assert_eq!(tree.knn(&[10.0], 1, Some(2)).unwrap(), vec![1]);
        assert_eq!(tree.knn(&[10.0], 2, Some(2)).unwrap(), vec![1, 0]);
    }

    #[test]
    fn duplicates_are_nearest() {
        let data = [3.0, 3.0, 0.0, 0.0, 3.0, 3.0, 7.0, 1.0];
        let pts = Points::new(&data, 2).unwrap();
        let tree = KdTree::build(pts);
        assert_eq!(tree.knn(&[3.0, 3.0], 1, Some(0)).unwrap(), vec![2]);
        assert_eq!(tree.knn(&[3.0, 3.0], 1, Some(2)).unwrap(), vec![0]);
    }

    #[test]
    fn all_identical_points_tie_by_id() {
        let data = vec![0.5; 40 * 3];
        let pts = Points::new(&data, 3).unwrap();
        let tree = KdTree::build(pts);
        assert_eq!(tree.knn(&[0.5; 3], 4, Some(2)).unwrap(), vec![0, 1, 3, 4]);
    }

    #[test]
    fn grid_ties_match_brute_force() {
        // Integer lattice: lots of equal distances crossing split planes.
        let mut data = Vec::new();
        for r in 0..9 {
            for c in 0..7 {
                data.push(r as f64);
                data.push(c as f64);
            }
        }
        let pts = Points::new(&data, 2).unwrap();
        let tree = KdTree::build(pts);
        for q in 0..pts.len() {
            for k in [1, 4, 8, 13] {
                assert_eq!(tree.knn(pts.point(q), k, Some(q)).unwrap(), brute(pts, q, k));
            }
        }
    }

    #[test]
    fn errors() {
        let data = [0.0, 1.0];
        let pts = Points::new(&data, 1).unwrap();
        let tree = KdTree::build(pts);
        assert_eq!(
            tree.knn(&[0.0], 2, Some(0)),
            Err(Error::KTooLarge { k: 2, nodes: 1 })
        );
        assert!(tree.knn(&[0.0, 0.0], 1, None).is_err());
        assert!(Points::new(&[0.0; 5], 2).is_err());
    }
}
