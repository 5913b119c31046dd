//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls the k-d tree, the CSR graph or the
//! propagation kernel.
#![allow(dead_code)]

use std::collections::BTreeSet;

use lpseg_core::features::{extract_features, Lambda, RgbImage, FEATURE_COUNT};
use lpseg_core::seeds::{SeedMap, SeedRole};
use lpseg_core::ClassId;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for d in 0..a.len() {
        let t = a[d] - b[d];
        s += t * t;
    }
    s
}

/// Exhaustive kNN for point `i`: all other points sorted by (distance, id).
pub fn brute_knn(points: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = (0..points.len())
        .filter(|&j| j != i)
        .map(|j| (sq_dist(&points[i], &points[j]), j))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.truncate(k);
    all.into_iter().map(|(_, j)| j).collect()
}

/// OR-rule edge set as `(min, max)` pairs.
pub fn brute_knn_edges(points: &[Vec<f64>], k: usize) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for i in 0..points.len() {
        for j in brute_knn(points, i, k) {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    edges
}

pub fn random_points(rng: &mut StdRng, n: usize, dim: usize, grid: Option<u32>) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| match grid {
                    // Coarse integer grid: forces many exact distance ties.
                    Some(levels) => rng.random_range(0..levels) as f64,
                    None => rng.random_range(-1.0..1.0),
                })
                .collect()
        })
        .collect()
}

/// Dense `n x n` averaging operator: row `i` averages the neighbors of an
/// unlabeled node with at least one neighbor; every other row is identity.
pub fn averaging_matrix(n: usize, edges: &BTreeSet<(usize, usize)>, labeled: &[bool]) -> Vec<Vec<f64>> {
    let mut adj = vec![vec![false; n]; n];
    for &(i, j) in edges {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        let deg = adj[i].iter().filter(|&&a| a).count();
        if labeled[i] || deg == 0 {
            w[i][i] = 1.0;
        } else {
            for j in 0..n {
                if adj[i][j] {
                    w[i][j] = 1.0 / deg as f64;
                }
            }
        }
    }
    w
}

/// Initial `n x C` state: one-hot seeds, uniform elsewhere.
pub fn initial_state(seeds: &[Option<usize>], classes: usize) -> Vec<Vec<f64>> {
    seeds
        .iter()
        .map(|s| match s {
            Some(c) => (0..classes).map(|j| if j == *c { 1.0 } else { 0.0 }).collect(),
            None => vec![1.0 / classes as f64; classes],
        })
        .collect()
}

pub fn matmul(w: &[Vec<f64>], v: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = w.len();
    let c = v[0].len();
    let mut out = vec![vec![0.0; c]; n];
    for i in 0..n {
        for j in 0..n {
            if w[i][j] != 0.0 {
                for k in 0..c {
                    out[i][k] += w[i][j] * v[j][k];
                }
            }
        }
    }
    out
}

pub fn mean_max(v: &[Vec<f64>], seeds: &[Option<usize>]) -> f64 {
    let rows: Vec<f64> = v
        .iter()
        .zip(seeds)
        .filter(|(_, s)| s.is_none())
        .map(|(r, _)| r.iter().cloned().fold(f64::MIN, f64::max))
        .collect();
    if rows.is_empty() {
        1.0
    } else {
        rows.iter().sum::<f64>() / rows.len() as f64
    }
}

/// Dense recurrence with the checkpoint stopping rule (every 10 steps,
/// stop when the mean max rises by less than 1e-3; cap 10 000).
pub fn dense_run(w: &[Vec<f64>], v0: Vec<Vec<f64>>, seeds: &[Option<usize>]) -> (Vec<Vec<f64>>, usize) {
    if seeds.iter().all(Option::is_some) {
        return (v0, 0);
    }
    let mut v = v0;
    let mut prev = mean_max(&v, seeds);
    for t in 1..=10_000 {
        v = matmul(w, &v);
        if t % 10 == 0 {
            let s = mean_max(&v, seeds);
            if s - prev < 1e-3 {
                return (v, t);
            }
            prev = s;
        }
    }
    (v, 10_000)
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for c in 1..row.len() {
        if row[c] > row[best] {
            best = c;
        }
    }
    best
}

/// The checkpoint rule of [`dense_run`] over adjacency lists, for graphs too
/// large for a dense matrix. Rows are averaged as `sum(w_ij * v_j)` with
/// `w_ij = 1/deg`, like the dense form.
pub fn sparse_run(
    adj: &[Vec<usize>],
    v0: Vec<Vec<f64>>,
    seeds: &[Option<usize>],
) -> (Vec<Vec<f64>>, usize) {
    if seeds.iter().all(Option::is_some) {
        return (v0, 0);
    }
    let c = v0[0].len();
    let mut v = v0;
    let mut prev = mean_max(&v, seeds);
    for t in 1..=10_000 {
        let mut next = v.clone();
        for i in 0..v.len() {
            if seeds[i].is_some() || adj[i].is_empty() {
                continue;
            }
            let w = 1.0 / adj[i].len() as f64;
            let mut row = vec![0.0; c];
            for &j in &adj[i] {
                for k in 0..c {
                    row[k] += w * v[j][k];
                }
            }
            next[i] = row;
        }
        v = next;
        if t % 10 == 0 {
            let s = mean_max(&v, seeds);
            if s - prev < 1e-3 {
                return (v, t);
            }
            prev = s;
        }
    }
    (v, 10_000)
}

/// Whole pipeline with exhaustive kNN and list-based propagation. Feature
/// extraction is shared with the implementation (it has its own oracles).
/// Returns per-pixel 1-based labels (ignored pixels -> 2) and the iteration count.
pub fn brute_pipeline(image: &RgbImage, seeds: &SeedMap, k: usize, lambda: &Lambda) -> (Vec<usize>, usize) {
    let feats = extract_features(image, lambda);
    let nodes: Vec<usize> = (0..seeds.len())
        .filter(|&i| seeds.roles()[i] != SeedRole::Ignored)
        .collect();
    let points: Vec<Vec<f64>> = nodes.iter().map(|&p| feats.row(p).to_vec()).collect();
    let node_seeds: Vec<Option<usize>> = nodes
        .iter()
        .map(|&p| match seeds.roles()[p] {
            SeedRole::Labeled(c) => Some(c.index()),
            _ => None,
        })
        .collect();
    let all_seeded = node_seeds.iter().all(Option::is_some);
    let mut adj = vec![Vec::new(); points.len()];
    if !all_seeded {
        for (i, j) in brute_knn_edges(&points, k) {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
    }
    let (v, iters) = sparse_run(&adj, initial_state(&node_seeds, seeds.classes()), &node_seeds);
    let mut labels = vec![2; seeds.len()];
    for (n, &p) in nodes.iter().enumerate() {
        labels[p] = match node_seeds[n] {
            Some(c) => c + 1,
            None => argmax(&v[n]) + 1,
        };
    }
    (labels, iters)
}

/// `width x height` image whose left half is pure red and right half pure blue.
pub fn two_tone(width: usize, height: usize) -> RgbImage {
    let px = (0..width * height)
        .map(|i| {
            if i % width < width / 2 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 0.0, 1.0]
            }
        })
        .collect();
    RgbImage::new(width, height, px).unwrap()
}

/// Trimap for [`two_tone`]: `per_class` foreground seeds on the left half,
/// mirrored background seeds on the right, everything else unlabeled. The
/// first pair sits on the two boundary columns: their neighborhood statistics
/// mix both colors, so they form clusters of their own that need a seed.
pub fn two_tone_trimap(width: usize, height: usize, per_class: usize) -> Vec<u8> {
    let half = width / 2;
    let mut t = vec![128u8; width * height];
    for s in 0..per_class {
        let row = (s * 7 + 3) % height;
        let offset = (s * 5) % half;
        t[row * width + half - 1 - offset] = 255;
        t[row * width + half + offset] = 64;
    }
    t
}

/// Ground truth matching [`two_tone`]: left foreground, right background.
pub fn two_tone_gt(width: usize, height: usize) -> Vec<u8> {
    (0..width * height)
        .map(|i| if i % width < width / 2 { 255 } else { 0 })
        .collect()
}

pub fn class(i: usize) -> ClassId {
    ClassId::new(i).unwrap()
}

pub fn random_image(rng: &mut StdRng, width: usize, height: usize) -> RgbImage {
    let px = (0..width * height)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    RgbImage::new(width, height, px).unwrap()
}

pub const N_FEATURES: usize = FEATURE_COUNT;
