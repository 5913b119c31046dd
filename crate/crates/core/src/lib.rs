//! Interactive image segmentation by label propagation on unweighted kNN graphs.
//!
//! Every pixel becomes a node described by 23 normalized, weighted features.
//! Nodes are connected to their `k` nearest neighbors (undirected, unweighted),
//! and each unlabeled node repeatedly replaces its class-domination vector with
//! the mean of its neighbors' vectors until the average maximum domination
//! level stops increasing. The final label of a node is its dominant class.
//!
//! This crate is `no_std` (it needs `alloc`). Everything that touches files,
//! threads or the network lives in the `lpseg` companion crate; the hooks for
//! that are the [`Executor`] trait and the plain-slice decoders in [`seeds`].
//!
//! ```
//! use lpseg_core::{pipeline, seeds, Lambda, RgbImage, SegParams, Sequential};
//!
//! // 4x1 image: two red pixels then two blue ones.
//! let px = [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]];
//! let image = RgbImage::new(4, 1, px.to_vec()).unwrap();
//! let trimap = [255u8, 128, 128, 64];
//! let seeds = seeds::decode_trimap(4, 1, &trimap).unwrap();
//! let params = SegParams::new(1, Lambda::ones()).unwrap();
//! let result = pipeline::segment(&image, &seeds, &params, &Sequential).unwrap();
//! assert_eq!(result.labels()[1].get(), 1);
//! assert_eq!(result.labels()[2].get(), 2);
//! ```
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod exec;

pub mod features;
pub mod ga;
pub mod graph;
pub mod kdtree;
pub mod metrics;
pub mod pipeline;
pub mod propagation;
pub mod seeds;

pub use error::{Error, Result};
pub use exec::{knn_range, Executor, Sequential};
pub use features::{FeatureMatrix, Lambda, RgbImage, SegParams, FEATURE_COUNT};
pub use graph::PixelGraph;
pub use kdtree::{KdTree, Points};
pub use propagation::{ClassId, ConvergenceMonitor, DominationMatrix, NodeKind};
pub use seeds::{GroundTruth, SeedMap, SeedRole};
