//! Discwise active learning for sequential LiDAR segmentation.
//!
//! The pipeline runs in four stages, each in its own module:
//!
//! 1. [`uncertainty`] turns a stack of stochastic forward passes into a
//!    per-point score (mutual information, or one of the softmax baselines).
//! 2. [`aggregation`] pools point scores into globally indexed voxels and sums
//!    the pooled values inside each candidate disc.
//! 3. [`selection`] picks the next discs to label by solving the budgeted
//!    maximum-coverage program exactly, or with one of the baselines.
//! 4. [`sim`] closes the loop with a synthetic scene, a surrogate predictor
//!    and a disc-labeling oracle.
//!
//! [`scene`] carries frames, poses and disc geometry, and [`ssl`] holds the
//! loss and update kernels of the mean-teacher stage.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregation;
mod math;
pub mod scene;
pub mod selection;
pub mod sim;
pub mod ssl;
pub mod uncertainty;

/// A point or vector in 3D, in meters unless noted otherwise.
pub type Point3 = [f64; 3];

pub use aggregation::{DiscScore, Pooling, VoxelGrid};
pub use scene::{DiscCandidate, DistanceMode, Frame, FrameLabelStatus, GlobalCloud, LabelStatus, Pose};
pub use selection::{Certificate, IntersectionPolicy, SelectionError, SelectionProblem, SelectionSolution};
pub use uncertainty::{Metric, PassStack, UncertaintyField};
