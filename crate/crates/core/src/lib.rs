//! Multi-camera feed-forward 4D reconstruction at desk scale.
//!
//! The pipeline processes an M-camera, N-frame synthetic scene in two
//! attention stages: per-camera temporal attention (no cross-camera edges)
//! followed by windowed cross-camera consistency attention conditioned on
//! normalized rig pose embeddings. Decoupled heads predict per-frame ego
//! motion, time-invariant rig extrinsics, dense depth with confidence, and
//! a metric scale factor recovered from the calibrated rig.
//!
//! Crate layout:
//! - [`geometry`]: SE(3) poses, camera encodings, scale recovery, projections
//! - [`synthetic`]: ray-cast scene generator, lidar-style sparse depth, densification
//! - [`tape`]: reverse-mode autodiff over f64 ndarrays
//! - [`model`]: token backbone, temporal attention, windowed consistency attention, heads
//! - [`losses`]: depth / pose / total training losses
//! - [`train`]: toy training loop with JSON-lines logging
//! - [`eval`]: pose AUC, depth metrics, attention benchmarking, ablations
//! - [`io`]: raw array files, PLY export, checkpoints

pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod losses;
pub mod model;
pub mod synthetic;
pub mod tape;
pub mod train;

pub use error::CoreError;
pub use geometry::{CameraIntrinsics, CameraRig, CameraVector10, DepthMap, PoseSE3};
