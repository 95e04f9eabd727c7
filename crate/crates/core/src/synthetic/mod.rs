//! Synthetic desk-scale multi-camera driving scenes with exact ground truth.
//!
//! Scenes are ray-cast over analytic primitives so depth oracles are exact.
//! The sparse "lidar" is surface subsampling from the ego position; dense
//! training depth comes from the two-step enhancement: aggregate multi-frame
//! points, project per camera, then fill gaps from nearest valid neighbors.

mod dataset;
mod densify;
mod lidar;
mod render;
mod scene;

pub use dataset::{load_dataset, scene_dir, write_dataset, DepthSource, FramePoses, LoadedFrame};
pub use densify::densify_depth;
pub use lidar::{aggregate_sparse_points, enhanced_depth_maps};
pub use render::{generate_scene, generate_scene_threaded, CameraFrame, FrameBundle};
pub use scene::{default_scene_spec, default_scene_spec_frames, DynamicObject, Primitive, SceneSpec};
