//! Non-learned rigid-body and camera math: SE(3) poses, rig normalization,
//! 10-D camera vector encoding, scale estimation and depth/point projections.
//!
//! Everything here is a pure function over immutable inputs.

mod camera;
mod depth;
mod projection;
mod scale;
mod se3;
mod vector10;

pub use camera::{
    normalize_rig_translations, rig_normalization_stats, CameraIntrinsics, CameraRig, RigCamera,
    RigStats,
};
pub use depth::DepthMap;
pub use projection::{depth_to_points, project_points_to_depth};
pub use scale::estimate_scale;
pub use se3::{compose_pose, PoseSE3};
pub use vector10::{decode_camera_vector, encode_camera_vector, CameraVector10};
