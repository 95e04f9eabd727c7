use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{CameraIntrinsics, CameraRig, PoseSE3, RigCamera};

/// Textured analytic primitive. Colors come from a two-tone checker over the
/// primitive's local surface coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    /// Finite rectangle: local z is the normal, extents along local x/y.
    Rect {
        pose: PoseSE3,
        half_w: f64,
        half_h: f64,
        cell: f64,
        color_a: [f64; 3],
        color_b: [f64; 3],
    },
    /// Box with the given half extents in its local frame.
    Box {
        pose: PoseSE3,
        half_extents: [f64; 3],
        cell: f64,
        color_a: [f64; 3],
        color_b: [f64; 3],
    },
}

/// A box-shaped object with a pose per frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicObject {
    pub half_extents: [f64; 3],
    pub poses: Vec<PoseSE3>,
    pub cell: f64,
    pub color_a: [f64; 3],
    pub color_b: [f64; 3],
}

fn default_lidar_rays() -> usize {
    4096
}

/// Full description of a synthetic scene; generation is deterministic given
/// `rng_seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneSpec {
    pub name: String,
    pub rig: CameraRig,
    /// Ego-to-world pose per frame.
    pub ego_trajectory: Vec<PoseSE3>,
    pub static_geometry: Vec<Primitive>,
    #[serde(default)]
    pub dynamic_objects: Vec<DynamicObject>,
    pub rng_seed: u64,
    #[serde(default = "default_lidar_rays")]
    pub lidar_rays_per_frame: usize,
}

impl SceneSpec {
    pub fn num_frames(&self) -> usize {
        self.ego_trajectory.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.rig.validate()?;
        if self.ego_trajectory.is_empty() {
            return Err(CoreError::InvalidConfig("trajectory needs N >= 1 frames".into()));
        }
        if self.static_geometry.is_empty() && self.dynamic_objects.is_empty() {
            return Err(CoreError::EmptyScene);
        }
        for obj in &self.dynamic_objects {
            if obj.poses.len() != self.num_frames() {
                return Err(CoreError::InvalidConfig(format!(
                    "dynamic object has {} poses for {} frames",
                    obj.poses.len(),
                    self.num_frames()
                )));
            }
        }
        Ok(())
    }
}

fn yaw_pose(yaw_deg: f64, t: Vector3<f64>) -> PoseSE3 {
    let rot = Rotation3::from_axis_angle(&Vector3::y_axis(), yaw_deg.to_radians());
    PoseSE3::new(rot.into_inner(), t)
}

/// Default desk-scale scene: a 3-camera rig (left / front / right, 90 degree
/// yaw separation, zero-mean translations), a forward trajectory with a
/// slight turn, checkered walls and ground, one parked and one moving box.
///
/// World axes follow the camera convention: x right, y down, z forward.
pub fn default_scene_spec(seed: u64) -> SceneSpec {
    default_scene_spec_frames(seed, 8)
}

/// [`default_scene_spec`] with a chosen trajectory length.
pub fn default_scene_spec_frames(seed: u64, num_frames: usize) -> SceneSpec {
    let intr = CameraIntrinsics::centered(32.0, 32.0, 56, 28);
    let rig = CameraRig {
        cameras: vec![
            RigCamera {
                camera_id: "cam_left".into(),
                extrinsic: yaw_pose(-90.0, Vector3::new(-1.0, 0.25, 0.0)),
                intrinsics: intr.clone(),
            },
            RigCamera {
                camera_id: "cam_front".into(),
                extrinsic: yaw_pose(0.0, Vector3::new(0.0, -0.5, 0.0)),
                intrinsics: intr.clone(),
            },
            RigCamera {
                camera_id: "cam_right".into(),
                extrinsic: yaw_pose(90.0, Vector3::new(1.0, 0.25, 0.0)),
                intrinsics: intr,
            },
        ],
    };

    let ego_trajectory: Vec<PoseSE3> = (0..num_frames)
        .map(|i| {
            let s = i as f64;
            yaw_pose(3.0 * s, Vector3::new(0.05 * s * s, 0.0, 0.9 * s))
        })
        .collect();

    let ground = Primitive::Rect {
        pose: PoseSE3::new(
            Rotation3::from_axis_angle(&Vector3::x_axis(), std::f64::consts::FRAC_PI_2)
                .into_inner(),
            Vector3::new(0.0, 2.0, 10.0),
        ),
        half_w: 40.0,
        half_h: 40.0,
        cell: 1.5,
        color_a: [0.35, 0.3, 0.25],
        color_b: [0.2, 0.18, 0.15],
    };
    let wall_left = Primitive::Rect {
        pose: yaw_pose(90.0, Vector3::new(-6.0, 0.0, 10.0)),
        half_w: 30.0,
        half_h: 4.0,
        cell: 1.0,
        color_a: [0.7, 0.3, 0.2],
        color_b: [0.9, 0.8, 0.6],
    };
    let wall_right = Primitive::Rect {
        pose: yaw_pose(-90.0, Vector3::new(6.0, 0.0, 10.0)),
        half_w: 30.0,
        half_h: 4.0,
        cell: 0.8,
        color_a: [0.2, 0.5, 0.7],
        color_b: [0.85, 0.85, 0.9],
    };
    let wall_back = Primitive::Rect {
        pose: yaw_pose(0.0, Vector3::new(0.0, 0.0, 30.0)),
        half_w: 10.0,
        half_h: 4.0,
        cell: 1.2,
        color_a: [0.4, 0.6, 0.3],
        color_b: [0.15, 0.25, 0.1],
    };
    let parked_box = Primitive::Box {
        pose: yaw_pose(20.0, Vector3::new(-3.0, 1.2, 8.0)),
        half_extents: [0.8, 0.8, 1.6],
        cell: 0.5,
        color_a: [0.85, 0.75, 0.2],
        color_b: [0.3, 0.25, 0.05],
    };

    let moving_box = DynamicObject {
        half_extents: [0.6, 0.6, 1.2],
        poses: (0..num_frames)
            .map(|i| yaw_pose(-5.0 * i as f64, Vector3::new(2.5, 1.3, 5.0 + 0.5 * i as f64)))
            .collect(),
        cell: 0.4,
        color_a: [0.8, 0.2, 0.6],
        color_b: [0.95, 0.9, 0.9],
    };

    SceneSpec {
        name: "desk-default".into(),
        rig,
        ego_trajectory,
        static_geometry: vec![ground, wall_left, wall_right, wall_back, parked_box],
        dynamic_objects: vec![moving_box],
        rng_seed: seed,
        lidar_rays_per_frame: 4096,
    }
}
