use nalgebra::Vector3;

use crate::geometry::{compose_pose, DepthMap, PoseSE3};
use crate::synthetic::densify::densify_depth;
use crate::synthetic::render::FrameBundle;
use crate::synthetic::scene::{DynamicObject, SceneSpec};

const BOX_EPS: f64 = 1e-9;

fn inside_box(obj: &DynamicObject, pose: &PoseSE3, p: &Vector3<f64>) -> Option<Vector3<f64>> {
    let local = pose.inverse().transform_point(p);
    let e = obj.half_extents;
    if local.x.abs() <= e[0] + BOX_EPS
        && local.y.abs() <= e[1] + BOX_EPS
        && local.z.abs() <= e[2] + BOX_EPS
    {
        Some(local)
    } else {
        None
    }
}

/// Merge per-frame sparse points into one world cloud.
///
/// Static points pass through unchanged. A point captured at frame `i` inside
/// a dynamic object's box is re-expressed in the object's local frame and
/// re-posed into every frame through that object's per-frame pose, so moving
/// surfaces contribute at each of their observed locations.
pub fn aggregate_sparse_points(
    frames: &[FrameBundle],
    dynamic_objects: &[DynamicObject],
) -> Vec<Vector3<f64>> {
    let mut out = Vec::new();
    for frame in frames {
        for p in &frame.sparse_points {
            let hit = dynamic_objects.iter().find_map(|obj| {
                inside_box(obj, &obj.poses[frame.frame_index], p).map(|local| (obj, local))
            });
            match hit {
                Some((obj, local)) => {
                    for pose in &obj.poses {
                        out.push(pose.transform_point(&local));
                    }
                }
                None => out.push(*p),
            }
        }
    }
    out
}

/// Split a scene's sparse points into static world points and dynamic
/// (object index, local coordinates) samples.
fn classify_points(
    spec: &SceneSpec,
    frames: &[FrameBundle],
) -> (Vec<Vector3<f64>>, Vec<(usize, Vector3<f64>)>) {
    let mut static_points = Vec::new();
    let mut dynamic_points = Vec::new();
    for frame in frames {
        for p in &frame.sparse_points {
            let hit = spec.dynamic_objects.iter().enumerate().find_map(|(k, obj)| {
                inside_box(obj, &obj.poses[frame.frame_index], p).map(|local| (k, local))
            });
            match hit {
                Some(entry) => dynamic_points.push(entry),
                None => static_points.push(*p),
            }
        }
    }
    (static_points, dynamic_points)
}

/// Two-step dense depth enhancement for every (frame, camera) pair:
/// aggregate multi-frame points (dynamic surfaces posed at the target
/// frame), project into the camera with nearest-depth-wins, then fill gaps
/// with [`densify_depth`].
pub fn enhanced_depth_maps(
    spec: &SceneSpec,
    frames: &[FrameBundle],
    kernel: usize,
) -> Vec<Vec<DepthMap>> {
    let (static_points, dynamic_points) = classify_points(spec, frames);
    frames
        .iter()
        .map(|frame| {
            let mut points = static_points.clone();
            for (k, local) in &dynamic_points {
                points.push(spec.dynamic_objects[*k].poses[frame.frame_index].transform_point(local));
            }
            spec.rig
                .cameras
                .iter()
                .map(|cam| {
                    let cam_to_world = compose_pose(&frame.ego_pose, &cam.extrinsic);
                    let sparse = crate::geometry::project_points_to_depth(
                        &points,
                        &cam.intrinsics,
                        &cam_to_world,
                    );
                    densify_depth(&sparse, kernel)
                })
                .collect()
        })
        .collect()
}
