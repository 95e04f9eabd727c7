use nalgebra::Vector3;

use crate::geometry::{CameraIntrinsics, DepthMap, PoseSE3};

/// Unproject a depth map into a world-frame point cloud.
///
/// Per valid pixel `(u, v)` with depth `d`, the camera-frame point is
/// `scale * d * ((u - cx)/fx, (v - cy)/fy, 1)`, then mapped through
/// `cam_to_world`. Output order is row-major over valid pixels.
pub fn depth_to_points(
    depth: &DepthMap,
    intrinsics: &CameraIntrinsics,
    cam_to_world: &PoseSE3,
    scale: f64,
) -> Vec<Vector3<f64>> {
    let mut points = Vec::with_capacity(depth.valid_count());
    for v in 0..depth.height() {
        for u in 0..depth.width() {
            if !depth.mask[(v, u)] {
                continue;
            }
            let d = scale * depth.depth[(v, u)];
            let p_cam = Vector3::new(
                d * (u as f64 - intrinsics.cx) / intrinsics.fx,
                d * (v as f64 - intrinsics.cy) / intrinsics.fy,
                d,
            );
            points.push(cam_to_world.transform_point(&p_cam));
        }
    }
    points
}

/// Project world points into a camera and rasterize a sparse depth map.
///
/// Points are rounded to the nearest pixel; when several points land on one
/// pixel the nearest depth wins. Points behind the camera or outside the
/// image are dropped.
pub fn project_points_to_depth(
    points: &[Vector3<f64>],
    intrinsics: &CameraIntrinsics,
    cam_to_world: &PoseSE3,
) -> DepthMap {
    let world_to_cam = cam_to_world.inverse();
    let mut out = DepthMap::invalid(intrinsics.height, intrinsics.width);
    for p in points {
        let c = world_to_cam.transform_point(p);
        if c.z <= 1e-9 {
            continue;
        }
        let u = (intrinsics.fx * c.x / c.z + intrinsics.cx).round();
        let v = (intrinsics.fy * c.y / c.z + intrinsics.cy).round();
        if u < 0.0 || v < 0.0 || u >= intrinsics.width as f64 || v >= intrinsics.height as f64 {
            continue;
        }
        let (ui, vi) = (u as usize, v as usize);
        if !out.mask[(vi, ui)] || c.z < out.depth[(vi, ui)] {
            out.depth[(vi, ui)] = c.z;
            out.mask[(vi, ui)] = true;
        }
    }
    out
}
