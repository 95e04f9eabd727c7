use nalgebra::Vector3;
use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{compose_pose, CameraIntrinsics, DepthMap, PoseSE3};
use crate::synthetic::scene::{Primitive, SceneSpec};

/// One camera's rendered view of one frame.
#[derive(Debug, Clone)]
pub struct CameraFrame {
    pub camera_id: String,
    /// (H, W, 3) float image in [0, 1].
    pub image: Array3<f64>,
    /// Exact depth along the optical axis; mask false on sky pixels.
    pub depth: DepthMap,
    pub cam_to_world: PoseSE3,
}

/// Everything the pipeline needs about one time step.
#[derive(Debug, Clone)]
pub struct FrameBundle {
    pub frame_index: usize,
    pub ego_pose: PoseSE3,
    pub cameras: Vec<CameraFrame>,
    /// Lidar-analogue world points sampled from the ego position.
    pub sparse_points: Vec<Vector3<f64>>,
}

/// A primitive resolved to its world pose for one frame.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedPrim {
    pub prim: Primitive,
    /// Index into `SceneSpec::dynamic_objects`, if this is a dynamic box.
    pub dynamic_index: Option<usize>,
}

pub(crate) fn resolve_frame(spec: &SceneSpec, frame: usize) -> Vec<ResolvedPrim> {
    let mut prims: Vec<ResolvedPrim> = spec
        .static_geometry
        .iter()
        .cloned()
        .map(|prim| ResolvedPrim {
            prim,
            dynamic_index: None,
        })
        .collect();
    for (idx, obj) in spec.dynamic_objects.iter().enumerate() {
        prims.push(ResolvedPrim {
            prim: Primitive::Box {
                pose: obj.poses[frame].clone(),
                half_extents: obj.half_extents,
                cell: obj.cell,
                color_a: obj.color_a,
                color_b: obj.color_b,
            },
            dynamic_index: Some(idx),
        });
    }
    prims
}

#[derive(Debug, Clone)]
pub(crate) struct Hit {
    /// Ray parameter: equals optical-axis depth when the direction has unit z
    /// in the camera frame, or metric range for unit directions.
    pub s: f64,
    pub color: [f64; 3],
    #[allow(dead_code)]
    pub dynamic_index: Option<usize>,
}

const RAY_EPS: f64 = 1e-9;

fn checker(u: f64, v: f64, cell: f64, a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let parity = ((u / cell).floor() + (v / cell).floor()).rem_euclid(2.0);
    if parity < 0.5 {
        a
    } else {
        b
    }
}

fn intersect(prim: &ResolvedPrim, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<Hit> {
    match &prim.prim {
        Primitive::Rect {
            pose,
            half_w,
            half_h,
            cell,
            color_a,
            color_b,
        } => {
            let inv = pose.inverse();
            let o = inv.transform_point(origin);
            let d = inv.rotation() * dir;
            if d.z.abs() < RAY_EPS {
                return None;
            }
            let s = -o.z / d.z;
            if s <= RAY_EPS {
                return None;
            }
            let hit = o + d * s;
            if hit.x.abs() > *half_w || hit.y.abs() > *half_h {
                return None;
            }
            Some(Hit {
                s,
                color: checker(hit.x, hit.y, *cell, *color_a, *color_b),
                dynamic_index: prim.dynamic_index,
            })
        }
        Primitive::Box {
            pose,
            half_extents,
            cell,
            color_a,
            color_b,
        } => {
            let inv = pose.inverse();
            let o = inv.transform_point(origin);
            let d = inv.rotation() * dir;
            let e = half_extents;
            let mut t_near = f64::NEG_INFINITY;
            let mut t_far = f64::INFINITY;
            let mut near_axis = 0usize;
            for axis in 0..3 {
                let (oa, da, ea) = (o[axis], d[axis], e[axis]);
                if da.abs() < RAY_EPS {
                    if oa.abs() > ea {
                        return None;
                    }
                    continue;
                }
                let mut t0 = (-ea - oa) / da;
                let mut t1 = (ea - oa) / da;
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                if t0 > t_near {
                    t_near = t0;
                    near_axis = axis;
                }
                t_far = t_far.min(t1);
            }
            if t_near > t_far || t_near <= RAY_EPS {
                return None;
            }
            let hit = o + d * t_near;
            // Checker over the two in-face coordinates.
            let (u, v) = match near_axis {
                0 => (hit.y, hit.z),
                1 => (hit.x, hit.z),
                _ => (hit.x, hit.y),
            };
            Some(Hit {
                s: t_near,
                color: checker(u, v, *cell, *color_a, *color_b),
                dynamic_index: prim.dynamic_index,
            })
        }
    }
}

/// Nearest hit over all primitives (smallest positive ray parameter).
pub(crate) fn cast_ray(
    prims: &[ResolvedPrim],
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
) -> Option<Hit> {
    prims
        .iter()
        .filter_map(|p| intersect(p, origin, dir))
        .min_by(|a, b| a.s.partial_cmp(&b.s).expect("finite ray parameters"))
}

const SKY: [f64; 3] = [0.05, 0.08, 0.15];

fn render_camera(
    prims: &[ResolvedPrim],
    cam_to_world: &PoseSE3,
    intr: &CameraIntrinsics,
) -> (Array3<f64>, DepthMap) {
    let (h, w) = (intr.height, intr.width);
    let mut image = Array3::zeros((h, w, 3));
    let mut depth = DepthMap::invalid(h, w);
    let origin = *cam_to_world.translation();
    for v in 0..h {
        for u in 0..w {
            // Unit-z camera direction so the ray parameter is optical-axis depth.
            let d_cam = Vector3::new(
                (u as f64 - intr.cx) / intr.fx,
                (v as f64 - intr.cy) / intr.fy,
                1.0,
            );
            let d_world = cam_to_world.rotation() * d_cam;
            match cast_ray(prims, &origin, &d_world) {
                Some(hit) => {
                    depth.depth[(v, u)] = hit.s;
                    depth.mask[(v, u)] = true;
                    for c in 0..3 {
                        image[(v, u, c)] = hit.color[c];
                    }
                }
                None => {
                    for c in 0..3 {
                        image[(v, u, c)] = SKY[c];
                    }
                }
            }
        }
    }
    (image, depth)
}

fn sample_sparse_points(
    prims: &[ResolvedPrim],
    ego_pose: &PoseSE3,
    rays: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vector3<f64>> {
    let origin = *ego_pose.translation();
    let mut points = Vec::new();
    for _ in 0..rays {
        // Uniform direction on the sphere.
        let z: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        let phi = rng.gen::<f64>() * std::f64::consts::TAU;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let dir = Vector3::new(r * phi.cos(), z, r * phi.sin());
        if let Some(hit) = cast_ray(prims, &origin, &dir) {
            points.push(origin + dir * hit.s);
        }
    }
    points
}

/// Per-frame rng stream derived from (seed, frame_index) so frames are
/// independent and the whole scene is reproducible.
pub(crate) fn frame_rng(seed: u64, frame: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (frame as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Render every camera of every frame and sample the sparse lidar analogue.
fn render_frame(spec: &SceneSpec, i: usize) -> FrameBundle {
    let ego_pose = &spec.ego_trajectory[i];
    let prims = resolve_frame(spec, i);
    let cameras = spec
        .rig
        .cameras
        .iter()
        .map(|cam| {
            let cam_to_world = compose_pose(ego_pose, &cam.extrinsic);
            let (image, depth) = render_camera(&prims, &cam_to_world, &cam.intrinsics);
            CameraFrame {
                camera_id: cam.camera_id.clone(),
                image,
                depth,
                cam_to_world,
            }
        })
        .collect();
    let mut rng = frame_rng(spec.rng_seed, i);
    let sparse_points = sample_sparse_points(&prims, ego_pose, spec.lidar_rays_per_frame, &mut rng);
    FrameBundle {
        frame_index: i,
        ego_pose: ego_pose.clone(),
        cameras,
        sparse_points,
    }
}

pub fn generate_scene(spec: &SceneSpec) -> Result<Vec<FrameBundle>> {
    generate_scene_threaded(spec, 1)
}

/// Like [`generate_scene`] but renders frames on up to `threads` worker
/// threads. Each frame's RNG is seeded independently, so the result is
/// bit-identical regardless of thread count.
pub fn generate_scene_threaded(spec: &SceneSpec, threads: usize) -> Result<Vec<FrameBundle>> {
    spec.validate()?;
    let n = spec.num_frames();
    let threads = threads.max(1).min(n);
    if threads == 1 {
        return Ok((0..n).map(|i| render_frame(spec, i)).collect());
    }
    let mut slots: Vec<Option<FrameBundle>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut rest: &mut [Option<FrameBundle>] = &mut slots;
        let chunk = n.div_ceil(threads);
        let mut start = 0;
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            let base = start;
            scope.spawn(move || {
                for (off, slot) in head.iter_mut().enumerate() {
                    *slot = Some(render_frame(spec, base + off));
                }
            });
            rest = tail;
            start += take;
        }
    });
    Ok(slots.into_iter().map(|s| s.expect("rendered frame")).collect())
}
