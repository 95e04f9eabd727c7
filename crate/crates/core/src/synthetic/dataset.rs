//! Dataset directory layout:
//!
//! ```text
//! <root>/scene/<name>/spec.json
//! <root>/scene/<name>/rig.json
//! <root>/scene/<name>/frames/<i>/poses.json
//! <root>/scene/<name>/frames/<i>/<camera_id>/{image.raw, depth.raw, mask.raw}
//! ```
//!
//! Raw arrays use the 16-byte-header little-endian float32 format from
//! [`crate::io`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{DepthMap, PoseSE3};
use crate::io::{read_raw, write_raw, RawArray};
use crate::synthetic::lidar::enhanced_depth_maps;
use crate::synthetic::render::FrameBundle;
use crate::synthetic::scene::SceneSpec;

/// Which depth goes into `depth.raw`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DepthSource {
    /// Exact ray-cast depth from the renderer.
    Exact,
    /// Two-step enhancement: aggregated sparse points, projected, densified.
    #[default]
    Enhanced,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FramePoses {
    pub ego: PoseSE3,
    pub cameras: BTreeMap<String, PoseSE3>,
}

/// One frame as loaded back from disk.
#[derive(Debug, Clone)]
pub struct LoadedFrame {
    pub frame_index: usize,
    pub poses: FramePoses,
    /// Per camera, rig order: (image (H, W, 3), depth).
    pub cameras: Vec<(Array3<f64>, DepthMap)>,
}

pub fn scene_dir(root: &Path, name: &str) -> PathBuf {
    root.join("scene").join(name)
}

/// Write a generated scene to the dataset layout. Returns the scene directory.
pub fn write_dataset(
    root: &Path,
    spec: &SceneSpec,
    frames: &[FrameBundle],
    depth_source: DepthSource,
) -> Result<PathBuf> {
    let dir = scene_dir(root, &spec.name);
    fs::create_dir_all(&dir)?;
    fs::write(&dir.join("spec.json"), serde_json::to_string_pretty(spec)?)?;
    fs::write(&dir.join("rig.json"), serde_json::to_string_pretty(&spec.rig)?)?;

    let enhanced = match depth_source {
        DepthSource::Enhanced => Some(enhanced_depth_maps(spec, frames, 3)),
        DepthSource::Exact => None,
    };

    for frame in frames {
        let frame_dir = dir.join("frames").join(frame.frame_index.to_string());
        fs::create_dir_all(&frame_dir)?;
        let poses = FramePoses {
            ego: frame.ego_pose.clone(),
            cameras: frame
                .cameras
                .iter()
                .map(|c| (c.camera_id.clone(), c.cam_to_world.clone()))
                .collect(),
        };
        fs::write(
            frame_dir.join("poses.json"),
            serde_json::to_string_pretty(&poses)?,
        )?;
        for (j, cam) in frame.cameras.iter().enumerate() {
            let cam_dir = frame_dir.join(&cam.camera_id);
            fs::create_dir_all(&cam_dir)?;
            write_raw(&cam_dir.join("image.raw"), &RawArray::new(cam.image.clone()))?;
            let depth = match &enhanced {
                Some(maps) => &maps[frame.frame_index][j],
                None => &cam.depth,
            };
            let (h, w) = (depth.height(), depth.width());
            let depth_arr = Array3::from_shape_fn((h, w, 1), |(y, x, _)| depth.depth[(y, x)]);
            let mask_arr = Array3::from_shape_fn((h, w, 1), |(y, x, _)| {
                if depth.mask[(y, x)] {
                    1.0
                } else {
                    0.0
                }
            });
            write_raw(&cam_dir.join("depth.raw"), &RawArray::new(depth_arr))?;
            write_raw(&cam_dir.join("mask.raw"), &RawArray::new(mask_arr))?;
        }
    }
    Ok(dir)
}

pub fn read_spec(scene_dir: &Path) -> Result<SceneSpec> {
    let text = fs::read_to_string(scene_dir.join("spec.json"))?;
    Ok(serde_json::from_str(&text)?)
}

/// Load a scene directory back into memory. Cameras come back in rig order.
pub fn load_dataset(scene_dir: &Path) -> Result<(SceneSpec, Vec<LoadedFrame>)> {
    let spec = read_spec(scene_dir)?;
    let mut frames = Vec::with_capacity(spec.num_frames());
    for i in 0..spec.num_frames() {
        let frame_dir = scene_dir.join("frames").join(i.to_string());
        let poses: FramePoses =
            serde_json::from_str(&fs::read_to_string(frame_dir.join("poses.json"))?)?;
        let mut cameras = Vec::with_capacity(spec.rig.len());
        for cam in &spec.rig.cameras {
            let cam_dir = frame_dir.join(&cam.camera_id);
            let image = read_raw(&cam_dir.join("image.raw"))?.data;
            let depth_arr = read_raw(&cam_dir.join("depth.raw"))?.data;
            let mask_arr = read_raw(&cam_dir.join("mask.raw"))?.data;
            let (h, w, _) = depth_arr.dim();
            if image.dim().2 != 3 {
                return Err(CoreError::Shape(format!(
                    "image.raw for {} has {} channels",
                    cam.camera_id,
                    image.dim().2
                )));
            }
            let depth = DepthMap {
                depth: ndarray::Array2::from_shape_fn((h, w), |(y, x)| depth_arr[(y, x, 0)]),
                mask: ndarray::Array2::from_shape_fn((h, w), |(y, x)| mask_arr[(y, x, 0)] > 0.5),
                confidence: None,
            };
            cameras.push((image, depth));
        }
        frames.push(LoadedFrame {
            frame_index: i,
            poses,
            cameras,
        });
    }
    Ok((spec, frames))
}
