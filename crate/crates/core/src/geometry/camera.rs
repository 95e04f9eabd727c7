use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::PoseSE3;

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(CoreError::InvalidConfig(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if !(0.0 < self.cx && self.cx < self.width as f64)
            || !(0.0 < self.cy && self.cy < self.height as f64)
        {
            return Err(CoreError::InvalidConfig(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Intrinsics with the principal point at the image center.
    pub fn centered(fx: f64, fy: f64, width: usize, height: usize) -> Self {
        Self {
            fx,
            fy,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
        }
    }
}

/// One camera of a rig: identifier, fixed extrinsic (camera -> ego) and intrinsics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RigCamera {
    pub camera_id: String,
    pub extrinsic: PoseSE3,
    pub intrinsics: CameraIntrinsics,
}

/// Fixed multi-camera vehicle rig. Extrinsics are time-invariant within a scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraRig {
    pub cameras: Vec<RigCamera>,
}

impl CameraRig {
    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cameras.is_empty() {
            return Err(CoreError::InvalidConfig("rig must have M >= 1 cameras".into()));
        }
        let mut ids: Vec<&str> = self.cameras.iter().map(|c| c.camera_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.cameras.len() {
            return Err(CoreError::InvalidConfig("duplicate camera_id in rig".into()));
        }
        for cam in &self.cameras {
            cam.intrinsics.validate()?;
        }
        Ok(())
    }

    pub fn translations(&self) -> Vec<Vector3<f64>> {
        self.cameras.iter().map(|c| *c.extrinsic.translation()).collect()
    }
}

/// Normalize rig translations to pooled mean 0 and pooled std 0.1.
///
/// The per-axis mean is removed and the std is pooled over all 3M centered
/// components, so the output is the input under one global similarity
/// (shift + uniform scale) and is invariant to rigid offsets of the rig.
pub fn normalize_rig_translations(rig: &CameraRig) -> Result<Vec<Vector3<f64>>> {
    let stats = rig_normalization_stats(rig)?;
    Ok(rig
        .translations()
        .iter()
        .map(|t| (t - stats.mean) * (0.1 / stats.std))
        .collect())
}

/// Centering vector and pooled std of the rig translations.
#[derive(Debug, Clone, Copy)]
pub struct RigStats {
    pub mean: Vector3<f64>,
    pub std: f64,
}

impl RigStats {
    /// Factor taking raw translations (after mean removal) to normalized ones.
    pub fn norm_factor(&self) -> f64 {
        0.1 / self.std
    }

    /// Metric scale recovered by a perfect scale head: std / 0.1.
    pub fn metric_scale(&self) -> f64 {
        self.std / 0.1
    }
}

pub fn rig_normalization_stats(rig: &CameraRig) -> Result<RigStats> {
    let translations = rig.translations();
    let n = translations.len() as f64;
    let mean = translations.iter().sum::<Vector3<f64>>() / n;
    let var = translations
        .iter()
        .map(|t| (t - mean).norm_squared())
        .sum::<f64>()
        / (3.0 * n);
    let std = var.sqrt();
    if std < 1e-12 {
        return Err(CoreError::DegenerateRig { std });
    }
    Ok(RigStats { mean, std })
}
