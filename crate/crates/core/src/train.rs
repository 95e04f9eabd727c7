//! Training loop: sample a contiguous frame window, run the model, apply the
//! weighted loss and take an Adam step. Emits one JSON log line per step and
//! can periodically checkpoint.
//!
//! All supervision lives in rig-normalized units: translations (ego motion
//! and camera-to-rig) and depth are multiplied by the rig normalization
//! factor, so a single metric scale maps predictions back to world units.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{
    compose_pose, encode_camera_vector, rig_normalization_stats, CameraRig, CameraVector10,
    DepthMap,
};
use crate::losses::{total_loss, LossTargets};
use crate::model::{Adam, Model};
use crate::synthetic::LoadedFrame;

fn default_steps() -> usize {
    500
}
fn default_lr() -> f64 {
    2e-4
}
fn default_batch_min() -> usize {
    3
}
fn default_batch_max() -> usize {
    10
}
fn default_seed() -> u64 {
    0
}
fn default_checkpoint_every() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    /// Sampled window length bounds (inclusive); must stay within [3, 10].
    #[serde(default = "default_batch_min")]
    pub batch_frames_min: usize,
    #[serde(default = "default_batch_max")]
    pub batch_frames_max: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Save a checkpoint every this many steps (0 = only at the end).
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_frames_min < 3
            || self.batch_frames_max > 10
            || self.batch_frames_min > self.batch_frames_max
        {
            return Err(CoreError::InvalidConfig(format!(
                "batch frame bounds [{}, {}] must sit within [3, 10]",
                self.batch_frames_min, self.batch_frames_max
            )));
        }
        if self.steps == 0 {
            return Err(CoreError::InvalidConfig("steps must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(CoreError::InvalidConfig(format!("bad lr {}", self.lr)));
        }
        Ok(())
    }
}

/// One JSON-lines training log record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: usize,
    pub total: f64,
    pub depth: f64,
    pub rel: f64,
    pub seq: f64,
    pub scale_pred: f64,
    pub lr: f64,
    pub wall_ms: f64,
}

/// Model inputs and supervision for one contiguous frame window.
pub struct WindowData {
    /// `images[camera][frame]`.
    pub images: Vec<Vec<Array3<f64>>>,
    pub rig_vecs: Vec<CameraVector10>,
    pub targets: LossTargets,
}

/// Encoded camera-to-rig vectors with normalized translations, rig order.
pub fn rig_camera_vectors(rig: &CameraRig) -> Result<Vec<CameraVector10>> {
    let stats = rig_normalization_stats(rig)?;
    Ok(rig
        .cameras
        .iter()
        .map(|cam| {
            let t = (cam.extrinsic.translation() - stats.mean) * stats.norm_factor();
            encode_camera_vector(&cam.extrinsic.with_translation(t), &cam.intrinsics)
        })
        .collect())
}

/// Build inputs and targets for a window of frames. Sequence-pose targets are
/// ego motion relative to the window's first frame; depth targets come from
/// the loaded maps. Everything is expressed in rig-normalized units.
pub fn window_data(rig: &CameraRig, frames: &[&LoadedFrame]) -> Result<WindowData> {
    if frames.is_empty() {
        return Err(CoreError::Shape("empty frame window".into()));
    }
    let stats = rig_normalization_stats(rig)?;
    let nf = stats.norm_factor();
    let rig_vecs = rig_camera_vectors(rig)?;
    let first_intr = &rig.cameras[0].intrinsics;

    let base_inv = frames[0].poses.ego.inverse();
    let seq_rows: Vec<[f64; 10]> = frames
        .iter()
        .map(|f| {
            let rel = compose_pose(&base_inv, &f.poses.ego);
            let scaled = rel.with_translation(rel.translation() * nf);
            encode_camera_vector(&scaled, first_intr).as_array()
        })
        .collect();
    let seq_vecs = ndarray::Array2::from_shape_fn((frames.len(), 10), |(i, j)| seq_rows[i][j]);
    let rel_vecs = ndarray::Array2::from_shape_fn((rig.len(), 10), |(i, j)| {
        rig_vecs[i].as_array()[j]
    });

    let mut images = vec![Vec::with_capacity(frames.len()); rig.len()];
    let mut depth = Vec::with_capacity(frames.len());
    for f in frames {
        if f.cameras.len() != rig.len() {
            return Err(CoreError::LengthMismatch {
                expected: rig.len(),
                got: f.cameras.len(),
            });
        }
        let mut per_cam = Vec::with_capacity(rig.len());
        for (j, (img, d)) in f.cameras.iter().enumerate() {
            images[j].push(img.clone());
            per_cam.push(DepthMap {
                depth: &d.depth * nf,
                mask: d.mask.clone(),
                confidence: None,
            });
        }
        depth.push(per_cam);
    }

    Ok(WindowData {
        images,
        rig_vecs: rig_vecs.clone(),
        targets: LossTargets {
            seq_vecs,
            rel_vecs,
            depth,
        },
    })
}

/// Run the training loop. Writes one JSON line per step to `log_sink` when
/// given; checkpoints go to `checkpoint_path` (periodically and at the end).
pub fn train(
    model: &mut Model,
    rig: &CameraRig,
    frames: &[LoadedFrame],
    tcfg: &TrainConfig,
    mut log_sink: Option<&mut dyn Write>,
    checkpoint_path: Option<&Path>,
) -> Result<Vec<LogRecord>> {
    tcfg.validate()?;
    if frames.is_empty() {
        return Err(CoreError::EmptyScene);
    }
    let n = frames.len();
    let k_min = tcfg.batch_frames_min.min(n);
    let k_max = tcfg.batch_frames_max.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let mut opt = Adam::new(tcfg.lr);
    let mut records = Vec::with_capacity(tcfg.steps);

    for step in 0..tcfg.steps {
        let t0 = Instant::now();
        let k = rng.gen_range(k_min..=k_max);
        let start = rng.gen_range(0..=n - k);
        let window: Vec<&LoadedFrame> = frames[start..start + k].iter().collect();
        let data = window_data(rig, &window)?;

        let pass = model.forward(&data.images, &data.rig_vecs)?;
        let loss = total_loss(&pass.tape, &pass.out, &data.targets)?;
        let grads = pass.tape.backward(loss.total);
        let param_grads = pass.params.gradients(&pass.tape, &grads);
        for (name, g) in &param_grads {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::NonFinite(format!("gradient of {name}")));
            }
        }
        opt.step(&mut model.store, &param_grads);

        let record = LogRecord {
            step,
            total: pass.tape.scalar(loss.total),
            depth: pass.tape.scalar(loss.depth),
            rel: pass.tape.scalar(loss.rel),
            seq: pass.tape.scalar(loss.seq),
            scale_pred: pass.tape.value(pass.out.scale)[[0, 0]],
            lr: tcfg.lr,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        };
        if let Some(sink) = log_sink.as_deref_mut() {
            writeln!(sink, "{}", serde_json::to_string(&record)?)?;
        }
        records.push(record);

        if let Some(path) = checkpoint_path {
            let at_interval = tcfg.checkpoint_every > 0 && (step + 1) % tcfg.checkpoint_every == 0;
            if at_interval || step + 1 == tcfg.steps {
                model.save(path)?;
            }
        }
    }
    Ok(records)
}
