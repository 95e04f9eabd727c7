//! Evaluation: pose AUC and scale-aligned depth metrics over a scene, the
//! three-variant ablation, and the attention-cost benchmark.

pub mod bench;
pub mod depth;
pub mod pose;

use std::path::Path;
use std::str::FromStr;

use nalgebra::Vector3;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{compose_pose, rig_normalization_stats, CameraRig, DepthMap, PoseSE3};
use crate::model::{decode_vector_rows, Model, ModelConfig, ModelVariant};
use crate::synthetic::LoadedFrame;
use crate::train::window_data;

pub use bench::{run_bench, BenchRow, BenchSettings};
pub use depth::{depth_metrics, least_squares_scale};
pub use pose::{pairwise_pose_errors, pose_auc};

/// How predicted depth gets its metric scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    #[default]
    LeastSquares,
    ScaleHead,
}

impl FromStr for Alignment {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "least_squares" => Ok(Alignment::LeastSquares),
            "scale_head" => Ok(Alignment::ScaleHead),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown alignment {other:?} (expected least_squares or scale_head)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatencyMs {
    pub tva: f64,
    pub mca: f64,
    pub heads: f64,
    pub total: f64,
}

/// Metrics for one (variant, scene) evaluation; serializes to metrics.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub variant: String,
    pub frames: usize,
    pub cameras: usize,
    pub auc30: f64,
    pub auc15: f64,
    pub abs_rel: f64,
    pub delta3: f64,
    pub latency_ms: LatencyMs,
}

/// A metrics report plus artifacts that need the forward pass: the aligned
/// world-space point cloud (with colors) and the applied metric scale.
pub struct EvalOutcome {
    pub report: MetricsReport,
    pub points: Vec<Vector3<f64>>,
    pub colors: Vec<[u8; 3]>,
    pub scale: f64,
}

/// Run the model over a whole scene and score it.
///
/// Pose accuracy: predicted per-frame ego motion composed with predicted
/// camera-to-rig poses gives one global pose per (frame, camera); pairwise
/// AUC is computed against the same composition of ground truth, in the
/// rig-normalized frame. Depth: predictions are scale-aligned (least-squares
/// fit or the model's scale head) and scored against the loaded maps.
pub fn evaluate(
    model: &Model,
    rig: &CameraRig,
    frames: &[LoadedFrame],
    alignment: Alignment,
) -> Result<EvalOutcome> {
    if frames.is_empty() {
        return Err(CoreError::EmptyScene);
    }
    let refs: Vec<&LoadedFrame> = frames.iter().collect();
    let data = window_data(rig, &refs)?;
    let pass = model.forward(&data.images, &data.rig_vecs)?;
    let (w, h) = (model.cfg.image_width, model.cfg.image_height);

    let decode2 = |v: crate::tape::V| -> Result<Vec<PoseSE3>> {
        let rows = pass
            .tape
            .value(v)
            .into_dimensionality::<ndarray::Ix2>()
            .expect("pose rows");
        Ok(decode_vector_rows(&rows, w, h)?
            .into_iter()
            .map(|(p, _)| p)
            .collect())
    };
    let pred_seq = decode2(pass.out.seq_vecs)?;
    let pred_rel = decode2(pass.out.rel_vecs)?;
    let gt_seq: Vec<PoseSE3> = decode_vector_rows(&data.targets.seq_vecs, w, h)?
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    let gt_rel: Vec<PoseSE3> = decode_vector_rows(&data.targets.rel_vecs, w, h)?
        .into_iter()
        .map(|(p, _)| p)
        .collect();

    let mut pred_global = Vec::new();
    let mut gt_global = Vec::new();
    for i in 0..pred_seq.len() {
        for j in 0..pred_rel.len() {
            pred_global.push(compose_pose(&pred_seq[i], &pred_rel[j]));
            gt_global.push(compose_pose(&gt_seq[i], &gt_rel[j]));
        }
    }
    let errors = pairwise_pose_errors(&pred_global, &gt_global)?;
    let (auc30, auc15) = (pose_auc(&errors, 30), pose_auc(&errors, 15));

    // Depth, scored in metric units against the loaded maps.
    let pred_maps: Vec<Vec<Array2<f64>>> = pass
        .out
        .depth
        .iter()
        .map(|per_cam| {
            per_cam
                .iter()
                .map(|dc| {
                    pass.tape
                        .value(dc.depth)
                        .into_dimensionality::<ndarray::Ix2>()
                        .expect("depth map")
                })
                .collect()
        })
        .collect();
    let mut flat_preds: Vec<&Array2<f64>> = Vec::new();
    let mut flat_gts: Vec<&DepthMap> = Vec::new();
    for (fi, frame) in frames.iter().enumerate() {
        for (ci, (_, gt)) in frame.cameras.iter().enumerate() {
            flat_preds.push(&pred_maps[fi][ci]);
            flat_gts.push(gt);
        }
    }
    let scale = match alignment {
        Alignment::LeastSquares => least_squares_scale(&flat_preds, &flat_gts)?,
        Alignment::ScaleHead => pass.tape.value(pass.out.scale)[[0, 0]],
    };
    let (abs_rel, delta3) = depth_metrics(&flat_preds, &flat_gts, scale)?;

    // World-space point cloud from predicted depth and predicted poses, both
    // mapped to metric units by the same scale.
    let mut points = Vec::new();
    let mut colors = Vec::new();
    for (fi, frame) in frames.iter().enumerate() {
        for (ci, (img, _)) in frame.cameras.iter().enumerate() {
            let global = &pred_global[fi * pred_rel.len() + ci];
            let metric_pose = global.with_translation(global.translation() * scale);
            let map = DepthMap {
                depth: pred_maps[fi][ci].clone(),
                mask: ndarray::Array2::from_elem((h, w), true),
                confidence: None,
            };
            let cloud = crate::geometry::depth_to_points(
                &map,
                &rig.cameras[ci].intrinsics,
                &metric_pose,
                scale,
            );
            points.extend_from_slice(&cloud);
            for y in 0..h {
                for x in 0..w {
                    colors.push([
                        (img[(y, x, 0)].clamp(0.0, 1.0) * 255.0) as u8,
                        (img[(y, x, 1)].clamp(0.0, 1.0) * 255.0) as u8,
                        (img[(y, x, 2)].clamp(0.0, 1.0) * 255.0) as u8,
                    ]);
                }
            }
        }
    }

    let report = MetricsReport {
        variant: model.cfg.variant.as_str().to_string(),
        frames: frames.len(),
        cameras: rig.len(),
        auc30,
        auc15,
        abs_rel,
        delta3,
        latency_ms: LatencyMs {
            tva: pass.timings.tva_ms,
            mca: pass.timings.mca_ms,
            heads: pass.timings.heads_ms,
            total: pass.timings.total_ms(),
        },
    };
    Ok(EvalOutcome {
        report,
        points,
        colors,
        scale,
    })
}

/// The metric scale a perfect scale head should report for this rig.
pub fn true_metric_scale(rig: &CameraRig) -> Result<f64> {
    Ok(rig_normalization_stats(rig)?.metric_scale())
}

/// Evaluate the three model variants from checkpoints named
/// `<variant>.ckpt` in `checkpoint_dir`, in baseline -> full order.
pub fn run_ablation(
    checkpoint_dir: &Path,
    base_cfg: &ModelConfig,
    rig: &CameraRig,
    frames: &[LoadedFrame],
    alignment: Alignment,
) -> Result<Vec<MetricsReport>> {
    let variants = [
        ModelVariant::TvaBaseline,
        ModelVariant::RelPoseEmbed,
        ModelVariant::Full,
    ];
    let mut reports = Vec::new();
    for variant in variants {
        let mut cfg = base_cfg.clone();
        cfg.variant = variant;
        let path = checkpoint_dir.join(format!("{}.ckpt", variant.as_str()));
        if !path.exists() {
            return Err(CoreError::MissingCheckpoint(path.display().to_string()));
        }
        let model = Model::load(&path, Some(&cfg))?;
        reports.push(evaluate(&model, rig, frames, alignment)?.report);
    }
    Ok(reports)
}
