//! Prediction heads: sequence poses (ego motion per frame), relative poses
//! (camera-to-rig per camera), a metric-scale scalar and per-image dense
//! depth with confidence.

use crate::error::Result;
use crate::geometry::{decode_camera_vector, CameraIntrinsics, CameraVector10, PoseSE3};
use crate::model::blocks::{gelu, mlp_head};
use crate::model::config::ModelConfig;
use crate::model::mca::McaOutput;
use crate::model::params::TapeParams;
use crate::tape::{Tape, V};
use ndarray::Array2;

/// Index of the quaternion-w slot in a 10-D camera vector.
const QW_SLOT: usize = 3;
const CONF_FLOOR: f64 = 1e-3;

/// Dense depth and confidence for one image, both (H, W).
pub struct DepthConf {
    pub depth: V,
    pub conf: V,
}

/// Everything the heads produce for one forward pass.
pub struct HeadOutputs {
    /// (N, 10) camera vectors: ego pose of each frame relative to frame 0.
    pub seq_vecs: V,
    /// (M, 10) camera vectors: each camera's pose relative to the rig
    /// reference, with normalized translation.
    pub rel_vecs: V,
    /// (1, 1) positive metric-scale prediction.
    pub scale: V,
    /// `depth[frame][camera]`.
    pub depth: Vec<Vec<DepthConf>>,
}

/// Mean over the rows of a (T, d) matrix: (1, d).
fn col_mean(t: &Tape, x: V) -> V {
    let rows = t.shape(x)[0];
    let ones = t.constant(Array2::from_elem((1, rows), 1.0 / rows as f64).into_dyn());
    t.matmul(ones, x)
}

/// Aggregate per-image tokens for the pose heads, from the last selected
/// layer: per frame a camera-mean of sequence tokens (N, d), per camera a
/// frame-mean of relative-pose tokens (M, d).
pub fn aggregate_pose_tokens(t: &Tape, mca: &McaOutput) -> (V, V) {
    let last = mca.layers.len() - 1;
    let num_frames = mca.layers[last].len();
    let num_cameras = mca.layers[last][0].len();

    let seq_rows: Vec<V> = (0..num_frames)
        .map(|i| {
            let per_cam: Vec<V> = (0..num_cameras)
                .map(|j| mca.seq_token(t, last, i, j))
                .collect();
            t.mean_of(&per_cam)
        })
        .collect();
    let rel_rows: Vec<V> = (0..num_cameras)
        .map(|j| {
            let per_frame: Vec<V> = (0..num_frames)
                .map(|i| mca.rel_token(t, last, i, j))
                .collect();
            t.mean_of(&per_frame)
        })
        .collect();
    (t.concat_ax0(&seq_rows), t.concat_ax0(&rel_rows))
}

/// MLP pose head with an identity-quaternion output bias so an untrained
/// head already decodes to a valid rotation.
fn pose_head(t: &Tape, p: &TapeParams, prefix: &str, agg: V) -> V {
    let rows = t.shape(agg)[0];
    let raw = mlp_head(t, p, prefix, agg);
    let mut bias = Array2::zeros((1, 10));
    bias[(0, QW_SLOT)] = 1.0;
    t.add(raw, t.broadcast_row(t.constant(bias.into_dyn()), rows))
}

/// Positive scalar metric-scale prediction from the frame-mean of the
/// aggregated sequence tokens.
pub fn scale_head(t: &Tape, p: &TapeParams, seq_agg: V) -> V {
    t.softplus(mlp_head(t, p, "scale_head", col_mean(t, seq_agg)))
}

/// Reshape a (P, C) projected token matrix into a (C, gh, gw) feature map.
fn tokens_to_grid(t: &Tape, tokens: V, grid: (usize, usize)) -> V {
    let c = t.shape(tokens)[1];
    t.reshape(t.transpose2(tokens), &[c, grid.0, grid.1])
}

/// Coarse-to-fine depth head over the selected layers' patch tokens for one
/// image. The deepest layer seeds the pyramid; each stage fuses the next
/// layer in (resized to the running resolution), applies a 3x3 conv mix and
/// doubles the resolution, ending with a bilinear resize to (H, W) and a
/// 1x1 conv producing depth and confidence channels.
pub fn depth_head(
    t: &Tape,
    p: &TapeParams,
    cfg: &ModelConfig,
    layer_tokens: &[V],
) -> DepthConf {
    let grid = cfg.patch_grid();
    let num_layers = layer_tokens.len();
    let projected: Vec<V> = layer_tokens
        .iter()
        .enumerate()
        .map(|(k, &tok)| {
            let proj = crate::model::blocks::linear(
                t,
                tok,
                p.get(&format!("depth.proj{k}.w")),
                p.get(&format!("depth.proj{k}.b")),
            );
            tokens_to_grid(t, proj, grid)
        })
        .collect();

    let mut x = projected[num_layers - 1];
    for k in (0..num_layers).rev() {
        if k < num_layers - 1 {
            let shape = t.shape(x);
            x = t.add(x, t.resize_bilinear(projected[k], shape[1], shape[2]));
        }
        x = gelu(
            t,
            t.conv2d(x, p.get(&format!("depth.fuse{k}.w")), p.get(&format!("depth.fuse{k}.b"))),
        );
        if k > 0 {
            x = t.upsample2(x);
        }
    }
    let x = t.resize_bilinear(x, cfg.image_height, cfg.image_width);
    let out = t.conv2d(x, p.get("depth.out.w"), p.get("depth.out.b"));
    let hw = &[cfg.image_height, cfg.image_width];
    let depth = t.softplus(t.reshape(t.slice_ax0(out, 0, 1), hw));
    let conf = t.add_scalar(t.softplus(t.reshape(t.slice_ax0(out, 1, 2), hw)), CONF_FLOOR);
    DepthConf { depth, conf }
}

/// Run every head on the cross-camera stage's outputs.
pub fn run_heads(t: &Tape, p: &TapeParams, cfg: &ModelConfig, mca: &McaOutput) -> HeadOutputs {
    let (seq_agg, rel_agg) = aggregate_pose_tokens(t, mca);
    let seq_vecs = pose_head(t, p, "seq_head", seq_agg);
    let rel_vecs = pose_head(t, p, "rel_head", rel_agg);
    let scale = scale_head(t, p, seq_agg);

    let last = mca.layers.len();
    let num_frames = mca.layers[0].len();
    let num_cameras = mca.layers[0][0].len();
    let depth = (0..num_frames)
        .map(|i| {
            (0..num_cameras)
                .map(|j| {
                    let layer_tokens: Vec<V> = (0..last)
                        .map(|k| mca.patch_tokens(t, k, i, j))
                        .collect();
                    depth_head(t, p, cfg, &layer_tokens)
                })
                .collect()
        })
        .collect();

    HeadOutputs {
        seq_vecs,
        rel_vecs,
        scale,
        depth,
    }
}

/// Decode each row of an (R, 10) camera-vector matrix into a pose and
/// intrinsics for the given image size.
pub fn decode_vector_rows(
    rows: &Array2<f64>,
    width: usize,
    height: usize,
) -> Result<Vec<(PoseSE3, CameraIntrinsics)>> {
    rows.rows()
        .into_iter()
        .map(|r| {
            let mut a = [0.0; 10];
            a.copy_from_slice(r.as_slice().expect("contiguous row"));
            decode_camera_vector(&CameraVector10::from_array(a), width, height)
        })
        .collect()
}
