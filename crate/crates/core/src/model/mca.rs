//! Windowed multi-camera attention. Each selected temporal layer's tokens
//! are re-grouped per (frame, camera) image, a learned relative-pose token is
//! prepended, and attention runs over a short temporal window of all cameras
//! at once. Only the window's center frame is updated per step, and every
//! window reads from a snapshot of the pre-pass tokens, so update order does
//! not matter.

use ndarray::Array2;

use crate::geometry::CameraVector10;
use crate::model::blocks::{mlp_head, transformer_block};
use crate::model::config::{ModelConfig, ModelVariant};
use crate::model::params::TapeParams;
use crate::model::tva::TvaOutput;
use crate::tape::{Tape, V};

/// Inclusive frame bounds of the window centered at `i`, clamped to the clip.
pub fn window_bounds(i: usize, num_frames: usize, window: usize) -> (usize, usize) {
    let half = window / 2;
    let lo = i.saturating_sub(half);
    let hi = (i + half).min(num_frames - 1);
    (lo, hi)
}

/// Per-image token matrices after the cross-camera stage.
pub struct McaOutput {
    /// `layers[k][frame][camera]` is a (tokens_per_image, d) matrix.
    pub layers: Vec<Vec<Vec<V>>>,
    pub num_patches: usize,
    /// Whether row 0 is a relative-pose token (row layout: [rel,] seq, patches).
    pub has_rel: bool,
}

impl McaOutput {
    /// Token row read by the cross-camera pose head: the relative-pose token
    /// when present, otherwise the image's sequence-pose token.
    pub fn rel_token(&self, t: &Tape, layer: usize, frame: usize, camera: usize) -> V {
        t.slice_ax0(self.layers[layer][frame][camera], 0, 1)
    }

    pub fn seq_token(&self, t: &Tape, layer: usize, frame: usize, camera: usize) -> V {
        let r = usize::from(self.has_rel);
        t.slice_ax0(self.layers[layer][frame][camera], r, r + 1)
    }

    pub fn patch_tokens(&self, t: &Tape, layer: usize, frame: usize, camera: usize) -> V {
        let r0 = 1 + usize::from(self.has_rel);
        t.slice_ax0(self.layers[layer][frame][camera], r0, r0 + self.num_patches)
    }
}

/// Embed a 10-D camera vector (the camera's pose relative to the rig
/// reference) into a token.
pub fn embed_relative_pose(t: &Tape, p: &TapeParams, v: &CameraVector10) -> V {
    let row = t.constant(
        Array2::from_shape_vec((1, 10), v.as_array().to_vec())
            .expect("camera vector row")
            .into_dyn(),
    );
    mlp_head(t, p, "rel_embed", row)
}

/// Re-group one selected layer's temporal tokens into per-image matrices,
/// optionally prepending each camera's relative-pose token.
pub fn init_tokens(
    t: &Tape,
    tva: &TvaOutput,
    layer: usize,
    rel_tokens: Option<&[V]>,
) -> Vec<Vec<V>> {
    let num_cameras = tva.layers[layer].len();
    (0..tva.num_frames)
        .map(|i| {
            (0..num_cameras)
                .map(|j| {
                    let seq = tva.seq_token(t, layer, j, i);
                    let patches = tva.patch_tokens(t, layer, j, i);
                    match rel_tokens {
                        Some(rel) => t.concat_ax0(&[rel[j], seq, patches]),
                        None => t.concat_ax0(&[seq, patches]),
                    }
                })
                .collect()
        })
        .collect()
}

fn concat_images(t: &Tape, tokens: &[Vec<V>], frames: std::ops::RangeInclusive<usize>) -> V {
    let mut parts = Vec::new();
    for i in frames {
        parts.extend(tokens[i].iter().copied());
    }
    t.concat_ax0(&parts)
}

/// One windowed cross-camera attention pass: for every frame `i`, run a
/// transformer block over the tokens of all cameras in `i`'s temporal window
/// (read from the pre-pass snapshot) and keep the rows belonging to frame `i`.
pub fn window_attention(
    t: &Tape,
    p: &TapeParams,
    prefix: &str,
    tokens: &[Vec<V>],
    num_heads: usize,
    window: usize,
) -> Vec<Vec<V>> {
    let num_frames = tokens.len();
    let num_cameras = tokens[0].len();
    let per_image = t.shape(tokens[0][0])[0];
    (0..num_frames)
        .map(|i| {
            let (lo, hi) = window_bounds(i, num_frames, window);
            let x = concat_images(t, tokens, lo..=hi);
            let y = transformer_block(t, p, prefix, x, num_heads, None);
            let center = (i - lo) * num_cameras * per_image;
            (0..num_cameras)
                .map(|j| {
                    let r0 = center + j * per_image;
                    t.slice_ax0(y, r0, r0 + per_image)
                })
                .collect()
        })
        .collect()
}

/// Reference implementation of the same computation as one attention pass
/// over all frames at once, with an additive mask restricting each query
/// image's keys to its own temporal window. `window = None` disables the
/// mask entirely (full global attention), which is the quadratic-cost
/// baseline used for complexity measurements.
pub fn global_attention(
    t: &Tape,
    p: &TapeParams,
    prefix: &str,
    tokens: &[Vec<V>],
    num_heads: usize,
    window: Option<usize>,
) -> Vec<Vec<V>> {
    let num_frames = tokens.len();
    let num_cameras = tokens[0].len();
    let per_image = t.shape(tokens[0][0])[0];
    let x = concat_images(t, tokens, 0..=num_frames - 1);
    let total = num_frames * num_cameras * per_image;

    let mask = window.map(|w| {
        let mut m = Array2::zeros((total, total));
        for qi in 0..num_frames {
            let (lo, hi) = window_bounds(qi, num_frames, w);
            for ki in 0..num_frames {
                if ki >= lo && ki <= hi {
                    continue;
                }
                let stride = num_cameras * per_image;
                for qr in qi * stride..(qi + 1) * stride {
                    for kr in ki * stride..(ki + 1) * stride {
                        m[(qr, kr)] = -1e30;
                    }
                }
            }
        }
        m
    });
    let y = transformer_block(t, p, prefix, x, num_heads, mask.as_ref());
    (0..num_frames)
        .map(|i| {
            (0..num_cameras)
                .map(|j| {
                    let r0 = (i * num_cameras + j) * per_image;
                    t.slice_ax0(y, r0, r0 + per_image)
                })
                .collect()
        })
        .collect()
}

/// Run the cross-camera stage for every selected layer. `rig_vecs` holds one
/// encoded camera vector per camera (pose relative to the rig reference).
/// The model variant controls how much of the stage is active.
pub fn run_mca(
    t: &Tape,
    p: &TapeParams,
    cfg: &ModelConfig,
    tva: &TvaOutput,
    rig_vecs: &[CameraVector10],
) -> McaOutput {
    let has_rel = cfg.variant != ModelVariant::TvaBaseline;
    let rel_tokens: Option<Vec<V>> = has_rel.then(|| {
        rig_vecs
            .iter()
            .map(|v| embed_relative_pose(t, p, v))
            .collect()
    });

    let layers = (0..cfg.selected_layers.len())
        .map(|k| {
            let tokens = init_tokens(t, tva, k, rel_tokens.as_deref());
            match cfg.variant {
                ModelVariant::Full => {
                    window_attention(t, p, &format!("mca.{k}"), &tokens, cfg.num_heads, cfg.window_size)
                }
                _ => tokens,
            }
        })
        .collect();

    McaOutput {
        layers,
        num_patches: tva.num_patches,
        has_rel,
    }
}
