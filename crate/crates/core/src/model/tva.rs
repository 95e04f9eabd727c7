//! Per-camera temporal attention. Each camera's frame sequence is patchified
//! and run through a shared-weight transformer entirely on its own; no
//! operation ever mixes tokens from two cameras, so cross-camera isolation
//! holds by construction (exactly, not just numerically).

use crate::model::blocks::{linear, transformer_block};
use crate::model::config::ModelConfig;
use crate::model::params::TapeParams;
use crate::tape::{Tape, V};

/// Token matrices captured after each selected temporal layer.
pub struct TvaOutput {
    /// `layers[k][camera]` is the (N * (1 + P), d) token matrix after the
    /// k-th selected layer. Row layout per frame: sequence-pose token, then
    /// P patch tokens.
    pub layers: Vec<Vec<V>>,
    pub num_frames: usize,
    pub num_patches: usize,
}

impl TvaOutput {
    fn stride(&self) -> usize {
        1 + self.num_patches
    }

    /// Sequence-pose token of (frame, camera) at a selected layer: (1, d).
    pub fn seq_token(&self, t: &Tape, layer: usize, camera: usize, frame: usize) -> V {
        let r0 = frame * self.stride();
        t.slice_ax0(self.layers[layer][camera], r0, r0 + 1)
    }

    /// Patch tokens of (frame, camera) at a selected layer: (P, d).
    pub fn patch_tokens(&self, t: &Tape, layer: usize, camera: usize, frame: usize) -> V {
        let r0 = frame * self.stride() + 1;
        t.slice_ax0(self.layers[layer][camera], r0, r0 + self.num_patches)
    }
}

/// Run temporal attention. `images[camera][frame]` must be (H, W, 3) leaves
/// already on the tape.
pub fn run_tva(t: &Tape, p: &TapeParams, cfg: &ModelConfig, images: &[Vec<V>]) -> TvaOutput {
    let num_frames = images.first().map_or(0, Vec::len);
    assert!(num_frames > 0, "need at least one frame");
    assert!(
        num_frames <= cfg.max_frames,
        "{num_frames} frames exceed temporal embedding capacity {}",
        cfg.max_frames
    );
    let pp = cfg.num_patches();
    let mut layers: Vec<Vec<V>> = vec![Vec::new(); cfg.selected_layers.len()];

    for frames in images {
        assert_eq!(frames.len(), num_frames, "ragged frame counts");
        let mut per_frame = Vec::with_capacity(num_frames);
        for (i, &img) in frames.iter().enumerate() {
            let patches = t.extract_patches(img, cfg.patch_size);
            let tok = linear(t, patches, p.get("patch_embed.w"), p.get("patch_embed.b"));
            let tok = t.add(tok, p.get("pos_embed"));
            let frame_tokens = t.concat_ax0(&[p.get("seq_token"), tok]);
            let temporal = t.slice_ax0(p.get("temporal_embed"), i, i + 1);
            per_frame.push(t.add(frame_tokens, t.broadcast_row(temporal, 1 + pp)));
        }
        let mut x = t.concat_ax0(&per_frame);
        let mut next_capture = 0;
        for l in 0..cfg.num_layers {
            x = transformer_block(t, p, &format!("tva.{l}"), x, cfg.num_heads, None);
            if next_capture < cfg.selected_layers.len() && cfg.selected_layers[next_capture] == l + 1
            {
                layers[next_capture].push(x);
                next_capture += 1;
            }
        }
    }

    TvaOutput {
        layers,
        num_frames,
        num_patches: pp,
    }
}
