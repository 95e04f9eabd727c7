use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Which parts of the cross-camera stage are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Per-camera temporal attention only; poses read straight off its tokens.
    TvaBaseline,
    /// Adds learned relative-pose tokens but no cross-camera attention.
    RelPoseEmbed,
    /// Relative-pose tokens plus windowed multi-camera attention.
    #[default]
    Full,
}

impl ModelVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelVariant::TvaBaseline => "baseline_tva",
            ModelVariant::RelPoseEmbed => "rel_pose_embed",
            ModelVariant::Full => "full",
        }
    }
}

/// Hyperparameters of the two-stage transformer. Defaults are desk-scale:
/// small enough to train on a CPU in minutes, structured like the full-size
/// design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub image_height: usize,
    pub image_width: usize,
    pub patch_size: usize,
    /// Token dimensionality d.
    pub token_dim: usize,
    /// Temporal-attention depth L.
    pub num_layers: usize,
    pub num_heads: usize,
    /// 1-indexed temporal layers whose outputs feed the cross-camera stage
    /// and the heads.
    pub selected_layers: Vec<usize>,
    pub mlp_ratio: f64,
    /// Odd temporal window width for cross-camera attention.
    pub window_size: usize,
    /// Channel width of the depth head's fusion pyramid.
    pub head_channels: usize,
    /// Capacity of the learned temporal embedding table.
    pub max_frames: usize,
    pub variant: ModelVariant,
    /// Seed for deterministic parameter initialization.
    pub init_seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            image_height: 28,
            image_width: 56,
            patch_size: 14,
            token_dim: 128,
            num_layers: 8,
            num_heads: 4,
            selected_layers: vec![2, 4, 6, 8],
            mlp_ratio: 4.0,
            window_size: 3,
            head_channels: 16,
            max_frames: 32,
            variant: ModelVariant::Full,
            init_seed: 7,
        }
    }
}

impl ModelConfig {
    /// Patch grid (rows, cols).
    pub fn patch_grid(&self) -> (usize, usize) {
        (
            self.image_height / self.patch_size,
            self.image_width / self.patch_size,
        )
    }

    /// Patch tokens per image.
    pub fn num_patches(&self) -> usize {
        let (gh, gw) = self.patch_grid();
        gh * gw
    }

    pub fn mlp_dim(&self) -> usize {
        (self.token_dim as f64 * self.mlp_ratio).round() as usize
    }

    pub fn head_dim(&self) -> usize {
        self.token_dim / self.num_heads
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CoreError::InvalidConfig(msg));
        if self.patch_size == 0
            || self.image_height % self.patch_size != 0
            || self.image_width % self.patch_size != 0
        {
            return bad(format!(
                "image {}x{} not divisible by patch size {}",
                self.image_height, self.image_width, self.patch_size
            ));
        }
        if self.token_dim == 0 || self.num_heads == 0 || self.token_dim % self.num_heads != 0 {
            return bad(format!(
                "token_dim {} must be a positive multiple of num_heads {}",
                self.token_dim, self.num_heads
            ));
        }
        if self.selected_layers.is_empty() {
            return bad("selected_layers must not be empty".into());
        }
        let mut prev = 0;
        for &l in &self.selected_layers {
            if l == 0 || l > self.num_layers {
                return bad(format!(
                    "selected layer {l} outside 1..={}",
                    self.num_layers
                ));
            }
            if l <= prev {
                return bad("selected_layers must be strictly increasing".into());
            }
            prev = l;
        }
        if self.window_size == 0 || self.window_size % 2 == 0 {
            return bad(format!("window_size {} must be odd", self.window_size));
        }
        if self.mlp_ratio <= 0.0 {
            return bad("mlp_ratio must be positive".into());
        }
        if self.head_channels == 0 || self.max_frames == 0 {
            return bad("head_channels and max_frames must be positive".into());
        }
        Ok(())
    }

    /// Stable content hash of the configuration; checkpoints store it so a
    /// mismatched architecture is rejected at load time.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        // FNV-1a, 64 bit.
        let mut h: u64 = 0xcbf29ce484222325;
        for b in json.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}
