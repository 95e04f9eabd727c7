//! Two-stage feed-forward reconstruction model.
//!
//! Stage one runs temporal attention independently per camera; stage two
//! injects per-camera relative-pose tokens and runs windowed attention
//! across all cameras of a short temporal window. Heads decode ego poses,
//! camera-to-rig poses, a metric scale and dense depth with confidence.

pub mod blocks;
pub mod config;
pub mod heads;
pub mod mca;
pub mod params;
pub mod tva;

use std::time::Instant;

use ndarray::Array3;

use crate::error::{CoreError, Result};
use crate::geometry::CameraVector10;
use crate::tape::{Tape, V};

pub use config::{ModelConfig, ModelVariant};
pub use heads::{decode_vector_rows, DepthConf, HeadOutputs};
pub use params::{Adam, ParamStore, TapeParams};

/// Config plus parameters: everything needed to run or resume the model.
pub struct Model {
    pub cfg: ModelConfig,
    pub store: ParamStore,
}

/// Wall-clock stage timings for one forward pass, in milliseconds.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub tva_ms: f64,
    pub mca_ms: f64,
    pub heads_ms: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.tva_ms + self.mca_ms + self.heads_ms
    }
}

/// One recorded forward pass: the tape (for a later backward call), the
/// bound parameters, the image leaves and the head outputs.
pub struct ForwardPass {
    pub tape: Tape,
    pub params: TapeParams,
    /// `images[camera][frame]` leaves, for input-gradient queries.
    pub image_leaves: Vec<Vec<V>>,
    pub out: HeadOutputs,
    pub timings: StageTimings,
}

impl Model {
    /// Persist config and parameters to a checkpoint file.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        crate::io::write_checkpoint(
            path,
            &crate::io::Checkpoint {
                config_json: serde_json::to_string(&self.cfg)?,
                params: self.store.map.clone(),
            },
        )
    }

    /// Load a checkpoint. With `expected`, the stored config's fingerprint
    /// must match or the load is rejected.
    pub fn load(path: &std::path::Path, expected: Option<&ModelConfig>) -> Result<Self> {
        let ckpt = crate::io::read_checkpoint(path)?;
        let cfg: ModelConfig = serde_json::from_str(&ckpt.config_json)?;
        cfg.validate()?;
        if let Some(expected) = expected {
            if cfg.fingerprint() != expected.fingerprint() {
                return Err(CoreError::FingerprintMismatch {
                    checkpoint: cfg.fingerprint(),
                    config: expected.fingerprint(),
                });
            }
        }
        let store = ParamStore::from_arrays(&cfg, ckpt.params)?;
        Ok(Self { cfg, store })
    }

    pub fn new(cfg: ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let store = ParamStore::init(&cfg);
        Ok(Self { cfg, store })
    }

    /// Forward pass over `images[camera][frame]` (each (H, W, 3)) with one
    /// encoded rig camera vector per camera.
    pub fn forward(
        &self,
        images: &[Vec<Array3<f64>>],
        rig_vecs: &[CameraVector10],
    ) -> Result<ForwardPass> {
        if images.is_empty() || images[0].is_empty() {
            return Err(CoreError::Shape("forward needs at least one image".into()));
        }
        if images.len() != rig_vecs.len() {
            return Err(CoreError::LengthMismatch {
                expected: images.len(),
                got: rig_vecs.len(),
            });
        }
        let (h, w) = (self.cfg.image_height, self.cfg.image_width);
        for frames in images {
            for img in frames {
                if img.dim() != (h, w, 3) {
                    return Err(CoreError::Shape(format!(
                        "image {:?} does not match configured {h}x{w}x3",
                        img.dim()
                    )));
                }
            }
        }

        let tape = Tape::new();
        let params = TapeParams::bind(&tape, &self.store);
        let image_leaves: Vec<Vec<V>> = images
            .iter()
            .map(|frames| frames.iter().map(|img| tape.leaf(img.clone().into_dyn())).collect())
            .collect();

        let t0 = Instant::now();
        let tva = tva::run_tva(&tape, &params, &self.cfg, &image_leaves);
        let t1 = Instant::now();
        let mca = mca::run_mca(&tape, &params, &self.cfg, &tva, rig_vecs);
        let t2 = Instant::now();
        let out = heads::run_heads(&tape, &params, &self.cfg, &mca);
        let t3 = Instant::now();

        let timings = StageTimings {
            tva_ms: (t1 - t0).as_secs_f64() * 1e3,
            mca_ms: (t2 - t1).as_secs_f64() * 1e3,
            heads_ms: (t3 - t2).as_secs_f64() * 1e3,
        };
        Ok(ForwardPass {
            tape,
            params,
            image_leaves,
            out,
            timings,
        })
    }
}
