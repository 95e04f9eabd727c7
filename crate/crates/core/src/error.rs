//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// All rig cameras are co-located; translation statistics are undefined.
    #[error("degenerate rig: pooled translation std {std:.3e} below 1e-12")]
    DegenerateRig { std: f64 },

    /// Every predicted translation norm fell below the exclusion threshold.
    #[error("no valid cameras for scale estimation")]
    NoValidCameras,

    /// Quaternion component of a camera vector has vanishing norm.
    #[error("invalid quaternion: norm {norm:.3e} underflows")]
    InvalidQuaternion { norm: f64 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("depth map has no valid pixels")]
    NoValidPixels,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("scene has no primitives")]
    EmptyScene,

    #[error("missing checkpoint: {0}")]
    MissingCheckpoint(String),

    #[error("checkpoint/config fingerprint mismatch: checkpoint {checkpoint}, config {config}")]
    FingerprintMismatch { checkpoint: String, config: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
