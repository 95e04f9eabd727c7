//! Shared setup for the attention benchmarks: deterministic token batches
//! and a parameter store sized for the benchmark configuration.

use mcamvggt_core::model::params::ParamStore;
use mcamvggt_core::model::ModelConfig;
use mcamvggt_core::tape::{Tape, V};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOKEN_DIM: usize = 64;
pub const NUM_HEADS: usize = 2;
pub const CAMERAS: usize = 2;
pub const TOKENS_PER_IMAGE: usize = 32;

/// Parameter store holding one cross-camera attention block of the
/// benchmark's dimensions.
pub fn bench_store() -> ParamStore {
    let cfg = ModelConfig {
        token_dim: TOKEN_DIM,
        num_heads: NUM_HEADS,
        num_layers: 1,
        selected_layers: vec![1],
        ..ModelConfig::default()
    };
    ParamStore::init(&cfg)
}

/// Deterministic per-image token matrices for `frames` frames.
pub fn token_batch(frames: usize) -> Vec<Vec<Array2<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..frames)
        .map(|_| {
            (0..CAMERAS)
                .map(|_| {
                    Array2::from_shape_fn((TOKENS_PER_IMAGE, TOKEN_DIM), |_| rng.gen::<f64>() - 0.5)
                })
                .collect()
        })
        .collect()
}

/// Put a token batch on a fresh tape.
pub fn bind(tape: &Tape, data: &[Vec<Array2<f64>>]) -> Vec<Vec<V>> {
    data.iter()
        .map(|row| row.iter().map(|a| tape.leaf2(a.clone())).collect())
        .collect()
}
