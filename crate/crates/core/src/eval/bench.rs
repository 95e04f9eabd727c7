//! Attention-cost measurement: wall-clock forward time of windowed
//! cross-camera attention versus full global attention, across frame counts
//! and window widths.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::mca::{global_attention, window_attention};
use crate::model::params::{ParamStore, TapeParams};
use crate::model::ModelConfig;
use crate::tape::Tape;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSettings {
    pub token_dim: usize,
    pub num_heads: usize,
    pub cameras: usize,
    pub tokens_per_image: usize,
    pub frame_counts: Vec<usize>,
    pub window_sizes: Vec<usize>,
    /// Timed repetitions per configuration; the median is reported.
    pub repeats: usize,
    /// Untimed runs before measuring.
    pub warmups: usize,
    pub seed: u64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            token_dim: 64,
            num_heads: 2,
            cameras: 2,
            tokens_per_image: 32,
            frame_counts: vec![16, 32],
            window_sizes: vec![3, 5, 7],
            repeats: 5,
            warmups: 2,
            seed: 0,
        }
    }
}

/// One measured configuration. `window` is `None` for global attention.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub mode: String,
    pub frames: usize,
    pub window: Option<usize>,
    pub tokens: usize,
    pub median_ms: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Time one attention mode over random tokens; median over repeats.
fn time_one(
    settings: &BenchSettings,
    store: &ParamStore,
    frames: usize,
    window: Option<usize>,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let data: Vec<Vec<Array2<f64>>> = (0..frames)
        .map(|_| {
            (0..settings.cameras)
                .map(|_| {
                    Array2::from_shape_fn((settings.tokens_per_image, settings.token_dim), |_| {
                        rng.gen::<f64>() - 0.5
                    })
                })
                .collect()
        })
        .collect();

    let run = || {
        let t = Tape::new();
        let p = TapeParams::bind(&t, store);
        let tokens: Vec<Vec<_>> = data
            .iter()
            .map(|row| row.iter().map(|a| t.leaf2(a.clone())).collect())
            .collect();
        let start = Instant::now();
        let out = match window {
            Some(w) => window_attention(&t, &p, "mca.0", &tokens, settings.num_heads, w),
            None => global_attention(&t, &p, "mca.0", &tokens, settings.num_heads, None),
        };
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(t.value(out[0][0]));
        elapsed
    };

    for _ in 0..settings.warmups {
        run();
    }
    median((0..settings.repeats).map(|_| run()).collect())
}

/// Measure windowed attention for every (frame count, window) combination
/// plus global attention per frame count.
pub fn run_bench(settings: &BenchSettings) -> Result<Vec<BenchRow>> {
    let cfg = ModelConfig {
        token_dim: settings.token_dim,
        num_heads: settings.num_heads,
        num_layers: 1,
        selected_layers: vec![1],
        ..ModelConfig::default()
    };
    cfg.validate()?;
    let store = ParamStore::init(&cfg);

    let mut rows = Vec::new();
    for &frames in &settings.frame_counts {
        let tokens = frames * settings.cameras * settings.tokens_per_image;
        for &w in &settings.window_sizes {
            rows.push(BenchRow {
                mode: "windowed".into(),
                frames,
                window: Some(w),
                tokens,
                median_ms: time_one(settings, &store, frames, Some(w)),
            });
        }
        rows.push(BenchRow {
            mode: "global".into(),
            frames,
            window: None,
            tokens,
            median_ms: time_one(settings, &store, frames, None),
        });
    }
    Ok(rows)
}
