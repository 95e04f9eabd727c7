//! Command-line driver for the reconstruction pipeline.
//!
//! Subcommands: `generate` (render a synthetic dataset), `train` (fit the
//! model on a scene), `eval` (metrics + optional point-cloud export, or the
//! three-variant ablation), `bench` (windowed vs global attention cost).
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numeric
//! error, 5 checkpoint/data compatibility error. The `MCAMVGGT_THREADS`
//! environment variable caps worker threads for dataset generation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use mcamvggt_core::error::CoreError;
use mcamvggt_core::eval::{evaluate, run_ablation, run_bench, Alignment, BenchSettings};
use mcamvggt_core::io::write_ply;
use mcamvggt_core::model::{Model, ModelConfig, ModelVariant};
use mcamvggt_core::synthetic::{
    default_scene_spec_frames, generate_scene_threaded, load_dataset, scene_dir, write_dataset,
    DepthSource, SceneSpec,
};
use mcamvggt_core::train::{train, TrainConfig};

const THREADS_ENV: &str = "MCAMVGGT_THREADS";

#[derive(Parser)]
#[command(name = "mcamvggt", version, about = "Multi-camera feed-forward 4D reconstruction")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render the synthetic dataset described by the config.
    Generate(CommonArgs),
    /// Train the configured model variant on a generated scene.
    Train(CommonArgs),
    /// Evaluate a trained checkpoint (or the full ablation) on a scene.
    Eval(CommonArgs),
    /// Measure windowed vs global attention cost.
    Bench(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Run directory for datasets, checkpoints, logs and reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the number of scene frames.
    #[arg(long)]
    frames: Option<usize>,
    /// Depth scale alignment: least_squares or scale_head.
    #[arg(long)]
    alignment: Option<String>,
    /// Write the predicted point cloud to this PLY file (eval only).
    #[arg(long, value_name = "PATH")]
    export_ply: Option<PathBuf>,
    /// Override the scene seed (generate) or training seed (train).
    #[arg(long)]
    seed: Option<u64>,
}

fn default_scene_frames() -> usize {
    8
}
fn default_scene_seed() -> u64 {
    0
}

/// Scene section of the run config.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SceneSection {
    #[serde(default = "default_scene_seed")]
    seed: u64,
    #[serde(default = "default_scene_frames")]
    frames: usize,
    #[serde(default)]
    depth_source: DepthSource,
}

impl Default for SceneSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct EvalSection {
    #[serde(default)]
    alignment: Alignment,
    /// Evaluate all three variants (expects their checkpoints side by side).
    #[serde(default)]
    ablation: bool,
}

/// Top-level run configuration. Every section has defaults, so `{}` is a
/// valid config.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    scene: SceneSection,
    #[serde(default)]
    model: ModelConfig,
    #[serde(default)]
    train: TrainConfig,
    #[serde(default)]
    eval: EvalSection,
    #[serde(default)]
    bench: BenchSettings,
}

fn exit_code_for(err: &CoreError) -> u8 {
    match err {
        CoreError::InvalidConfig(_) | CoreError::Json(_) | CoreError::EmptyScene => 2,
        CoreError::Io(_) | CoreError::MissingCheckpoint(_) => 3,
        CoreError::NonFinite(_)
        | CoreError::DegenerateRig { .. }
        | CoreError::InvalidQuaternion { .. }
        | CoreError::NoValidPixels
        | CoreError::NoValidCameras => 4,
        CoreError::FingerprintMismatch { .. }
        | CoreError::Shape(_)
        | CoreError::LengthMismatch { .. } => 5,
    }
}

fn worker_threads() -> Result<usize, CoreError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| {
                CoreError::InvalidConfig(format!(
                    "{THREADS_ENV} must be a positive integer, got {raw:?}"
                ))
            }),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CoreError> {
    let text = fs::read_to_string(path)?;
    let cfg: RunConfig = serde_json::from_str(&text)?;
    cfg.model.validate()?;
    cfg.train.validate()?;
    Ok(cfg)
}

fn scene_spec(cfg: &RunConfig, args: &CommonArgs) -> SceneSpec {
    let seed = args.seed.unwrap_or(cfg.scene.seed);
    let frames = args.frames.unwrap_or(cfg.scene.frames);
    default_scene_spec_frames(seed, frames)
}

fn load_scene(cfg: &RunConfig, args: &CommonArgs) -> Result<(SceneSpec, Vec<mcamvggt_core::synthetic::LoadedFrame>), CoreError> {
    let spec = scene_spec(cfg, args);
    let dir = scene_dir(&args.out, &spec.name);
    let (spec, mut frames) = load_dataset(&dir)?;
    if let Some(k) = args.frames {
        frames.truncate(k);
    }
    Ok((spec, frames))
}

fn checkpoint_path(out: &Path, variant: ModelVariant) -> PathBuf {
    out.join(format!("{}.ckpt", variant.as_str()))
}

fn cmd_generate(cfg: &RunConfig, args: &CommonArgs) -> Result<(), CoreError> {
    let spec = scene_spec(cfg, args);
    let threads = worker_threads()?;
    let frames = generate_scene_threaded(&spec, threads)?;
    fs::create_dir_all(&args.out)?;
    let dir = write_dataset(&args.out, &spec, &frames, cfg.scene.depth_source)?;
    println!(
        "generated scene {:?}: {} frames x {} cameras -> {}",
        spec.name,
        frames.len(),
        spec.rig.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_train(cfg: &RunConfig, args: &CommonArgs) -> Result<(), CoreError> {
    let (spec, frames) = load_scene(cfg, args)?;
    let mut tcfg = cfg.train.clone();
    if let Some(seed) = args.seed {
        tcfg.seed = seed;
    }
    let ckpt = checkpoint_path(&args.out, cfg.model.variant);
    let mut model = if ckpt.exists() {
        // Resume: parameters from disk, same architecture enforced.
        Model::load(&ckpt, Some(&cfg.model))?
    } else {
        Model::new(cfg.model.clone())?
    };
    let log_path = args
        .out
        .join(format!("train_{}.jsonl", cfg.model.variant.as_str()));
    let mut log = fs::File::create(&log_path)?;
    let records = train(&mut model, &spec.rig, &frames, &tcfg, Some(&mut log), Some(&ckpt))?;
    let last = records.last().expect("at least one step");
    println!(
        "trained {} for {} steps: total loss {:.4} -> checkpoint {}",
        cfg.model.variant.as_str(),
        records.len(),
        last.total,
        ckpt.display()
    );
    Ok(())
}

fn cmd_eval(cfg: &RunConfig, args: &CommonArgs) -> Result<(), CoreError> {
    let (spec, frames) = load_scene(cfg, args)?;
    let alignment = match &args.alignment {
        Some(s) => s.parse()?,
        None => cfg.eval.alignment,
    };

    if cfg.eval.ablation {
        let reports = run_ablation(&args.out, &cfg.model, &spec.rig, &frames, alignment)?;
        let path = args.out.join("ablation.json");
        fs::write(&path, serde_json::to_string_pretty(&reports)?)?;
        for r in &reports {
            println!(
                "{:>16}: auc30 {:.4}  auc15 {:.4}  abs_rel {:.4}  delta3 {:.4}",
                r.variant, r.auc30, r.auc15, r.abs_rel, r.delta3
            );
        }
        println!("wrote {}", path.display());
        return Ok(());
    }

    let ckpt = checkpoint_path(&args.out, cfg.model.variant);
    let model = Model::load(&ckpt, Some(&cfg.model))?;
    let outcome = evaluate(&model, &spec.rig, &frames, alignment)?;
    let path = args.out.join("metrics.json");
    fs::write(&path, serde_json::to_string_pretty(&outcome.report)?)?;
    if let Some(ply) = &args.export_ply {
        write_ply(ply, &outcome.points, Some(&outcome.colors))?;
        println!("wrote {} points to {}", outcome.points.len(), ply.display());
    }
    let r = &outcome.report;
    println!(
        "{}: auc30 {:.4}  auc15 {:.4}  abs_rel {:.4}  delta3 {:.4}  scale {:.4}  ({:.1} ms)",
        r.variant, r.auc30, r.auc15, r.abs_rel, r.delta3, outcome.scale, r.latency_ms.total
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_bench(cfg: &RunConfig, args: &CommonArgs) -> Result<(), CoreError> {
    let rows = run_bench(&cfg.bench)?;
    fs::create_dir_all(&args.out)?;
    let path = args.out.join("bench.json");
    fs::write(&path, serde_json::to_string_pretty(&rows)?)?;
    println!("{:>9} {:>7} {:>7} {:>8} {:>12}", "mode", "frames", "window", "tokens", "median_ms");
    for r in &rows {
        println!(
            "{:>9} {:>7} {:>7} {:>8} {:>12.3}",
            r.mode,
            r.frames,
            r.window.map_or("-".to_string(), |w| w.to_string()),
            r.tokens,
            r.median_ms
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CoreError> {
    let args = match &cli.cmd {
        Cmd::Generate(a) | Cmd::Train(a) | Cmd::Eval(a) | Cmd::Bench(a) => a,
    };
    let cfg = load_config(&args.config)?;
    match &cli.cmd {
        Cmd::Generate(a) => cmd_generate(&cfg, a),
        Cmd::Train(a) => cmd_train(&cfg, a),
        Cmd::Eval(a) => cmd_eval(&cfg, a),
        Cmd::Bench(a) => cmd_bench(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
