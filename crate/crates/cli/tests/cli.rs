//! End-to-end tests of the binary: subcommand round trips, exit codes,
//! determinism and output schemas.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcamvggt"))
}

fn write_config(dir: &Path, extra_steps: usize) -> std::path::PathBuf {
    let cfg = serde_json::json!({
        "scene": {"frames": 4, "seed": 3},
        "model": {
            "image_height": 28, "image_width": 56, "patch_size": 14,
            "token_dim": 32, "num_layers": 2, "num_heads": 2,
            "selected_layers": [1, 2], "mlp_ratio": 2.0, "window_size": 3,
            "head_channels": 8, "max_frames": 32, "variant": "full",
            "init_seed": 7
        },
        "train": {
            "steps": extra_steps, "lr": 0.001,
            "batch_frames_min": 3, "batch_frames_max": 4,
            "seed": 1, "checkpoint_every": 0
        },
        "bench": {
            "token_dim": 16, "num_heads": 2, "cameras": 2,
            "tokens_per_image": 4, "frame_counts": [4],
            "window_sizes": [3], "repeats": 2, "warmups": 1, "seed": 0
        }
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn generate_train_eval_bench_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 3);
    let out = dir.path().join("run");

    run_ok(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert!(out.join("scene/desk-default/spec.json").exists());
    assert!(out.join("scene/desk-default/frames/3/cam_front/depth.raw").exists());

    run_ok(bin().args(["train", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert!(out.join("full.ckpt").exists());
    let log = fs::read_to_string(out.join("train_full.jsonl")).unwrap();
    let lines: Vec<&str> = log.trim().lines().collect();
    assert_eq!(lines.len(), 3);
    let rec: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    for key in ["step", "total", "depth", "rel", "seq", "scale_pred", "lr", "wall_ms"] {
        assert!(rec.get(key).is_some(), "log line missing {key}");
    }

    let ply = out.join("cloud.ply");
    run_ok(
        bin()
            .args(["eval", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .arg("--alignment")
            .arg("least_squares")
            .arg("--export-ply")
            .arg(&ply),
    );
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["variant"], "full");
    assert_eq!(metrics["frames"], 4);
    assert_eq!(metrics["cameras"], 3);
    for key in ["auc30", "auc15", "abs_rel", "delta3"] {
        assert!(metrics[key].is_f64() || metrics[key].is_u64(), "bad {key}");
    }
    for key in ["tva", "mca", "heads", "total"] {
        assert!(metrics["latency_ms"][key].is_f64(), "bad latency {key}");
    }
    let ply_head = fs::read_to_string(&ply).unwrap();
    assert!(ply_head.starts_with("ply\nformat ascii 1.0\n"));

    run_ok(bin().args(["bench", "--config"]).arg(&cfg).arg("--out").arg(&out));
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("bench.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
}

#[test]
fn scale_head_alignment_flag_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 2);
    let out = dir.path().join("run");
    run_ok(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(&out));
    run_ok(bin().args(["train", "--config"]).arg(&cfg).arg("--out").arg(&out));
    run_ok(
        bin()
            .args(["eval", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--alignment", "scale_head"]),
    );
}

#[test]
fn generation_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 2);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(&a));
    run_ok(
        bin()
            .args(["generate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&b)
            .env("MCAMVGGT_THREADS", "3"),
    );
    let rel = "scene/desk-default/frames/2/cam_left/image.raw";
    assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap());
}

#[test]
fn seed_flag_changes_the_scene() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 2);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(&a));
    run_ok(
        bin()
            .args(["generate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&b)
            .args(["--seed", "99"]),
    );
    // Geometry is deterministic but the lidar sampling depends on the seed.
    let rel = "scene/desk-default/frames/0/cam_front/depth.raw";
    let exact_same = fs::read(a.join(rel)).unwrap() == fs::read(b.join(rel)).unwrap();
    let spec_a = fs::read_to_string(a.join("scene/desk-default/spec.json")).unwrap();
    let spec_b = fs::read_to_string(b.join("scene/desk-default/spec.json")).unwrap();
    assert!(!exact_same || spec_a != spec_b);
    let spec: serde_json::Value = serde_json::from_str(&spec_b).unwrap();
    assert_eq!(spec["rng_seed"], 99);
}

#[test]
fn exit_codes_match_failure_classes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 2);
    let out = dir.path().join("run");

    // 3: config file does not exist (I/O).
    let missing = bin()
        .args(["generate", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3));

    // 2: malformed config.
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let parse = bin().args(["generate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(parse.status.code(), Some(2));

    // 2: structurally valid JSON, invalid settings.
    let invalid = dir.path().join("invalid.json");
    fs::write(&invalid, r#"{"model": {"window_size": 2}}"#).unwrap();
    let cfgerr = bin().args(["generate", "--config"]).arg(&invalid).output().unwrap();
    assert_eq!(cfgerr.status.code(), Some(2));

    // 2: bad threads env var.
    run_ok(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(&out));
    let badthreads = bin()
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("MCAMVGGT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(badthreads.status.code(), Some(2));

    // 3: eval before training (missing checkpoint).
    let nockpt = bin()
        .args(["eval", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(nockpt.status.code(), Some(3));

    // 2: unknown alignment value.
    run_ok(bin().args(["train", "--config"]).arg(&cfg).arg("--out").arg(&out));
    let badalign = bin()
        .args(["eval", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--alignment", "nearest"])
        .output()
        .unwrap();
    assert_eq!(badalign.status.code(), Some(2));

    // 5: checkpoint trained under a different architecture.
    let other_cfg_path = dir.path().join("other.json");
    let mut other: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    other["model"]["token_dim"] = 16.into();
    fs::write(&other_cfg_path, serde_json::to_string(&other).unwrap()).unwrap();
    let mismatch = bin()
        .args(["eval", "--config"])
        .arg(&other_cfg_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(mismatch.status.code(), Some(5));
}
