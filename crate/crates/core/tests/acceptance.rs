//! Acceptance gate. Each criterion prints one PASS/FAIL line; every check
//! runs sequentially inside a single test so the wall-clock budgets are not
//! perturbed by parallel test threads.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use mcamvggt_core::eval::{
    depth_metrics, least_squares_scale, pairwise_pose_errors, pose_auc, run_ablation, run_bench,
    Alignment, BenchSettings,
};
use mcamvggt_core::geometry::{
    compose_pose, decode_camera_vector, depth_to_points, encode_camera_vector,
    normalize_rig_translations, project_points_to_depth, rig_normalization_stats, CameraIntrinsics,
    CameraVector10, DepthMap, PoseSE3,
};
use mcamvggt_core::losses::{total_loss, LossTargets};
use mcamvggt_core::model::mca::{global_attention, window_attention};
use mcamvggt_core::model::tva::run_tva;
use mcamvggt_core::model::{Model, ModelConfig, ModelVariant, ParamStore, TapeParams};
use mcamvggt_core::synthetic::{
    default_scene_spec, default_scene_spec_frames, generate_scene, load_dataset, write_dataset,
    DepthSource,
};
use mcamvggt_core::tape::Tape;
use mcamvggt_core::train::{train, TrainConfig};
use nalgebra::{Matrix4, Rotation3, Unit, Vector3};
use ndarray::{Array2, Array3, ArrayD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fail(msg: String) -> Result<(), String> {
    Err(msg)
}

fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Array3<f64> {
    Array3::from_shape_fn((h, w, 3), |_| rng.gen::<f64>())
}

fn random_pose(rng: &mut ChaCha8Rng) -> PoseSE3 {
    let axis = Unit::new_normalize(Vector3::new(
        rng.gen::<f64>() - 0.5,
        rng.gen::<f64>() - 0.5,
        rng.gen::<f64>() - 0.5,
    ));
    let angle = (rng.gen::<f64>() - 0.5) * 3.0;
    let rot = Rotation3::from_axis_angle(&axis, angle);
    let t = Vector3::new(
        rng.gen::<f64>() * 4.0 - 2.0,
        rng.gen::<f64>() * 4.0 - 2.0,
        rng.gen::<f64>() * 4.0 - 2.0,
    );
    PoseSE3::new(*rot.matrix(), t)
}

// ---------------------------------------------------------------------------
// A1: per-camera temporal attention is exactly isolated across cameras.
// ---------------------------------------------------------------------------
fn a1_cross_camera_isolation() -> Result<(), String> {
    let cfg = ModelConfig {
        image_height: 28,
        image_width: 28,
        token_dim: 16,
        num_layers: 2,
        num_heads: 2,
        selected_layers: vec![1, 2],
        mlp_ratio: 2.0,
        head_channels: 4,
        ..ModelConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let store = ParamStore::init(&cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (cameras, frames) = (3usize, 3usize);
    let base: Vec<Vec<Array3<f64>>> = (0..cameras)
        .map(|_| (0..frames).map(|_| random_image(&mut rng, 28, 28)).collect())
        .collect();

    let run = |images: &[Vec<Array3<f64>>]| {
        let t = Tape::new();
        let p = TapeParams::bind(&t, &store);
        let leaves: Vec<Vec<_>> = images
            .iter()
            .map(|row| row.iter().map(|a| t.leaf(a.clone().into_dyn())).collect())
            .collect();
        let out = run_tva(&t, &p, &cfg, &leaves);
        let values: Vec<Vec<ArrayD<f64>>> = out
            .layers
            .iter()
            .map(|layer| layer.iter().map(|&v| t.value(v)).collect())
            .collect();
        (t, leaves, out, values)
    };

    let (_, _, _, base_vals) = run(&base);
    for j in 0..cameras {
        // Perturb every input of camera j; other cameras must be bit-identical.
        let mut perturbed = base.clone();
        for img in &mut perturbed[j] {
            img.mapv_inplace(|x| x + 0.37 * (x + 1.0));
        }
        let (_, _, _, new_vals) = run(&perturbed);
        for (k, (layer_base, layer_new)) in base_vals.iter().zip(&new_vals).enumerate() {
            for cam in (0..cameras).filter(|&c| c != j) {
                if layer_base[cam] != layer_new[cam] {
                    return fail(format!(
                        "perturbing camera {j} changed camera {cam} at selected layer {k}"
                    ));
                }
            }
        }
    }

    // Backprop: gradient of camera 0's outputs w.r.t. other cameras' inputs
    // must be exactly absent (never touched on the tape).
    let (t, leaves, out, _) = run(&base);
    let loss = t.sum_all(*out.layers.last().unwrap().first().unwrap());
    let grads = t.backward(loss);
    for frame in 0..frames {
        if grads.get(leaves[0][frame]).is_none() {
            return fail("camera 0 inputs received no gradient from its own outputs".into());
        }
        for cam in 1..cameras {
            if let Some(g) = grads.get(leaves[cam][frame]) {
                return fail(format!(
                    "camera {cam} frame {frame} received cross-camera gradient (max abs {})",
                    g.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                ));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// A2: windowed attention equals the masked-global-attention oracle.
// ---------------------------------------------------------------------------
fn a2_window_attention_oracle() -> Result<(), String> {
    const TOL: f64 = 1e-5;
    let cfg = ModelConfig {
        token_dim: 8,
        num_layers: 2,
        num_heads: 2,
        selected_layers: vec![1, 2],
        mlp_ratio: 2.0,
        ..ModelConfig::default()
    };
    let mut store = ParamStore::init(&cfg);
    store.randomize_zero_residuals(17);
    let mut rng = ChaCha8Rng::seed_from_u64(23);

    for n in 1..=6usize {
        for m in 1..=3usize {
            for w in [1usize, 3, 5] {
                let t = Tape::new();
                let p = TapeParams::bind(&t, &store);
                let tokens: Vec<Vec<_>> = (0..n)
                    .map(|_| {
                        (0..m)
                            .map(|_| {
                                t.leaf2(Array2::from_shape_fn((4, 8), |_| rng.gen::<f64>() - 0.5))
                            })
                            .collect()
                    })
                    .collect();
                let fast = window_attention(&t, &p, "mca.0", &tokens, cfg.num_heads, w);
                let oracle = global_attention(&t, &p, "mca.0", &tokens, cfg.num_heads, Some(w));
                for (fr, (f_row, o_row)) in fast.iter().zip(&oracle).enumerate() {
                    for (cam, (&f, &o)) in f_row.iter().zip(o_row).enumerate() {
                        let diff = &t.value(f) - &t.value(o);
                        let max = diff.iter().fold(0.0f64, |mx, v| mx.max(v.abs()));
                        if max > TOL {
                            return fail(format!(
                                "N={n} M={m} w={w} frame {fr} cam {cam}: max abs diff {max:.3e} > {TOL:.0e}"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// A3: windowed attention scales ~linearly in frames, global ~quadratically,
// and cost grows with window width.
// ---------------------------------------------------------------------------
fn a3_complexity_trend() -> Result<(), String> {
    let settings = BenchSettings::default();
    let rows = run_bench(&settings).map_err(|e| e.to_string())?;
    let lookup = |mode: &str, frames: usize, window: Option<usize>| -> Result<f64, String> {
        rows.iter()
            .find(|r| r.mode == mode && r.frames == frames && r.window == window)
            .map(|r| r.median_ms)
            .ok_or_else(|| format!("missing bench row {mode}/{frames}/{window:?}"))
    };

    let windowed_ratio = lookup("windowed", 32, Some(3))? / lookup("windowed", 16, Some(3))?;
    if windowed_ratio > 2.8 {
        return fail(format!(
            "windowed w=3 t(N=32)/t(N=16) = {windowed_ratio:.2} > 2.8"
        ));
    }
    let global_ratio = lookup("global", 32, None)? / lookup("global", 16, None)?;
    if global_ratio < 3.0 {
        return fail(format!("global t(N=32)/t(N=16) = {global_ratio:.2} < 3.0"));
    }
    for frames in [16usize, 32] {
        let (t3, t5, t7) = (
            lookup("windowed", frames, Some(3))?,
            lookup("windowed", frames, Some(5))?,
            lookup("windowed", frames, Some(7))?,
        );
        if !(t7 > t5 && t5 > t3) {
            return fail(format!(
                "window-width ordering broken at N={frames}: w3 {t3:.1} ms, w5 {t5:.1} ms, w7 {t7:.1} ms"
            ));
        }
    }
    println!(
        "    windowed N-ratio {windowed_ratio:.2} (<= 2.8), global N-ratio {global_ratio:.2} (>= 3.0)"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// A4: analytic gradients of the total loss match central finite differences.
// ---------------------------------------------------------------------------
fn a4_gradient_correctness() -> Result<(), String> {
    const H: f64 = 1e-5;
    const TOL: f64 = 1e-4;
    let cfg = ModelConfig {
        image_height: 28,
        image_width: 14,
        token_dim: 32,
        num_layers: 2,
        num_heads: 2,
        selected_layers: vec![1, 2],
        mlp_ratio: 2.0,
        head_channels: 4,
        ..ModelConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let mut model = Model::new(cfg).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // 2-camera / 3-frame instance with dense positive depth targets.
    let (cameras, frames) = (2usize, 3usize);
    let intr = CameraIntrinsics::centered(18.0, 18.0, 14, 28);
    let rig_vecs: Vec<CameraVector10> = (0..cameras)
        .map(|_| encode_camera_vector(&random_pose(&mut rng), &intr))
        .collect();
    let images: Vec<Vec<Array3<f64>>> = (0..cameras)
        .map(|_| (0..frames).map(|_| random_image(&mut rng, 28, 14)).collect())
        .collect();
    let seq_vecs = Array2::from_shape_fn((frames, 10), |(i, j)| {
        if i == 0 {
            // Frame 0 target: identity motion with plausible intrinsics slots.
            encode_camera_vector(&PoseSE3::identity(), &intr).as_array()[j]
        } else {
            encode_camera_vector(&random_pose(&mut rng), &intr).as_array()[j]
        }
    });
    let rel_vecs = Array2::from_shape_fn((cameras, 10), |(i, j)| rig_vecs[i].as_array()[j]);
    let depth: Vec<Vec<DepthMap>> = (0..frames)
        .map(|_| {
            (0..cameras)
                .map(|_| DepthMap {
                    depth: Array2::from_shape_fn((28, 14), |_| 0.5 + rng.gen::<f64>()),
                    mask: Array2::from_elem((28, 14), true),
                    confidence: None,
                })
                .collect()
        })
        .collect();
    let targets = LossTargets {
        seq_vecs,
        rel_vecs,
        depth,
    };

    let loss_value = |model: &Model| -> Result<f64, String> {
        let pass = model.forward(&images, &rig_vecs).map_err(|e| e.to_string())?;
        let loss = total_loss(&pass.tape, &pass.out, &targets).map_err(|e| e.to_string())?;
        Ok(pass.tape.scalar(loss.total))
    };

    // Analytic gradients from one recorded pass.
    let pass = model.forward(&images, &rig_vecs).map_err(|e| e.to_string())?;
    let loss = total_loss(&pass.tape, &pass.out, &targets).map_err(|e| e.to_string())?;
    let grads = pass.tape.backward(loss.total);
    let analytic = pass.params.gradients(&pass.tape, &grads);
    drop(pass);

    // 25 deterministically sampled parameter scalars.
    let names: Vec<String> = model.store.map.keys().cloned().collect();
    let mut sampler = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..25 {
        let name = &names[sampler.gen_range(0..names.len())];
        let len = model.store.map[name].len();
        let idx = sampler.gen_range(0..len);

        let original = *model.store.map[name].iter().nth(idx).unwrap();
        let mut eval_at = |x: f64| -> Result<f64, String> {
            *model.store.map.get_mut(name).unwrap().iter_mut().nth(idx).unwrap() = x;
            loss_value(&model)
        };
        let plus = eval_at(original + H)?;
        let minus = eval_at(original - H)?;
        *model.store.map.get_mut(name).unwrap().iter_mut().nth(idx).unwrap() = original;

        let fd = (plus - minus) / (2.0 * H);
        let an = *analytic[name].iter().nth(idx).unwrap();
        let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-6);
        if rel > TOL {
            return fail(format!(
                "{name}[{idx}]: analytic {an:.6e} vs finite-difference {fd:.6e} (rel {rel:.3e})"
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// A5: training converges and the ablation ordering comes out right.
// ---------------------------------------------------------------------------
fn a5_convergence_and_ablation() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = default_scene_spec_frames(0, 8);
    let rendered = generate_scene(&spec).map_err(|e| e.to_string())?;
    let scene = write_dataset(dir.path(), &spec, &rendered, DepthSource::Enhanced)
        .map_err(|e| e.to_string())?;
    let (spec, frames) = load_dataset(&scene).map_err(|e| e.to_string())?;

    let model_cfg = |variant: ModelVariant| ModelConfig {
        token_dim: 64,
        num_layers: 4,
        num_heads: 4,
        selected_layers: vec![2, 4],
        head_channels: 8,
        init_seed: 2,
        variant,
        ..ModelConfig::default()
    };
    let tcfg = TrainConfig {
        steps: 500,
        lr: 1e-3,
        batch_frames_min: 3,
        batch_frames_max: 6,
        seed: 0,
        checkpoint_every: 0,
    };

    let mut full_records = Vec::new();
    for variant in [
        ModelVariant::Full,
        ModelVariant::RelPoseEmbed,
        ModelVariant::TvaBaseline,
    ] {
        let mut model = Model::new(model_cfg(variant)).map_err(|e| e.to_string())?;
        let ckpt = dir.path().join(format!("{}.ckpt", variant.as_str()));
        let records = train(&mut model, &spec.rig, &frames, &tcfg, None, Some(&ckpt))
            .map_err(|e| e.to_string())?;
        if variant == ModelVariant::Full {
            full_records = records;
        }
    }

    // Convergence: final loss at most half the step-10 moving average.
    let ma10: f64 = full_records[..10].iter().map(|r| r.total).sum::<f64>() / 10.0;
    let last = full_records.last().unwrap().total;
    if !(last <= 0.5 * ma10) {
        return fail(format!(
            "full-variant loss did not halve: step-10 moving average {ma10:.4}, final {last:.4}"
        ));
    }

    // Ablation direction on auc30.
    let reports = run_ablation(
        dir.path(),
        &model_cfg(ModelVariant::Full),
        &spec.rig,
        &frames,
        Alignment::LeastSquares,
    )
    .map_err(|e| e.to_string())?;
    let auc = |variant: &str| -> Result<f64, String> {
        reports
            .iter()
            .find(|r| r.variant == variant)
            .map(|r| r.auc30)
            .ok_or_else(|| format!("ablation report missing {variant}"))
    };
    let (baseline, rel, full) = (auc("baseline_tva")?, auc("rel_pose_embed")?, auc("full")?);
    println!(
        "    auc30: baseline {baseline:.4}, rel_pose_embed {rel:.4}, full {full:.4}; \
         loss {ma10:.3} -> {last:.3}"
    );
    if !(full > rel && rel > baseline) {
        return fail(format!(
            "auc30 ordering broken: full {full:.4}, rel_pose_embed {rel:.4}, baseline {baseline:.4}"
        ));
    }
    if !(baseline < 0.3) {
        return fail(format!("baseline auc30 {baseline:.4} >= 0.3"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// A6: metric scale recovery from oracle predictions.
// ---------------------------------------------------------------------------
fn a6_scale_recovery() -> Result<(), String> {
    let spec = default_scene_spec_frames(3, 4);
    let rendered = generate_scene(&spec).map_err(|e| e.to_string())?;
    let stats = rig_normalization_stats(&spec.rig).map_err(|e| e.to_string())?;
    let s_true = stats.metric_scale();
    let nf = stats.norm_factor();

    // Oracle ego translations: real motion and its normalized prediction.
    let base_inv = rendered[0].ego_pose.inverse();
    let t_real: Vec<Vector3<f64>> = rendered[1..]
        .iter()
        .map(|f| *compose_pose(&base_inv, &f.ego_pose).translation())
        .collect();
    let t_pred: Vec<Vector3<f64>> = t_real.iter().map(|t| t * nf).collect();
    let scale =
        mcamvggt_core::geometry::estimate_scale(&t_real, &t_pred).map_err(|e| e.to_string())?;
    let rel = (scale - s_true).abs() / s_true;
    if rel > 1e-6 {
        return fail(format!(
            "recovered scale {scale:.9} vs true {s_true:.9} (rel {rel:.3e})"
        ));
    }

    // Oracle depth: normalized predictions; least-squares alignment and the
    // (perfect) scale-head value must agree on abs_rel.
    let gts: Vec<&DepthMap> = rendered
        .iter()
        .flat_map(|f| f.cameras.iter().map(|c| &c.depth))
        .collect();
    let preds_owned: Vec<Array2<f64>> = gts.iter().map(|d| &d.depth * nf).collect();
    let preds: Vec<&Array2<f64>> = preds_owned.iter().collect();
    let s_ls = least_squares_scale(&preds, &gts).map_err(|e| e.to_string())?;
    let (abs_rel_ls, _) = depth_metrics(&preds, &gts, s_ls).map_err(|e| e.to_string())?;
    let (abs_rel_sh, _) = depth_metrics(&preds, &gts, s_true).map_err(|e| e.to_string())?;
    if (abs_rel_ls - abs_rel_sh).abs() > 1e-6 {
        return fail(format!(
            "alignment mismatch: least-squares abs_rel {abs_rel_ls:.9} vs scale-head {abs_rel_sh:.9}"
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// A7: metric sanity and a brute-force AUC oracle.
// ---------------------------------------------------------------------------
fn a7_metric_sanity() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let gt: Vec<PoseSE3> = (0..5).map(|_| random_pose(&mut rng)).collect();

    // Perfect predictions.
    let errors = pairwise_pose_errors(&gt, &gt).map_err(|e| e.to_string())?;
    if pose_auc(&errors, 30) != 1.0 || pose_auc(&errors, 15) != 1.0 {
        return fail("perfect poses did not give auc = 1".into());
    }
    let gt_depth = DepthMap {
        depth: Array2::from_shape_fn((6, 7), |(i, j)| 1.0 + i as f64 + 0.3 * j as f64),
        mask: Array2::from_elem((6, 7), true),
        confidence: None,
    };
    let pred = gt_depth.depth.clone();
    let (abs_rel, delta3) =
        depth_metrics(&[&pred], &[&gt_depth], 1.0).map_err(|e| e.to_string())?;
    if abs_rel != 0.0 || delta3 != 1.0 {
        return fail(format!(
            "perfect depth scored abs_rel {abs_rel}, delta3 {delta3}"
        ));
    }

    // Brute-force oracle on 4-pose instances, independent matrix math.
    for trial in 0..20 {
        let gt: Vec<PoseSE3> = (0..4).map(|_| random_pose(&mut rng)).collect();
        let pred: Vec<PoseSE3> = gt
            .iter()
            .map(|p| {
                let jitter = Rotation3::from_axis_angle(
                    &Unit::new_normalize(Vector3::new(
                        rng.gen::<f64>() - 0.5,
                        rng.gen::<f64>() - 0.5,
                        rng.gen::<f64>() - 0.5,
                    )),
                    rng.gen::<f64>() * 0.8,
                );
                PoseSE3::new(
                    jitter.matrix() * p.rotation(),
                    p.translation() + Vector3::new(rng.gen(), rng.gen(), rng.gen()) * 0.4,
                )
            })
            .collect();

        let errors = pairwise_pose_errors(&pred, &gt).map_err(|e| e.to_string())?;
        for tau_max in [15usize, 30] {
            let fast = pose_auc(&errors, tau_max);
            let oracle = brute_force_auc(&pred, &gt, tau_max);
            if (fast - oracle).abs() > 1e-12 {
                return fail(format!(
                    "trial {trial} tau_max {tau_max}: pose_auc {fast:.15} vs oracle {oracle:.15}"
                ));
            }
        }
    }
    Ok(())
}

/// Independent pairwise-error + threshold-sweep AUC computation on 4x4
/// homogeneous matrices.
fn brute_force_auc(pred: &[PoseSE3], gt: &[PoseSE3], tau_max: usize) -> f64 {
    let mut errors = Vec::new();
    for i in 0..pred.len() {
        for j in (i + 1)..pred.len() {
            let rel = |a: &PoseSE3, b: &PoseSE3| -> Matrix4<f64> {
                a.as_matrix().try_inverse().unwrap() * b.as_matrix()
            };
            let rp = rel(&pred[i], &pred[j]);
            let rg = rel(&gt[i], &gt[j]);
            // Rotation residual angle from the trace.
            let rr = rp.fixed_view::<3, 3>(0, 0).transpose() * rg.fixed_view::<3, 3>(0, 0);
            let cos = ((rr.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
            let rot_deg = cos.acos().to_degrees();
            // Translation direction angle.
            let (tp, tg) = (rp.fixed_view::<3, 1>(0, 3), rg.fixed_view::<3, 1>(0, 3));
            let trans_deg = if tp.norm() < 1e-9 || tg.norm() < 1e-9 {
                0.0
            } else {
                (tp.dot(&tg) / (tp.norm() * tg.norm()))
                    .clamp(-1.0, 1.0)
                    .acos()
                    .to_degrees()
            };
            errors.push(rot_deg.max(trans_deg));
        }
    }
    let mut acc = 0.0;
    for tau in 1..=tau_max {
        let hits = errors.iter().filter(|&&e| e < tau as f64).count();
        acc += hits as f64 / errors.len() as f64;
    }
    acc / tau_max as f64
}

// ---------------------------------------------------------------------------
// A8: geometry round trips.
// ---------------------------------------------------------------------------
fn a8_geometry_round_trips() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(88);

    // SE(3) composition against the homogeneous-matrix oracle.
    for _ in 0..50 {
        let (a, b) = (random_pose(&mut rng), random_pose(&mut rng));
        let fast = compose_pose(&a, &b).as_matrix();
        let oracle = a.as_matrix() * b.as_matrix();
        let max = (fast - oracle).abs().max();
        if max > 1e-12 {
            return fail(format!("compose_pose deviates from matmul by {max:.3e}"));
        }
    }

    // Depth -> points -> depth.
    let intr = CameraIntrinsics::centered(20.0, 22.0, 16, 12);
    let pose = random_pose(&mut rng);
    let depth = DepthMap {
        depth: Array2::from_shape_fn((12, 16), |(v, u)| {
            2.0 + 0.3 * (v as f64 * 0.7).sin() + 0.2 * (u as f64 * 0.4).cos()
        }),
        mask: Array2::from_elem((12, 16), true),
        confidence: None,
    };
    let points = depth_to_points(&depth, &intr, &pose, 1.0);
    let back = project_points_to_depth(&points, &intr, &pose);
    for v in 0..12 {
        for u in 0..16 {
            if !back.mask[[v, u]] {
                return fail(format!("round-tripped depth lost pixel ({v}, {u})"));
            }
            let diff = (back.depth[[v, u]] - depth.depth[[v, u]]).abs();
            if diff > 1e-6 {
                return fail(format!("depth round trip off by {diff:.3e} at ({v}, {u})"));
            }
        }
    }

    // Camera-vector encode/decode.
    for _ in 0..50 {
        let pose = random_pose(&mut rng);
        let intr = CameraIntrinsics::centered(15.0 + rng.gen::<f64>() * 10.0, 18.0, 14, 28);
        let vec = encode_camera_vector(&pose, &intr);
        let (p2, i2) = decode_camera_vector(&vec, 14, 28).map_err(|e| e.to_string())?;
        let max_pose = (p2.as_matrix() - pose.as_matrix()).abs().max();
        let max_intr = (i2.fx - intr.fx)
            .abs()
            .max((i2.fy - intr.fy).abs())
            .max((i2.cx - intr.cx).abs())
            .max((i2.cy - intr.cy).abs());
        if max_pose > 1e-9 || max_intr > 1e-9 {
            return fail(format!(
                "encode/decode round trip off: pose {max_pose:.3e}, intrinsics {max_intr:.3e}"
            ));
        }
    }

    // Rig normalization: pooled mean 0, pooled std 0.1.
    let rig = default_scene_spec(0).rig;
    let normalized = normalize_rig_translations(&rig).map_err(|e| e.to_string())?;
    let n = normalized.len() as f64;
    let mean = normalized.iter().sum::<Vector3<f64>>() / n;
    if mean.amax() > 1e-9 {
        return fail(format!("normalized rig mean {mean:?} not zero"));
    }
    let std = (normalized.iter().map(|t| t.norm_squared()).sum::<f64>() / (3.0 * n)).sqrt();
    if (std - 0.1).abs() > 1e-9 {
        return fail(format!("normalized rig pooled std {std:.12} != 0.1"));
    }
    Ok(())
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, &'static str, u64, fn() -> Result<(), String>);
    let criteria: [Criterion; 8] = [
        ("A1", "cross-camera isolation", 10, a1_cross_camera_isolation),
        ("A2", "window-attention oracle", 60, a2_window_attention_oracle),
        ("A3", "complexity trend", 300, a3_complexity_trend),
        ("A4", "gradient correctness", 120, a4_gradient_correctness),
        ("A5", "convergence + ablation", 900, a5_convergence_and_ablation),
        ("A6", "scale recovery", 30, a6_scale_recovery),
        ("A7", "metric sanity", 10, a7_metric_sanity),
        ("A8", "geometry round trips", 10, a8_geometry_round_trips),
    ];

    let mut failures = Vec::new();
    for (id, name, budget_s, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let over_budget = elapsed > Duration::from_secs(budget_s);
        match (&result, over_budget) {
            (Ok(()), false) => println!("{id} {name}: PASS ({:.1} s)", elapsed.as_secs_f64()),
            (Ok(()), true) => {
                println!(
                    "{id} {name}: FAIL (passed checks but took {:.1} s > {budget_s} s budget)",
                    elapsed.as_secs_f64()
                );
                failures.push(format!("{id} exceeded budget"));
            }
            (Err(msg), _) => {
                println!("{id} {name}: FAIL ({msg})");
                failures.push(format!("{id}: {msg}"));
            }
        }
    }
    assert!(failures.is_empty(), "acceptance failures: {failures:#?}");
}
