//! Training losses: confidence-weighted depth (value + finite-difference
//! gradient matching, with a log-confidence regularizer) and Huber pose
//! losses over 10-D camera vectors. The total is a fixed weighted sum:
//! 0.1 * depth + 1.0 * relative-pose + 1.0 * sequence-pose.

use ndarray::Array2;

use crate::error::{CoreError, Result};
use crate::geometry::DepthMap;
use crate::model::heads::HeadOutputs;
use crate::tape::{Tape, V};

pub const DEPTH_WEIGHT: f64 = 0.1;
pub const REL_WEIGHT: f64 = 1.0;
pub const SEQ_WEIGHT: f64 = 1.0;
/// Huber transition point for pose residuals.
pub const POSE_HUBER_DELTA: f64 = 0.1;
/// Weight of the -log(confidence) term in the depth loss.
pub const CONF_ALPHA: f64 = 0.5;

/// Ground truth for one training window.
pub struct LossTargets {
    /// (N, 10) per-frame ego-motion camera vectors, relative to frame 0.
    pub seq_vecs: Array2<f64>,
    /// (M, 10) camera-to-rig camera vectors with normalized translations.
    pub rel_vecs: Array2<f64>,
    /// `depth[frame][camera]`, in the same (normalized) units the model
    /// predicts.
    pub depth: Vec<Vec<DepthMap>>,
}

/// Individual terms of one loss evaluation. All values are tape nodes so
/// `total` can drive a backward pass.
pub struct LossBreakdown {
    pub total: V,
    pub depth: V,
    pub rel: V,
    pub seq: V,
}

/// Huber pose loss: mean over rows of the summed per-slot Huber penalty.
pub fn pose_loss(t: &Tape, pred: V, target: &Array2<f64>) -> Result<V> {
    let shape = t.shape(pred);
    if shape != [target.nrows(), target.ncols()] {
        return Err(CoreError::LengthMismatch {
            expected: target.nrows(),
            got: shape[0],
        });
    }
    let rows = target.nrows() as f64;
    let resid = t.sub(pred, t.constant(target.clone().into_dyn()));
    Ok(t.scale(t.sum_all(t.huber(resid, POSE_HUBER_DELTA)), 1.0 / rows))
}

fn mask_array(target: &DepthMap) -> Array2<f64> {
    Array2::from_shape_fn(target.depth.dim(), |idx| {
        if target.mask[idx] {
            1.0
        } else {
            0.0
        }
    })
}

/// Confidence-weighted loss for one image:
///
/// mean over valid pixels of `conf * |d_pred - d_gt|`, plus the same over
/// valid forward-difference pairs of `conf * |grad d_pred - grad d_gt|`,
/// minus `CONF_ALPHA` times the mean valid log-confidence.
fn depth_loss_single(t: &Tape, pred: V, conf: V, target: &DepthMap) -> Result<V> {
    let (h, w) = target.depth.dim();
    let shape = t.shape(pred);
    if shape != [h, w] {
        return Err(CoreError::Shape(format!(
            "depth prediction {shape:?} vs target {h}x{w}"
        )));
    }
    let n_valid = target.valid_count();
    if n_valid == 0 {
        return Err(CoreError::NoValidPixels);
    }
    let mask = mask_array(target);
    let mask_v = t.constant(mask.clone().into_dyn());
    let gt = t.constant(target.depth.clone().into_dyn());

    let abs_diff = t.abs(t.sub(pred, gt));
    let value_term = t.scale(
        t.sum_all(t.mul(mask_v, t.mul(conf, abs_diff))),
        1.0 / n_valid as f64,
    );

    // Forward differences along x and y, weighted by the confidence at the
    // first pixel of each pair; a pair counts only if both pixels are valid.
    let mut grad_terms: Vec<V> = Vec::new();
    let mut pair = |p_a: V, p_b: V, g_a: Array2<f64>, g_b: Array2<f64>, m: Array2<f64>, c: V| {
        let n_pairs = m.sum();
        if n_pairs == 0.0 {
            return;
        }
        let dp = t.sub(p_b, p_a);
        let dg = t.constant((g_b - g_a).into_dyn());
        let m_v = t.constant(m.into_dyn());
        let term = t.mul(m_v, t.mul(c, t.abs(t.sub(dp, dg))));
        grad_terms.push(t.scale(t.sum_all(term), 1.0 / n_pairs));
    };
    if w > 1 {
        let m = &mask.slice(ndarray::s![.., ..w - 1]).to_owned()
            * &mask.slice(ndarray::s![.., 1..]).to_owned();
        pair(
            t.slice_cols(pred, 0, w - 1),
            t.slice_cols(pred, 1, w),
            target.depth.slice(ndarray::s![.., ..w - 1]).to_owned(),
            target.depth.slice(ndarray::s![.., 1..]).to_owned(),
            m,
            t.slice_cols(conf, 0, w - 1),
        );
    }
    if h > 1 {
        let m = &mask.slice(ndarray::s![..h - 1, ..]).to_owned()
            * &mask.slice(ndarray::s![1.., ..]).to_owned();
        pair(
            t.slice_ax0(pred, 0, h - 1),
            t.slice_ax0(pred, 1, h),
            target.depth.slice(ndarray::s![..h - 1, ..]).to_owned(),
            target.depth.slice(ndarray::s![1.., ..]).to_owned(),
            m,
            t.slice_ax0(conf, 0, h - 1),
        );
    }

    let conf_term = t.scale(
        t.sum_all(t.mul(t.constant(mask.into_dyn()), t.ln(conf))),
        -CONF_ALPHA / n_valid as f64,
    );

    let mut loss = t.add(value_term, conf_term);
    for g in grad_terms {
        loss = t.add(loss, g);
    }
    Ok(loss)
}

/// Depth loss summed over every (frame, camera) image.
pub fn depth_loss(t: &Tape, out: &HeadOutputs, targets: &[Vec<DepthMap>]) -> Result<V> {
    if out.depth.len() != targets.len() {
        return Err(CoreError::LengthMismatch {
            expected: targets.len(),
            got: out.depth.len(),
        });
    }
    let mut terms = Vec::new();
    for (preds, gts) in out.depth.iter().zip(targets) {
        if preds.len() != gts.len() {
            return Err(CoreError::LengthMismatch {
                expected: gts.len(),
                got: preds.len(),
            });
        }
        for (dc, gt) in preds.iter().zip(gts) {
            terms.push(depth_loss_single(t, dc.depth, dc.conf, gt)?);
        }
    }
    let mut total = terms[0];
    for term in &terms[1..] {
        total = t.add(total, *term);
    }
    Ok(total)
}

/// Weighted total loss over one training window.
pub fn total_loss(t: &Tape, out: &HeadOutputs, targets: &LossTargets) -> Result<LossBreakdown> {
    let depth = depth_loss(t, out, &targets.depth)?;
    let rel = pose_loss(t, out.rel_vecs, &targets.rel_vecs)?;
    let seq = pose_loss(t, out.seq_vecs, &targets.seq_vecs)?;
    let total = t.add(
        t.scale(depth, DEPTH_WEIGHT),
        t.add(t.scale(rel, REL_WEIGHT), t.scale(seq, SEQ_WEIGHT)),
    );
    let value = t.scalar(total);
    if !value.is_finite() {
        return Err(CoreError::NonFinite(format!("total loss = {value}")));
    }
    Ok(LossBreakdown {
        total,
        depth,
        rel,
        seq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::tests_common::check_scalar_grad;
    use ndarray::Array2;

    fn toy_target(h: usize, w: usize) -> DepthMap {
        DepthMap {
            depth: Array2::from_shape_fn((h, w), |(y, x)| 1.0 + 0.1 * (y * w + x) as f64),
            mask: Array2::from_shape_fn((h, w), |(y, x)| (y + x) % 5 != 0),
            confidence: None,
        }
    }

    #[test]
    fn pose_loss_zero_for_perfect_prediction() {
        let t = Tape::new();
        let target = Array2::from_shape_fn((3, 10), |(i, j)| (i * 10 + j) as f64 * 0.01);
        let pred = t.leaf2(target.clone());
        let loss = pose_loss(&t, pred, &target).unwrap();
        assert_eq!(t.scalar(loss), 0.0);
    }

    #[test]
    fn pose_loss_matches_hand_oracle() {
        // Residuals 0.05 (quadratic zone) and 0.3 (linear zone), one row.
        let t = Tape::new();
        let target = Array2::zeros((1, 10));
        let mut pred = Array2::zeros((1, 10));
        pred[(0, 0)] = 0.05;
        pred[(0, 1)] = -0.3;
        let loss = pose_loss(&t, t.leaf2(pred), &target).unwrap();
        let expected = 0.5 * 0.05f64 * 0.05 + 0.1 * (0.3 - 0.05);
        assert!((t.scalar(loss) - expected).abs() < 1e-12);
    }

    #[test]
    fn pose_loss_rejects_shape_mismatch() {
        let t = Tape::new();
        let pred = t.leaf2(Array2::zeros((2, 10)));
        assert!(pose_loss(&t, pred, &Array2::zeros((3, 10))).is_err());
    }

    #[test]
    fn depth_loss_on_perfect_prediction_is_pure_confidence_term() {
        // Prediction == target, conf == 1 everywhere: value and gradient
        // terms vanish and log(1) = 0, so the loss is exactly zero.
        let t = Tape::new();
        let target = toy_target(4, 5);
        let pred = t.leaf2(target.depth.clone());
        let conf = t.leaf2(Array2::ones((4, 5)));
        let loss = depth_loss_single(&t, pred, conf, &target).unwrap();
        assert!(t.scalar(loss).abs() < 1e-12);
    }

    #[test]
    fn depth_loss_confidence_term_oracle() {
        // Perfect depth, conf = e everywhere: loss = -alpha * 1.
        let t = Tape::new();
        let target = toy_target(3, 4);
        let pred = t.leaf2(target.depth.clone());
        let conf = t.leaf2(Array2::from_elem((3, 4), std::f64::consts::E));
        let loss = depth_loss_single(&t, pred, conf, &target).unwrap();
        assert!((t.scalar(loss) + CONF_ALPHA).abs() < 1e-12);
    }

    #[test]
    fn depth_loss_ignores_invalid_pixels() {
        // Corrupt the prediction only where the mask is false: no change.
        let target = toy_target(4, 6);
        let eval = |corrupt: bool| {
            let t = Tape::new();
            let mut d = target.depth.clone();
            if corrupt {
                for ((y, x), v) in d.indexed_iter_mut() {
                    if !target.mask[(y, x)] {
                        *v += 100.0;
                    }
                }
            }
            let loss = depth_loss_single(
                &t,
                t.leaf2(d),
                t.leaf2(Array2::from_elem((4, 6), 0.7)),
                &target,
            )
            .unwrap();
            t.scalar(loss)
        };
        // Invalid pixels influence nothing: neither the value term nor any
        // gradient pair that includes them.
        assert!((eval(false) - eval(true)).abs() < 1e-12);
    }

    #[test]
    fn depth_loss_errors_without_valid_pixels() {
        let t = Tape::new();
        let target = DepthMap {
            depth: Array2::zeros((2, 2)),
            mask: Array2::from_elem((2, 2), false),
            confidence: None,
        };
        let pred = t.leaf2(Array2::ones((2, 2)));
        let conf = t.leaf2(Array2::ones((2, 2)));
        assert!(matches!(
            depth_loss_single(&t, pred, conf, &target),
            Err(CoreError::NoValidPixels)
        ));
    }

    #[test]
    fn depth_loss_gradient_matches_finite_differences() {
        let target = toy_target(3, 4);
        // Gradient w.r.t. the predicted depth (softplus keeps it positive and
        // smooth so central differences are clean).
        check_scalar_grad(&[3, 4], 51, 1e-5, |t, x| {
            let pred = t.softplus(x);
            let conf = t.constant(Array2::from_elem((3, 4), 0.9).into_dyn());
            depth_loss_single(t, pred, conf, &target).unwrap()
        });
        // Gradient w.r.t. the confidence map.
        check_scalar_grad(&[3, 4], 52, 1e-5, |t, x| {
            let conf = t.add_scalar(t.softplus(x), 1e-3);
            let pred = t.constant((target.depth.clone() * 1.1).into_dyn());
            depth_loss_single(t, pred, conf, &target).unwrap()
        });
    }
}
