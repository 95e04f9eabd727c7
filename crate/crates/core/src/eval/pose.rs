//! Pose accuracy: pairwise relative-pose errors and area under the
//! accuracy-vs-threshold curve.

use crate::error::{CoreError, Result};
use crate::geometry::{compose_pose, PoseSE3};

const DEGENERATE_NORM: f64 = 1e-9;

/// Angle in degrees between two translation directions; 0 if either is too
/// short to define a direction.
pub fn translation_angle_deg(a: &nalgebra::Vector3<f64>, b: &nalgebra::Vector3<f64>) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na < DEGENERATE_NORM || nb < DEGENERATE_NORM {
        return 0.0;
    }
    let cos = (a.dot(b) / (na * nb)).clamp(-1.0, 1.0);
    cos.acos().to_degrees()
}

/// Rotation angle in degrees between two poses' rotations.
pub fn rotation_angle_deg(a: &PoseSE3, b: &PoseSE3) -> f64 {
    a.rotation_angle_to(b).to_degrees()
}

/// Per-pair error over all unordered pose pairs: for each pair (i, j), the
/// relative poses `a_i^-1 a_j` are compared between prediction and ground
/// truth, and the pair scores the max of rotation-angle and
/// translation-direction errors (degrees).
pub fn pairwise_pose_errors(pred: &[PoseSE3], gt: &[PoseSE3]) -> Result<Vec<f64>> {
    if pred.len() != gt.len() {
        return Err(CoreError::LengthMismatch {
            expected: gt.len(),
            got: pred.len(),
        });
    }
    let n = pred.len();
    let mut errors = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let rp = compose_pose(&pred[i].inverse(), &pred[j]);
            let rg = compose_pose(&gt[i].inverse(), &gt[j]);
            let rot = rotation_angle_deg(&rp, &rg);
            let trans = translation_angle_deg(&rp.translation(), &rg.translation());
            errors.push(rot.max(trans));
        }
    }
    Ok(errors)
}

/// AUC over integer thresholds: mean over tau in 1..=tau_max of the fraction
/// of errors strictly below tau degrees.
pub fn pose_auc(errors: &[f64], tau_max: usize) -> f64 {
    if errors.is_empty() || tau_max == 0 {
        return 0.0;
    }
    let n = errors.len() as f64;
    let mut acc = 0.0;
    for tau in 1..=tau_max {
        let hits = errors.iter().filter(|&&e| e < tau as f64).count() as f64;
        acc += hits / n;
    }
    acc / tau_max as f64
}
