use nalgebra::Vector3;

use crate::error::{CoreError, Result};

/// Predicted translations with norm at or below this are excluded.
const MIN_PRED_NORM: f64 = 1e-9;

/// Metric scale from real vs predicted-normalized rig translations:
/// the mean over cameras of `|t_real| / |t_pred_norm|`.
///
/// Cameras whose predicted translation norm underflows are skipped; if none
/// remain the scale is undefined.
pub fn estimate_scale(t_real: &[Vector3<f64>], t_pred_norm: &[Vector3<f64>]) -> Result<f64> {
    if t_real.len() != t_pred_norm.len() {
        return Err(CoreError::LengthMismatch {
            expected: t_real.len(),
            got: t_pred_norm.len(),
        });
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (real, pred) in t_real.iter().zip(t_pred_norm) {
        let pn = pred.norm();
        if pn <= MIN_PRED_NORM {
            continue;
        }
        sum += real.norm() / pn;
        count += 1;
    }
    if count == 0 {
        return Err(CoreError::NoValidCameras);
    }
    Ok(sum / count as f64)
}
