//! Depth accuracy after global scale alignment: absolute relative error and
//! the delta < 1.25^3 inlier ratio.

use ndarray::Array2;

use crate::error::{CoreError, Result};
use crate::geometry::DepthMap;

pub const DELTA_THRESHOLD: f64 = 1.25 * 1.25 * 1.25;

/// Closed-form least-squares scale `s* = sum(pred * gt) / sum(pred^2)` over
/// valid pixels of all images, minimizing `|s * pred - gt|^2`.
pub fn least_squares_scale(preds: &[&Array2<f64>], gts: &[&DepthMap]) -> Result<f64> {
    if preds.len() != gts.len() {
        return Err(CoreError::LengthMismatch {
            expected: gts.len(),
            got: preds.len(),
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (pred, gt) in preds.iter().zip(gts) {
        for ((y, x), &d) in gt.depth.indexed_iter() {
            if gt.mask[(y, x)] {
                let p = pred[(y, x)];
                num += p * d;
                den += p * p;
            }
        }
    }
    if den <= 0.0 {
        return Err(CoreError::NoValidPixels);
    }
    Ok(num / den)
}

/// Pooled depth metrics after multiplying predictions by `scale`.
pub fn depth_metrics(preds: &[&Array2<f64>], gts: &[&DepthMap], scale: f64) -> Result<(f64, f64)> {
    if preds.len() != gts.len() {
        return Err(CoreError::LengthMismatch {
            expected: gts.len(),
            got: preds.len(),
        });
    }
    let mut abs_rel = 0.0;
    let mut inliers = 0usize;
    let mut count = 0usize;
    for (pred, gt) in preds.iter().zip(gts) {
        for ((y, x), &d) in gt.depth.indexed_iter() {
            if !gt.mask[(y, x)] || d <= 0.0 {
                continue;
            }
            let p = scale * pred[(y, x)];
            abs_rel += (p - d).abs() / d;
            let ratio = (p / d).max(d / p.max(1e-300));
            if ratio < DELTA_THRESHOLD {
                inliers += 1;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(CoreError::NoValidPixels);
    }
    Ok((abs_rel / count as f64, inliers as f64 / count as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt_map() -> DepthMap {
        DepthMap {
            depth: Array2::from_shape_fn((3, 4), |(y, x)| 2.0 + (y * 4 + x) as f64 * 0.5),
            mask: Array2::from_shape_fn((3, 4), |(y, x)| !(y == 0 && x == 0)),
            confidence: None,
        }
    }

    #[test]
    fn perfect_prediction_scores_perfectly() {
        let gt = gt_map();
        let pred = gt.depth.clone();
        let s = least_squares_scale(&[&pred], &[&gt]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        let (abs_rel, d3) = depth_metrics(&[&pred], &[&gt], s).unwrap();
        assert_eq!(abs_rel, 0.0);
        assert_eq!(d3, 1.0);
    }

    #[test]
    fn scale_is_recovered_exactly() {
        // Prediction is ground truth divided by 7: the fit returns 7.
        let gt = gt_map();
        let pred = gt.depth.mapv(|d| d / 7.0);
        let s = least_squares_scale(&[&pred], &[&gt]).unwrap();
        assert!((s - 7.0).abs() < 1e-12);
        let (abs_rel, _) = depth_metrics(&[&pred], &[&gt], s).unwrap();
        assert!(abs_rel < 1e-12);
    }

    #[test]
    fn least_squares_matches_quadratic_oracle() {
        // Perturbed prediction: compare against a brute-force scan of the
        // 1-D quadratic objective.
        let gt = gt_map();
        let pred = gt.depth.mapv(|d| 0.5 * d + 0.3);
        let s = least_squares_scale(&[&pred], &[&gt]).unwrap();
        let objective = |s: f64| -> f64 {
            gt.depth
                .indexed_iter()
                .filter(|((y, x), _)| gt.mask[(*y, *x)])
                .map(|((y, x), &d)| (s * pred[(y, x)] - d).powi(2))
                .sum()
        };
        let eps = 1e-6;
        assert!(objective(s) <= objective(s + eps));
        assert!(objective(s) <= objective(s - eps));
    }

    #[test]
    fn delta_counts_outliers() {
        let gt = DepthMap {
            depth: Array2::from_elem((1, 2), 1.0),
            mask: Array2::from_elem((1, 2), true),
            confidence: None,
        };
        let mut pred = Array2::from_elem((1, 2), 1.0);
        pred[(0, 1)] = 3.0; // ratio 3 > 1.25^3
        let (_, d3) = depth_metrics(&[&pred], &[&gt], 1.0).unwrap();
        assert_eq!(d3, 0.5);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let gt = DepthMap::invalid(2, 2);
        let pred = Array2::ones((2, 2));
        assert!(matches!(
            least_squares_scale(&[&pred], &[&gt]),
            Err(CoreError::NoValidPixels)
        ));
    }
}
