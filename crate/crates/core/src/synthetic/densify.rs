use crate::geometry::DepthMap;

/// Fill invalid pixels from the nearest valid pixel inside a k x k window.
///
/// Distance is Euclidean in pixel space; ties take the smallest depth.
/// Valid pixels are never altered and all reads come from the input, so one
/// call is a single dilation step, not an iterative flood fill.
pub fn densify_depth(sparse: &DepthMap, kernel: usize) -> DepthMap {
    assert!(kernel >= 1 && kernel % 2 == 1, "kernel must be odd and >= 1");
    let r = (kernel / 2) as isize;
    let (h, w) = (sparse.height() as isize, sparse.width() as isize);
    let mut out = sparse.clone();
    for y in 0..h {
        for x in 0..w {
            if sparse.mask[(y as usize, x as usize)] {
                continue;
            }
            let mut best: Option<(f64, f64)> = None; // (dist2, depth)
            for dy in -r..=r {
                let sy = y + dy;
                if sy < 0 || sy >= h {
                    continue;
                }
                for dx in -r..=r {
                    let sx = x + dx;
                    if sx < 0 || sx >= w {
                        continue;
                    }
                    if !sparse.mask[(sy as usize, sx as usize)] {
                        continue;
                    }
                    let dist2 = (dy * dy + dx * dx) as f64;
                    let depth = sparse.depth[(sy as usize, sx as usize)];
                    let better = match best {
                        None => true,
                        Some((bd2, bdep)) => {
                            dist2 < bd2 || (dist2 == bd2 && depth < bdep)
                        }
                    };
                    if better {
                        best = Some((dist2, depth));
                    }
                }
            }
            if let Some((_, depth)) = best {
                out.depth[(y as usize, x as usize)] = depth;
                out.mask[(y as usize, x as usize)] = true;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn fully_valid_input_unchanged() {
        let dm = DepthMap {
            depth: Array2::from_shape_fn((4, 5), |(y, x)| 1.0 + (y * 5 + x) as f64),
            mask: Array2::from_elem((4, 5), true),
            confidence: None,
        };
        let out = densify_depth(&dm, 3);
        assert_eq!(out.depth, dm.depth);
        assert_eq!(out.mask, dm.mask);
    }

    #[test]
    fn single_seed_fills_eight_neighbors() {
        let mut dm = DepthMap::invalid(5, 5);
        dm.depth[(2, 2)] = 3.5;
        dm.mask[(2, 2)] = true;
        let out = densify_depth(&dm, 3);
        for y in 0..5 {
            for x in 0..5 {
                let near = (y as isize - 2).abs() <= 1 && (x as isize - 2).abs() <= 1;
                assert_eq!(out.mask[(y, x)], near, "pixel ({x},{y})");
                if near {
                    assert_eq!(out.depth[(y, x)], 3.5);
                }
            }
        }
    }

    #[test]
    fn checkerboard_plane_becomes_dense() {
        let mut dm = DepthMap::invalid(6, 8);
        for y in 0..6 {
            for x in 0..8 {
                if (y + x) % 2 == 0 {
                    dm.depth[(y, x)] = 7.0;
                    dm.mask[(y, x)] = true;
                }
            }
        }
        let out = densify_depth(&dm, 3);
        // Constant-depth oracle: a checkerboard of one depth must densify to
        // that depth everywhere.
        for y in 0..6 {
            for x in 0..8 {
                assert!(out.mask[(y, x)]);
                assert_eq!(out.depth[(y, x)], 7.0);
            }
        }
    }

    #[test]
    fn valid_pixels_never_altered() {
        let mut dm = DepthMap::invalid(4, 4);
        dm.depth[(1, 1)] = 2.0;
        dm.mask[(1, 1)] = true;
        dm.depth[(1, 2)] = 9.0;
        dm.mask[(1, 2)] = true;
        let out = densify_depth(&dm, 5);
        assert_eq!(out.depth[(1, 1)], 2.0);
        assert_eq!(out.depth[(1, 2)], 9.0);
        // Output validity is a superset of input validity.
        for y in 0..4 {
            for x in 0..4 {
                if dm.mask[(y, x)] {
                    assert!(out.mask[(y, x)]);
                }
            }
        }
    }

    #[test]
    fn tie_takes_smallest_depth() {
        let mut dm = DepthMap::invalid(1, 3);
        dm.depth[(0, 0)] = 5.0;
        dm.mask[(0, 0)] = true;
        dm.depth[(0, 2)] = 3.0;
        dm.mask[(0, 2)] = true;
        let out = densify_depth(&dm, 3);
        assert_eq!(out.depth[(0, 1)], 3.0);
    }
}
