//! Spatial ops on (C, H, W) arrays: same-padded conv, nearest upsampling and
//! bilinear resize. Loop implementations; the feature maps here are tiny.

use ndarray::{Array1, Array3, ArrayD};

use super::{Tape, V};

fn as3(v: &ArrayD<f64>) -> Array3<f64> {
    v.clone()
        .into_dimensionality::<ndarray::Ix3>()
        .expect("expected (C, H, W) value")
}

impl Tape {
    /// 2-D convolution with odd kernel and same padding.
    ///
    /// `input` is (Cin, H, W), `weight` (Cout, Cin, k, k), `bias` (Cout).
    pub fn conv2d(&self, input: V, weight: V, bias: V) -> V {
        let x = as3(&self.value(input));
        let w = self
            .value(weight)
            .into_dimensionality::<ndarray::Ix4>()
            .expect("conv weight (Cout, Cin, k, k)");
        let b = self
            .value(bias)
            .into_dimensionality::<ndarray::Ix1>()
            .expect("conv bias (Cout,)");
        let (cin, h, wd) = x.dim();
        let (cout, cin_w, k, k2) = w.dim();
        assert_eq!(cin, cin_w, "conv channel mismatch");
        assert_eq!(k, k2, "square kernels only");
        assert_eq!(k % 2, 1, "odd kernels only");
        let p = (k / 2) as isize;

        let mut out = Array3::<f64>::zeros((cout, h, wd));
        for o in 0..cout {
            for y in 0..h {
                for xx in 0..wd {
                    let mut acc = b[o];
                    for c in 0..cin {
                        for dy in 0..k {
                            let sy = y as isize + dy as isize - p;
                            if sy < 0 || sy >= h as isize {
                                continue;
                            }
                            for dx in 0..k {
                                let sx = xx as isize + dx as isize - p;
                                if sx < 0 || sx >= wd as isize {
                                    continue;
                                }
                                acc += w[(o, c, dy, dx)] * x[(c, sy as usize, sx as usize)];
                            }
                        }
                    }
                    out[(o, y, xx)] = acc;
                }
            }
        }

        let (x_c, w_c) = (x.clone(), w.clone());
        self.push(
            out.into_dyn(),
            vec![input.0, weight.0, bias.0],
            Some(Box::new(move |g| {
                let g3 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix3>()
                    .expect("conv grad");
                let mut gx = Array3::<f64>::zeros(x_c.dim());
                let mut gw = ndarray::Array4::<f64>::zeros(w_c.dim());
                let mut gb = Array1::<f64>::zeros(cout);
                for o in 0..cout {
                    for y in 0..h {
                        for xx in 0..wd {
                            let gv = g3[(o, y, xx)];
                            if gv == 0.0 {
                                continue;
                            }
                            gb[o] += gv;
                            for c in 0..cin {
                                for dy in 0..k {
                                    let sy = y as isize + dy as isize - p;
                                    if sy < 0 || sy >= h as isize {
                                        continue;
                                    }
                                    for dx in 0..k {
                                        let sx = xx as isize + dx as isize - p;
                                        if sx < 0 || sx >= wd as isize {
                                            continue;
                                        }
                                        let (sy, sx) = (sy as usize, sx as usize);
                                        gx[(c, sy, sx)] += gv * w_c[(o, c, dy, dx)];
                                        gw[(o, c, dy, dx)] += gv * x_c[(c, sy, sx)];
                                    }
                                }
                            }
                        }
                    }
                }
                vec![gx.into_dyn(), gw.into_dyn(), gb.into_dyn()]
            })),
        )
    }

    /// Nearest-neighbor x2 upsampling of a (C, H, W) array.
    pub fn upsample2(&self, input: V) -> V {
        let x = as3(&self.value(input));
        let (c, h, w) = x.dim();
        let mut out = Array3::<f64>::zeros((c, h * 2, w * 2));
        for ci in 0..c {
            for y in 0..h * 2 {
                for xx in 0..w * 2 {
                    out[(ci, y, xx)] = x[(ci, y / 2, xx / 2)];
                }
            }
        }
        self.push(
            out.into_dyn(),
            vec![input.0],
            Some(Box::new(move |g| {
                let g3 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix3>()
                    .expect("upsample grad");
                let mut gx = Array3::<f64>::zeros((c, h, w));
                for ci in 0..c {
                    for y in 0..h * 2 {
                        for xx in 0..w * 2 {
                            gx[(ci, y / 2, xx / 2)] += g3[(ci, y, xx)];
                        }
                    }
                }
                vec![gx.into_dyn()]
            })),
        )
    }

    /// Bilinear resize of a (C, H, W) array to (C, h2, w2).
    pub fn resize_bilinear(&self, input: V, h2: usize, w2: usize) -> V {
        let x = as3(&self.value(input));
        let (c, h, w) = x.dim();
        // Pixel-center sampling grid.
        let taps = |size_in: usize, size_out: usize| -> Vec<(usize, usize, f64)> {
            (0..size_out)
                .map(|o| {
                    let s = ((o as f64 + 0.5) * size_in as f64 / size_out as f64 - 0.5)
                        .clamp(0.0, size_in as f64 - 1.0);
                    let lo = s.floor() as usize;
                    let hi = (lo + 1).min(size_in - 1);
                    (lo, hi, s - lo as f64)
                })
                .collect()
        };
        let ty = taps(h, h2);
        let tx = taps(w, w2);

        let mut out = Array3::<f64>::zeros((c, h2, w2));
        for ci in 0..c {
            for (y, &(y0, y1, fy)) in ty.iter().enumerate() {
                for (xx, &(x0, x1, fx)) in tx.iter().enumerate() {
                    out[(ci, y, xx)] = (1.0 - fy) * (1.0 - fx) * x[(ci, y0, x0)]
                        + (1.0 - fy) * fx * x[(ci, y0, x1)]
                        + fy * (1.0 - fx) * x[(ci, y1, x0)]
                        + fy * fx * x[(ci, y1, x1)];
                }
            }
        }
        self.push(
            out.into_dyn(),
            vec![input.0],
            Some(Box::new(move |g| {
                let g3 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix3>()
                    .expect("resize grad");
                let mut gx = Array3::<f64>::zeros((c, h, w));
                for ci in 0..c {
                    for (y, &(y0, y1, fy)) in ty.iter().enumerate() {
                        for (xx, &(x0, x1, fx)) in tx.iter().enumerate() {
                            let gv = g3[(ci, y, xx)];
                            gx[(ci, y0, x0)] += gv * (1.0 - fy) * (1.0 - fx);
                            gx[(ci, y0, x1)] += gv * (1.0 - fy) * fx;
                            gx[(ci, y1, x0)] += gv * fy * (1.0 - fx);
                            gx[(ci, y1, x1)] += gv * fy * fx;
                        }
                    }
                }
                vec![gx.into_dyn()]
            })),
        )
    }

    /// Split an (H, W, C) image into non-overlapping p x p patches and
    /// flatten each to a row: output (P, p*p*C) with patches in row-major
    /// grid order and (dy, dx, c) order within a row.
    pub fn extract_patches(&self, input: V, p: usize) -> V {
        let x = self
            .value(input)
            .into_dimensionality::<ndarray::Ix3>()
            .expect("expected (H, W, C) image");
        let (h, w, c) = x.dim();
        assert!(
            h % p == 0 && w % p == 0,
            "image {h}x{w} not divisible by patch {p}"
        );
        let (gh, gw) = (h / p, w / p);
        let mut out = ndarray::Array2::<f64>::zeros((gh * gw, p * p * c));
        for gy in 0..gh {
            for gx in 0..gw {
                let row = gy * gw + gx;
                let mut col = 0;
                for dy in 0..p {
                    for dx in 0..p {
                        for ci in 0..c {
                            out[(row, col)] = x[(gy * p + dy, gx * p + dx, ci)];
                            col += 1;
                        }
                    }
                }
            }
        }
        self.push(
            out.into_dyn(),
            vec![input.0],
            Some(Box::new(move |g| {
                let g2 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("patch grad");
                let mut gx = Array3::<f64>::zeros((h, w, c));
                for gy in 0..gh {
                    for gxx in 0..gw {
                        let row = gy * gw + gxx;
                        let mut col = 0;
                        for dy in 0..p {
                            for dx in 0..p {
                                for ci in 0..c {
                                    gx[(gy * p + dy, gxx * p + dx, ci)] = g2[(row, col)];
                                    col += 1;
                                }
                            }
                        }
                    }
                }
                vec![gx.into_dyn()]
            })),
        )
    }
}
