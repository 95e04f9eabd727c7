//! Primitive differentiable ops. Backward rules capture forward values by
//! clone; shapes are asserted at construction.

use ndarray::{concatenate, Array2, ArrayD, Axis, IxDyn, Slice};

use super::{Tape, V};

impl Tape {
    fn val(&self, v: V) -> ArrayD<f64> {
        self.value(v)
    }

    // ---- elementwise binary ----

    pub fn add(&self, a: V, b: V) -> V {
        let (va, vb) = (self.val(a), self.val(b));
        assert_eq!(va.shape(), vb.shape(), "add shape mismatch");
        let out = &va + &vb;
        self.push(
            out,
            vec![a.0, b.0],
            Some(Box::new(move |g| vec![g.clone(), g.clone()])),
        )
    }

    pub fn sub(&self, a: V, b: V) -> V {
        let (va, vb) = (self.val(a), self.val(b));
        assert_eq!(va.shape(), vb.shape(), "sub shape mismatch");
        let out = &va - &vb;
        self.push(
            out,
            vec![a.0, b.0],
            Some(Box::new(move |g| vec![g.clone(), -g])),
        )
    }

    pub fn mul(&self, a: V, b: V) -> V {
        let (va, vb) = (self.val(a), self.val(b));
        assert_eq!(va.shape(), vb.shape(), "mul shape mismatch");
        let out = &va * &vb;
        self.push(
            out,
            vec![a.0, b.0],
            Some(Box::new(move |g| vec![g * &vb, g * &va])),
        )
    }

    // ---- scalar ----

    pub fn scale(&self, a: V, c: f64) -> V {
        let out = self.val(a) * c;
        self.push(out, vec![a.0], Some(Box::new(move |g| vec![g * c])))
    }

    pub fn add_scalar(&self, a: V, c: f64) -> V {
        let out = self.val(a) + c;
        self.push(out, vec![a.0], Some(Box::new(move |g| vec![g.clone()])))
    }

    pub fn neg(&self, a: V) -> V {
        self.scale(a, -1.0)
    }

    /// Elementwise power with real exponent; input must stay in the domain.
    pub fn powf(&self, a: V, p: f64) -> V {
        let va = self.val(a);
        let out = va.mapv(|x| x.powf(p));
        self.push(
            out,
            vec![a.0],
            Some(Box::new(move |g| vec![g * &va.mapv(|x| p * x.powf(p - 1.0))])),
        )
    }

    // ---- elementwise unary ----

    pub fn exp(&self, a: V) -> V {
        let out = self.val(a).mapv(f64::exp);
        let out_c = out.clone();
        self.push(out, vec![a.0], Some(Box::new(move |g| vec![g * &out_c])))
    }

    pub fn ln(&self, a: V) -> V {
        let va = self.val(a);
        let out = va.mapv(f64::ln);
        self.push(
            out,
            vec![a.0],
            Some(Box::new(move |g| vec![g * &va.mapv(|x| 1.0 / x)])),
        )
    }

    pub fn tanh(&self, a: V) -> V {
        let out = self.val(a).mapv(f64::tanh);
        let out_c = out.clone();
        self.push(
            out,
            vec![a.0],
            Some(Box::new(move |g| vec![g * &out_c.mapv(|y| 1.0 - y * y)])),
        )
    }

    /// Numerically stable softplus `ln(1 + e^x)`; derivative is the sigmoid.
    pub fn softplus(&self, a: V) -> V {
        let va = self.val(a);
        let out = va.mapv(|x| x.max(0.0) + (-x.abs()).exp().ln_1p());
        self.push(
            out,
            vec![a.0],
            Some(Box::new(move |g| {
                vec![g * &va.mapv(|x| 1.0 / (1.0 + (-x).exp()))]
            })),
        )
    }

    /// Absolute value; subgradient 0 at the origin.
    pub fn abs(&self, a: V) -> V {
        let va = self.val(a);
        let out = va.mapv(f64::abs);
        self.push(
            out,
            vec![a.0],
            Some(Box::new(move |g| {
                vec![g * &va.mapv(|x| {
                    if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })]
            })),
        )
    }

    pub fn square(&self, a: V) -> V {
        self.mul(a, a)
    }

    /// Elementwise Huber penalty: quadratic within `delta`, linear outside.
    /// C1 everywhere (derivative is the residual clamped to [-delta, delta]).
    pub fn huber(&self, a: V, delta: f64) -> V {
        assert!(delta > 0.0);
        let va = self.val(a);
        let out = va.mapv(|x| {
            if x.abs() <= delta {
                0.5 * x * x
            } else {
                delta * (x.abs() - 0.5 * delta)
            }
        });
        self.push(
            out,
            vec![a.0],
            Some(Box::new(move |g| {
                vec![g * &va.mapv(|x| x.clamp(-delta, delta))]
            })),
        )
    }

    // ---- reductions / broadcast ----

    pub fn sum_all(&self, a: V) -> V {
        let va = self.val(a);
        let shape = va.shape().to_vec();
        let out = ArrayD::from_elem(IxDyn(&[]), va.sum());
        self.push(
            out,
            vec![a.0],
            Some(Box::new(move |g| {
                let gs = *g.iter().next().expect("scalar grad");
                vec![ArrayD::from_elem(IxDyn(&shape), gs)]
            })),
        )
    }

    pub fn mean_all(&self, a: V) -> V {
        let n = self.val(a).len() as f64;
        let s = self.sum_all(a);
        self.scale(s, 1.0 / n)
    }

    /// Row means of a 2-D array: (T, d) -> (T, 1).
    pub fn row_mean(&self, a: V) -> V {
        let va = self.as2(a);
        let d = va.ncols() as f64;
        let out = va
            .mean_axis(Axis(1))
            .expect("row mean")
            .insert_axis(Axis(1));
        let cols = va.ncols();
        self.push(
            out.into_dyn(),
            vec![a.0],
            Some(Box::new(move |g| {
                let g2 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("grad dim");
                let mut gp = Array2::<f64>::zeros((g2.nrows(), cols));
                for (mut row, gv) in gp.rows_mut().into_iter().zip(g2.column(0)) {
                    row.fill(gv / d);
                }
                vec![gp.into_dyn()]
            })),
        )
    }

    /// Broadcast a (T, 1) column to (T, d).
    pub fn broadcast_col(&self, a: V, d: usize) -> V {
        let va = self.as2(a);
        assert_eq!(va.ncols(), 1, "broadcast_col expects a column");
        let out = va
            .broadcast((va.nrows(), d))
            .expect("broadcast")
            .to_owned();
        self.push(
            out.into_dyn(),
            vec![a.0],
            Some(Box::new(move |g| {
                let g2 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("grad dim");
                vec![g2.sum_axis(Axis(1)).insert_axis(Axis(1)).into_dyn()]
            })),
        )
    }

    /// Broadcast a (1, d) row to (T, d).
    pub fn broadcast_row(&self, a: V, t: usize) -> V {
        let va = self.as2(a);
        assert_eq!(va.nrows(), 1, "broadcast_row expects a row");
        let out = va.broadcast((t, va.ncols())).expect("broadcast").to_owned();
        self.push(
            out.into_dyn(),
            vec![a.0],
            Some(Box::new(move |g| {
                let g2 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("grad dim");
                vec![g2.sum_axis(Axis(0)).insert_axis(Axis(0)).into_dyn()]
            })),
        )
    }

    // ---- linear algebra ----

    pub fn matmul(&self, a: V, b: V) -> V {
        let va = self.as2(a);
        let vb = self.as2(b);
        assert_eq!(va.ncols(), vb.nrows(), "matmul inner dims");
        let out = va.dot(&vb);
        self.push(
            out.into_dyn(),
            vec![a.0, b.0],
            Some(Box::new(move |g| {
                let g2 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("grad dim");
                vec![
                    g2.dot(&vb.t()).into_dyn(),
                    va.t().dot(&g2).into_dyn(),
                ]
            })),
        )
    }

    pub fn transpose2(&self, a: V) -> V {
        let out = self.as2(a).t().to_owned();
        self.push(
            out.into_dyn(),
            vec![a.0],
            Some(Box::new(move |g| {
                let g2 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("grad dim");
                vec![g2.t().to_owned().into_dyn()]
            })),
        )
    }

    pub fn reshape(&self, a: V, shape: &[usize]) -> V {
        let va = self.val(a);
        let old_shape = va.shape().to_vec();
        let out = va
            .to_shape(IxDyn(shape))
            .expect("reshape size mismatch")
            .to_owned();
        self.push(
            out,
            vec![a.0],
            Some(Box::new(move |g| {
                vec![g
                    .to_shape(IxDyn(&old_shape))
                    .expect("reshape grad")
                    .to_owned()]
            })),
        )
    }

    /// Row-wise softmax of a 2-D array.
    pub fn softmax_rows(&self, a: V) -> V {
        let va = self.as2(a);
        let mut out = va.clone();
        for mut row in out.rows_mut() {
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            row.mapv_inplace(|x| (x - m).exp());
            let s = row.sum();
            row.mapv_inplace(|x| x / s);
        }
        let y = out.clone();
        self.push(
            out.into_dyn(),
            vec![a.0],
            Some(Box::new(move |g| {
                let g2 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("grad dim");
                let mut gp = Array2::<f64>::zeros(y.dim());
                for ((mut gr, yr), go) in
                    gp.rows_mut().into_iter().zip(y.rows()).zip(g2.rows())
                {
                    let dot: f64 = yr.iter().zip(go.iter()).map(|(yi, gi)| yi * gi).sum();
                    for ((gpi, yi), gi) in gr.iter_mut().zip(yr.iter()).zip(go.iter()) {
                        *gpi = yi * (gi - dot);
                    }
                }
                vec![gp.into_dyn()]
            })),
        )
    }

    // ---- structure ----

    /// Concatenate along axis 0.
    pub fn concat_ax0(&self, parts: &[V]) -> V {
        assert!(!parts.is_empty());
        let values: Vec<ArrayD<f64>> = parts.iter().map(|p| self.val(*p)).collect();
        let views: Vec<_> = values.iter().map(|v| v.view()).collect();
        let out = concatenate(Axis(0), &views).expect("concat_ax0");
        let sizes: Vec<usize> = values.iter().map(|v| v.shape()[0]).collect();
        self.push(
            out,
            parts.iter().map(|p| p.0).collect(),
            Some(Box::new(move |g| {
                let mut grads = Vec::with_capacity(sizes.len());
                let mut offset = 0;
                for s in &sizes {
                    grads.push(
                        g.slice_axis(Axis(0), Slice::from(offset..offset + s))
                            .to_owned(),
                    );
                    offset += s;
                }
                grads
            })),
        )
    }

    /// Slice `r0..r1` along axis 0; gradient scatters back into place.
    pub fn slice_ax0(&self, a: V, r0: usize, r1: usize) -> V {
        let va = self.val(a);
        let shape = va.shape().to_vec();
        assert!(r1 <= shape[0] && r0 <= r1, "slice_ax0 out of range");
        let out = va.slice_axis(Axis(0), Slice::from(r0..r1)).to_owned();
        self.push(
            out,
            vec![a.0],
            Some(Box::new(move |g| {
                let mut gp = ArrayD::<f64>::zeros(IxDyn(&shape));
                gp.slice_axis_mut(Axis(0), Slice::from(r0..r1)).assign(g);
                vec![gp]
            })),
        )
    }

    /// Slice `c0..c1` along axis 1 of a 2-D array (attention heads).
    pub fn slice_cols(&self, a: V, c0: usize, c1: usize) -> V {
        let va = self.as2(a);
        let (rows, cols) = va.dim();
        assert!(c1 <= cols && c0 <= c1, "slice_cols out of range");
        let out = va.slice(ndarray::s![.., c0..c1]).to_owned();
        self.push(
            out.into_dyn(),
            vec![a.0],
            Some(Box::new(move |g| {
                let g2 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("grad dim");
                let mut gp = Array2::<f64>::zeros((rows, cols));
                gp.slice_mut(ndarray::s![.., c0..c1]).assign(&g2);
                vec![gp.into_dyn()]
            })),
        )
    }

    /// Concatenate 2-D arrays along axis 1.
    pub fn concat_cols(&self, parts: &[V]) -> V {
        assert!(!parts.is_empty());
        let values: Vec<Array2<f64>> = parts.iter().map(|p| self.as2(*p)).collect();
        let views: Vec<_> = values.iter().map(|v| v.view()).collect();
        let out = concatenate(Axis(1), &views).expect("concat_cols");
        let sizes: Vec<usize> = values.iter().map(|v| v.ncols()).collect();
        self.push(
            out.into_dyn(),
            parts.iter().map(|p| p.0).collect(),
            Some(Box::new(move |g| {
                let g2 = g
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("grad dim");
                let mut grads = Vec::with_capacity(sizes.len());
                let mut offset = 0;
                for s in &sizes {
                    grads.push(g2.slice(ndarray::s![.., offset..offset + s]).to_owned().into_dyn());
                    offset += s;
                }
                grads
            })),
        )
    }

    /// Mean of several same-shaped values.
    pub fn mean_of(&self, parts: &[V]) -> V {
        assert!(!parts.is_empty());
        let mut acc = parts[0];
        for p in &parts[1..] {
            acc = self.add(acc, *p);
        }
        self.scale(acc, 1.0 / parts.len() as f64)
    }

    pub(crate) fn as2(&self, v: V) -> Array2<f64> {
        self.value(v)
            .into_dimensionality::<ndarray::Ix2>()
            .expect("expected 2-D value")
    }
}
