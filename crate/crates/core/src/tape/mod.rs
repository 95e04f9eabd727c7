//! Reverse-mode autodiff over f64 ndarrays.
//!
//! A [`Tape`] records a DAG of array operations; [`Tape::backward`] walks it
//! in reverse, accumulating gradients. Each op's backward rule is a closure
//! from the output gradient to per-parent gradient contributions, capturing
//! whatever forward values it needs by clone. Leaves that the loss never
//! touches get no gradient entry, so cross-branch gradients are exactly zero
//! rather than numerically small.
//!
//! Everything is f64 throughout so finite-difference checks can resolve
//! relative errors well below 1e-4.

mod conv;
mod ops;

use std::cell::RefCell;

use ndarray::{ArrayD, IxDyn};

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct V(pub(crate) usize);

type BackwardFn = Box<dyn Fn(&ArrayD<f64>) -> Vec<ArrayD<f64>>>;

struct Node {
    value: ArrayD<f64>,
    parents: Vec<usize>,
    backward: Option<BackwardFn>,
}

/// Records forward ops and replays them backward for gradients.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Insert a leaf (input or parameter) node.
    pub fn leaf(&self, value: ArrayD<f64>) -> V {
        self.push(value, Vec::new(), None)
    }

    /// Leaf from a 2-D array.
    pub fn leaf2(&self, value: ndarray::Array2<f64>) -> V {
        self.leaf(value.into_dyn())
    }

    /// Constant node: participates in the forward pass, receives no gradient.
    pub fn constant(&self, value: ArrayD<f64>) -> V {
        self.leaf(value)
    }

    pub(crate) fn push(
        &self,
        value: ArrayD<f64>,
        parents: Vec<usize>,
        backward: Option<BackwardFn>,
    ) -> V {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value,
            parents,
            backward,
        });
        V(nodes.len() - 1)
    }

    /// Forward value of a node (cloned).
    pub fn value(&self, v: V) -> ArrayD<f64> {
        self.nodes.borrow()[v.0].value.clone()
    }

    pub fn shape(&self, v: V) -> Vec<usize> {
        self.nodes.borrow()[v.0].value.shape().to_vec()
    }

    /// Scalar value of a 0-d or single-element node.
    pub fn scalar(&self, v: V) -> f64 {
        let nodes = self.nodes.borrow();
        let val = &nodes[v.0].value;
        debug_assert_eq!(val.len(), 1);
        *val.iter().next().expect("scalar node")
    }

    /// Reverse pass from a scalar root. Returns per-node gradients; nodes the
    /// root does not depend on have `None`.
    pub fn backward(&self, root: V) -> Gradients {
        let nodes = self.nodes.borrow();
        let mut grads: Vec<Option<ArrayD<f64>>> = vec![None; nodes.len()];
        grads[root.0] = Some(ArrayD::ones(IxDyn(nodes[root.0].value.shape())));
        for id in (0..=root.0).rev() {
            let Some(grad_out) = grads[id].take() else {
                continue;
            };
            let node = &nodes[id];
            if let Some(backward) = &node.backward {
                let parent_grads = backward(&grad_out);
                debug_assert_eq!(parent_grads.len(), node.parents.len());
                for (pid, g) in node.parents.iter().zip(parent_grads) {
                    match &mut grads[*pid] {
                        Some(acc) => *acc += &g,
                        slot => *slot = Some(g),
                    }
                }
            }
            grads[id] = Some(grad_out);
        }
        Gradients { grads }
    }
}

#[cfg(test)]
pub(crate) mod tests_common {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Central finite differences of scalar `f` at `x`, elementwise.
    pub fn finite_diff(f: &dyn Fn(&ArrayD<f64>) -> f64, x: &ArrayD<f64>, h: f64) -> ArrayD<f64> {
        let mut grad = ArrayD::zeros(x.raw_dim());
        for idx in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp.as_slice_mut().unwrap()[idx] += h;
            xm.as_slice_mut().unwrap()[idx] -= h;
            grad.as_slice_mut().unwrap()[idx] = (f(&xp) - f(&xm)) / (2.0 * h);
        }
        grad
    }

    /// Check the tape gradient of a scalar-valued builder against central
    /// finite differences on a random input of the given shape.
    pub fn check_scalar_grad(
        shape: &[usize],
        seed: u64,
        tol: f64,
        build: impl Fn(&Tape, V) -> V,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ArrayD::from_shape_fn(IxDyn(shape), |_| rng.gen::<f64>() * 2.0 - 1.0);
        let tape = Tape::new();
        let xv = tape.leaf(x.clone());
        let y = build(&tape, xv);
        assert!(tape.shape(y).is_empty(), "builder must produce a scalar");
        let grads = tape.backward(y);
        let analytic = grads.get_or_zeros(xv, shape);

        let numeric = finite_diff(
            &|xi: &ArrayD<f64>| {
                let t = Tape::new();
                let v = t.leaf(xi.clone());
                t.scalar(build(&t, v))
            },
            &x,
            1e-6,
        );
        for (a, n) in analytic.iter().zip(numeric.iter()) {
            // Floor shields true-zero gradients from finite-difference noise.
            let denom = a.abs().max(n.abs()).max(1e-4);
            assert!(
                (a - n).abs() / denom < tol,
                "gradient mismatch: analytic {a}, numeric {n}"
            );
        }
    }
}

/// Result of a backward pass.
pub struct Gradients {
    grads: Vec<Option<ArrayD<f64>>>,
}

impl Gradients {
    /// Gradient of the root w.r.t. `v`; `None` if the root does not depend on it.
    pub fn get(&self, v: V) -> Option<&ArrayD<f64>> {
        self.grads[v.0].as_ref()
    }

    /// Gradient of the root w.r.t. `v`, zeros if independent.
    pub fn get_or_zeros(&self, v: V, shape: &[usize]) -> ArrayD<f64> {
        self.grads[v.0]
            .clone()
            .unwrap_or_else(|| ArrayD::zeros(IxDyn(shape)))
    }
}
