//! Transformer building blocks expressed as tape composites: layer norm,
//! GELU, linear layers and a pre-norm multi-head attention block with an
//! optional additive attention-score mask.

use ndarray::Array2;

use crate::model::params::TapeParams;
use crate::tape::{Tape, V};

const LN_EPS: f64 = 1e-5;

/// Row-wise layer normalization of a (T, d) value, with learned gain/bias.
pub fn layer_norm(t: &Tape, x: V, gamma: V, beta: V) -> V {
    let shape = t.shape(x);
    let (rows, d) = (shape[0], shape[1]);
    let mean = t.row_mean(x);
    let centered = t.sub(x, t.broadcast_col(mean, d));
    let var = t.row_mean(t.square(centered));
    let inv_std = t.powf(t.add_scalar(var, LN_EPS), -0.5);
    let normed = t.mul(centered, t.broadcast_col(inv_std, d));
    t.add(
        t.mul(normed, t.broadcast_row(gamma, rows)),
        t.broadcast_row(beta, rows),
    )
}

/// Smooth GELU (tanh approximation); smoothness keeps finite-difference
/// gradient checks clean.
pub fn gelu(t: &Tape, x: V) -> V {
    let inner = t.scale(
        t.add(x, t.scale(t.mul(x, t.square(x)), 0.044715)),
        (2.0 / std::f64::consts::PI).sqrt(),
    );
    t.scale(t.mul(x, t.add_scalar(t.tanh(inner), 1.0)), 0.5)
}

/// x @ w + b with a (1, d_out) bias row.
pub fn linear(t: &Tape, x: V, w: V, b: V) -> V {
    let rows = t.shape(x)[0];
    t.add(t.matmul(x, w), t.broadcast_row(b, rows))
}

/// Two-layer MLP head `w2(gelu(w1 x + b1)) + b2` using the parameter prefix
/// convention `{prefix}.{w1,b1,w2,b2}`.
pub fn mlp_head(t: &Tape, p: &TapeParams, prefix: &str, x: V) -> V {
    let h = gelu(
        t,
        linear(t, x, p.get(&format!("{prefix}.w1")), p.get(&format!("{prefix}.b1"))),
    );
    linear(t, h, p.get(&format!("{prefix}.w2")), p.get(&format!("{prefix}.b2")))
}

/// Multi-head self-attention over a (T, d) value. `mask`, if given, is a
/// (T, T) additive score matrix (0 for allowed pairs, a large negative value
/// for blocked ones) applied before the softmax.
pub fn multi_head_attention(
    t: &Tape,
    p: &TapeParams,
    prefix: &str,
    x: V,
    num_heads: usize,
    mask: Option<&Array2<f64>>,
) -> V {
    let d = t.shape(x)[1];
    assert!(num_heads > 0 && d % num_heads == 0, "bad head count");
    let q = linear(t, x, p.get(&format!("{prefix}.wq")), p.get(&format!("{prefix}.bq")));
    let k = linear(t, x, p.get(&format!("{prefix}.wk")), p.get(&format!("{prefix}.bk")));
    let v = linear(t, x, p.get(&format!("{prefix}.wv")), p.get(&format!("{prefix}.bv")));

    let dh = d / num_heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mask_v = mask.map(|m| t.constant(m.clone().into_dyn()));
    let mut outs = Vec::with_capacity(num_heads);
    for h in 0..num_heads {
        let (c0, c1) = (h * dh, (h + 1) * dh);
        let qh = t.slice_cols(q, c0, c1);
        let kh = t.slice_cols(k, c0, c1);
        let vh = t.slice_cols(v, c0, c1);
        let mut scores = t.scale(t.matmul(qh, t.transpose2(kh)), scale);
        if let Some(m) = mask_v {
            scores = t.add(scores, m);
        }
        let attn = t.softmax_rows(scores);
        outs.push(t.matmul(attn, vh));
    }
    let concat = t.concat_cols(&outs);
    linear(t, concat, p.get(&format!("{prefix}.wo")), p.get(&format!("{prefix}.bo")))
}

/// Pre-norm transformer block: attention and MLP sublayers, each with a
/// residual connection, parameters under `{prefix}.{ln1,attn,ln2,mlp}`.
pub fn transformer_block(
    t: &Tape,
    p: &TapeParams,
    prefix: &str,
    x: V,
    num_heads: usize,
    mask: Option<&Array2<f64>>,
) -> V {
    let h = layer_norm(
        t,
        x,
        p.get(&format!("{prefix}.ln1.g")),
        p.get(&format!("{prefix}.ln1.b")),
    );
    let attn = multi_head_attention(t, p, &format!("{prefix}.attn"), h, num_heads, mask);
    let x = t.add(x, attn);
    let h = layer_norm(
        t,
        x,
        p.get(&format!("{prefix}.ln2.g")),
        p.get(&format!("{prefix}.ln2.b")),
    );
    let h = gelu(
        t,
        linear(t, h, p.get(&format!("{prefix}.mlp.w1")), p.get(&format!("{prefix}.mlp.b1"))),
    );
    let h = linear(t, h, p.get(&format!("{prefix}.mlp.w2")), p.get(&format!("{prefix}.mlp.b2")));
    t.add(x, h)
}
