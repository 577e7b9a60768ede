//! Classical layers with hand-written backward passes. Activations are kept
//! as `rows × features` matrices with one row per (batch, position).

use ndarray::{Array1, Array2, Array3, ArrayView2, ArrayView3, Axis};

const LN_EPS: f64 = 1e-5;

/// `x·W + b` with `b` stored as `1×n`.
pub fn affine(x: ArrayView2<f64>, w: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    x.dot(&w) + b
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

/// GELU, tanh approximation.
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + 0.044715 * x.powi(3))).tanh())
}

pub fn gelu_grad(x: f64) -> f64 {
    let u = GELU_C * (x + 0.044715 * x.powi(3));
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
}

/// Values kept by [`layer_norm`] for the backward pass.
#[derive(Debug, Clone)]
pub struct LnCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

/// Row-wise layer normalisation with gain `g` and bias `b` (both `1×n`).
pub fn layer_norm(x: ArrayView2<f64>, g: ArrayView2<f64>, b: ArrayView2<f64>) -> (Array2<f64>, LnCache) {
    let n = x.ncols() as f64;
    let mean = x.mean_axis(Axis(1)).expect("non-empty rows");
    let centered = &x - &mean.view().insert_axis(Axis(1));
    let var = centered.mapv(|v| v * v).sum_axis(Axis(1)) / n;
    let inv_std = var.mapv(|v| 1.0 / (v + LN_EPS).sqrt());
    let xhat = centered * inv_std.view().insert_axis(Axis(1));
    let y = &xhat * &g + b;
    (y, LnCache { xhat, inv_std })
}

/// Returns `(dx, dg, db)`.
pub fn layer_norm_backward(
    dy: ArrayView2<f64>,
    g: ArrayView2<f64>,
    cache: &LnCache,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let dg = (&dy * &cache.xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
    let db = dy.sum_axis(Axis(0)).insert_axis(Axis(0));
    let dxhat = &dy * &g;
    let mean_dxhat = dxhat.mean_axis(Axis(1)).expect("non-empty rows");
    let mean_dxhat_xhat = (&dxhat * &cache.xhat).mean_axis(Axis(1)).expect("non-empty rows");
    let mut dx = dxhat;
    for (r, mut row) in dx.rows_mut().into_iter().enumerate() {
        let s = cache.inv_std[r];
        for (c, v) in row.iter_mut().enumerate() {
            *v = s * (*v - mean_dxhat[r] - cache.xhat[[r, c]] * mean_dxhat_xhat[r]);
        }
    }
    (dx, dg, db)
}

/// Causal row softmax of `scale·s` over `j ≤ i`; masked entries are 0.
pub fn causal_softmax(s: ArrayView3<f64>, scale: f64) -> Array3<f64> {
    let (b, t, _) = s.dim();
    let mut p = Array3::zeros(s.raw_dim());
    for bb in 0..b {
        for i in 0..t {
            let m = (0..=i).map(|j| scale * s[[bb, i, j]]).fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for j in 0..=i {
                let e = (scale * s[[bb, i, j]] - m).exp();
                p[[bb, i, j]] = e;
                z += e;
            }
            for j in 0..=i {
                p[[bb, i, j]] /= z;
            }
        }
    }
    p
}

/// Gradient w.r.t. the unscaled scores given `dp` and the softmax output.
pub fn causal_softmax_backward(dp: ArrayView3<f64>, p: ArrayView3<f64>, scale: f64) -> Array3<f64> {
    let (b, t, _) = p.dim();
    let mut ds = Array3::zeros(p.raw_dim());
    for bb in 0..b {
        for i in 0..t {
            let dot: f64 = (0..=i).map(|j| dp[[bb, i, j]] * p[[bb, i, j]]).sum();
            for j in 0..=i {
                ds[[bb, i, j]] = scale * p[[bb, i, j]] * (dp[[bb, i, j]] - dot);
            }
        }
    }
    ds
}

/// `scale·s` on `j ≤ i`, 0 above the diagonal.
pub fn causal_scale(s: ArrayView3<f64>, scale: f64) -> Array3<f64> {
    let mut p = s.mapv(|v| v * scale);
    mask_upper(&mut p);
    p
}

pub fn mask_upper(a: &mut Array3<f64>) {
    let (b, t, _) = a.dim();
    for bb in 0..b {
        for i in 0..t {
            for j in i + 1..t {
                a[[bb, i, j]] = 0.0;
            }
        }
    }
}

/// Mean next-token cross-entropy of `logits` (`rows × V`) and the gradient
/// w.r.t. the logits.
pub fn cross_entropy(logits: ArrayView2<f64>, targets: &[usize]) -> (f64, Array2<f64>) {
    let rows = logits.nrows() as f64;
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut loss = 0.0;
    for (r, row) in logits.rows().into_iter().enumerate() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let z: f64 = row.iter().map(|v| (v - m).exp()).sum();
        let log_z = m + z.ln();
        loss += log_z - row[targets[r]];
        for (c, v) in row.iter().enumerate() {
            grad[[r, c]] = (v - log_z).exp() / rows;
        }
        grad[[r, targets[r]]] -= 1.0 / rows;
    }
    (loss / rows, grad)
}

/// Batched `a·b` for `B×m×k` and `B×k×n`.
pub fn bmm(a: ArrayView3<f64>, b: ArrayView3<f64>) -> Array3<f64> {
    let (batch, m, _) = a.dim();
    let n = b.dim().2;
    let mut out = Array3::zeros((batch, m, n));
    for bb in 0..batch {
        out.index_axis_mut(Axis(0), bb)
            .assign(&a.index_axis(Axis(0), bb).dot(&b.index_axis(Axis(0), bb)));
    }
    out
}

/// Batched transpose of the last two axes.
pub fn bt(a: ArrayView3<f64>) -> Array3<f64> {
    a.permuted_axes([0, 2, 1]).as_standard_layout().to_owned()
}
