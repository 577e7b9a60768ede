//! Forward and backward passes of the toy transformer.
//!
//! Per block: every head computes `Q, K, V = tanh(x·W)`, quantum scores
//! `A_raw = Q·Kᵀ`, a causal normalisation `P`, and a quantum context `P·V`
//! mapped back by `W_o`. The expressive head feeds `tanh(AngleMLP(x))`
//! through the encoder and projects its `Q_dim` features to `d`. Head outputs
//! are summed, then post-norm residual attention and feed-forward sublayers
//! follow.
//!
//! Gradients are straight-through: quantum contractions are differentiated
//! as the exact products of their cached inputs and the encoder as the
//! identity, with shot noise treated as a non-differentiable perturbation.

use ndarray::{s, Array2, Array3, ArrayView2, ArrayView3, Axis};
use rand::Rng;

use super::config::{AttnNorm, ModelConfig};
use super::layers::{
    affine, bmm, bt, causal_scale, causal_softmax, causal_softmax_backward, cross_entropy, gelu, gelu_grad, layer_norm,
    layer_norm_backward, mask_upper, LnCache,
};
use super::params::{BlockParams, HeadParams, ModelParams};
use super::vnqe::vnqe_encode;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::vqdp::{vqdp_contract, vqdp_matmul, QuantumRuntime};

/// Output of one tanh head.
#[derive(Debug, Clone)]
pub struct QuantumHeadOutput {
    /// `Q·Kᵀ` estimates before masking, `B×T×T`.
    pub scores: Array3<f64>,
    /// Estimator variance of every score.
    pub score_variance: Array3<f64>,
    /// Normalised causal weights fed to the second contraction.
    pub weights: Array3<f64>,
    /// `P·V` estimates, `B×T×d`.
    pub context: Array3<f64>,
    pub q: Array3<f64>,
    pub k: Array3<f64>,
    pub v: Array3<f64>,
    pub circuits: usize,
    pub shots_per_circuit: u64,
}

/// Output of one expressive head.
#[derive(Debug, Clone)]
pub struct ExpressiveOutput {
    /// AngleMLP hidden pre-activation, `rows × d_mlp`.
    pub hidden_pre: Array2<f64>,
    pub hidden: Array2<f64>,
    /// `tanh(AngleMLP(x))`, the values handed to the encoder.
    pub angles: Array2<f64>,
    /// Measured features, `rows × Q_dim`.
    pub features: Array2<f64>,
}

fn to3(a: Array2<f64>, b: usize, t: usize) -> Array3<f64> {
    let n = a.ncols();
    a.as_standard_layout()
        .into_owned()
        .into_shape_with_order((b, t, n))
        .expect("row count is b·t")
}

fn to2(a: Array3<f64>) -> Array2<f64> {
    let (b, t, n) = a.dim();
    a.as_standard_layout()
        .into_owned()
        .into_shape_with_order((b * t, n))
        .expect("contiguous")
}

/// Token plus positional embedding, `B×T×d`.
pub fn embed(params: &ModelParams, tokens: ArrayView2<usize>) -> Result<Array3<f64>> {
    let (b, t) = tokens.dim();
    let (vocab, d) = params.tok_emb.value.dim();
    if t > params.pos_emb.value.nrows() {
        return Err(Error::argument(format!(
            "sequence length {t} exceeds the {} positions of the model",
            params.pos_emb.value.nrows()
        )));
    }
    let mut z = Array3::zeros((b, t, d));
    for ((bb, tt), &tok) in tokens.indexed_iter() {
        if tok >= vocab {
            return Err(Error::argument(format!(
                "token {tok} at [{bb}, {tt}] outside vocabulary of {vocab}"
            )));
        }
        let row = &params.tok_emb.value.row(tok) + &params.pos_emb.value.row(tt);
        z.slice_mut(s![bb, tt, ..]).assign(&row);
    }
    Ok(z)
}

/// One tanh head on `x` (`B×T×d`).
pub fn tanh_head_forward(
    rt: &QuantumRuntime,
    cfg: &ModelConfig,
    head: &HeadParams,
    x: ArrayView3<f64>,
    seed: u64,
) -> Result<QuantumHeadOutput> {
    let (b, t, d) = x.dim();
    let x2 = x.to_shape((b * t, d)).expect("contiguous activations");
    let proj = |w: &Array2<f64>| to3(x2.dot(w).mapv(f64::tanh), b, t);
    let (q, k, v) = (proj(&head.wq.value), proj(&head.wk.value), proj(&head.wv.value));
    let scores = vqdp_matmul(rt, q.view(), k.view(), derive_seed(seed, 0))?;
    let weights = normalise(cfg, scores.scores.view());
    let context = vqdp_contract(rt, weights.view(), v.view(), derive_seed(seed, 1))?;
    Ok(QuantumHeadOutput {
        scores: scores.scores,
        score_variance: scores.variance,
        weights,
        context: context.scores,
        q,
        k,
        v,
        circuits: scores.circuits + context.circuits,
        shots_per_circuit: scores.shots_per_circuit,
    })
}

fn normalise(cfg: &ModelConfig, scores: ArrayView3<f64>) -> Array3<f64> {
    let d = cfg.d_model as f64;
    let p = match cfg.attn_norm {
        AttnNorm::Softmax => causal_softmax(scores, 1.0 / d.sqrt()),
        AttnNorm::ScaleOnly => causal_scale(scores, 1.0 / d),
    };
    // Rounding can push a weight a hair past the encodable range.
    p.mapv(|w| w.clamp(-1.0, 1.0))
}

/// The expressive head on `x` (`rows × d`, rows ordered `b·T + t`).
pub fn expressive_head_forward(
    rt: &QuantumRuntime,
    cfg: &ModelConfig,
    head: &HeadParams,
    x: ArrayView2<f64>,
    (b, t): (usize, usize),
    seed: u64,
) -> Result<ExpressiveOutput> {
    let hidden_pre = affine(x, head.mlp_w1.value.view(), head.mlp_b1.value.view());
    let hidden = hidden_pre.mapv(gelu);
    let angles = affine(hidden.view(), head.mlp_w2.value.view(), head.mlp_b2.value.view()).mapv(f64::tanh);
    let a3 = to3(angles.clone(), b, t);
    let features = to2(vnqe_encode(rt, a3.view(), cfg.nq_addr, cfg.nq_data, seed)?);
    Ok(ExpressiveOutput {
        hidden_pre,
        hidden,
        angles,
        features,
    })
}

struct HeadCache {
    tanh: QuantumHeadOutput,
    expressive: Option<ExpressiveOutput>,
}

struct BlockCache {
    x_in: Array2<f64>,
    heads: Vec<HeadCache>,
    attn_keep: Option<Array2<f64>>,
    ln1: LnCache,
    h1: Array2<f64>,
    ff_pre: Array2<f64>,
    ff_hidden: Array2<f64>,
    ff_keep: Option<Array2<f64>>,
    ln2: LnCache,
}

/// Everything the backward pass needs from one forward pass.
pub struct ForwardCache {
    tokens: Vec<usize>,
    shape: (usize, usize),
    blocks: Vec<BlockCache>,
    x_final: Array2<f64>,
}

/// Random streams of one forward pass: a circuit seed and, in training
/// mode with dropout, a mask seed.
#[derive(Debug, Clone, Copy)]
pub struct PassSeeds {
    pub circuits: u64,
    pub dropout: Option<u64>,
}

fn dropout_keep(rows: usize, cols: usize, rho: f64, seed: u64) -> Array2<f64> {
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / (1.0 - rho);
    Array2::from_shape_fn((rows, cols), |_| if rng.random::<f64>() < rho { 0.0 } else { scale })
}

/// Forward pass returning logits (`rows × V`) and the backward cache.
pub fn forward_cached(
    cfg: &ModelConfig,
    params: &ModelParams,
    rt: &QuantumRuntime,
    tokens: ArrayView2<usize>,
    seeds: PassSeeds,
) -> Result<(Array2<f64>, ForwardCache)> {
    let (b, t) = tokens.dim();
    let d = cfg.d_model;
    let mut x = to2(embed(params, tokens)?);
    let mut caches = Vec::with_capacity(params.blocks.len());
    for (bi, block) in params.blocks.iter().enumerate() {
        let x3 = to3(x.clone(), b, t);
        let mut attn = Array2::<f64>::zeros((b * t, d));
        let mut heads = Vec::with_capacity(block.heads.len());
        for (hi, head) in block.heads.iter().enumerate() {
            let stream = (bi * block.heads.len() + hi) as u64;
            let out = tanh_head_forward(rt, cfg, head, x3.view(), derive_seed(seeds.circuits, 2 * stream))?;
            attn += &to2(out.context.clone()).dot(&head.wo.value);
            let expressive = if cfg.expressive {
                let e = expressive_head_forward(
                    rt,
                    cfg,
                    head,
                    x.view(),
                    (b, t),
                    derive_seed(seeds.circuits, 2 * stream + 1),
                )?;
                attn += &e.features.dot(&head.we.value);
                Some(e)
            } else {
                None
            };
            heads.push(HeadCache { tanh: out, expressive });
        }
        let attn_keep = match seeds.dropout {
            Some(s) if cfg.dropout > 0.0 => Some(dropout_keep(b * t, d, cfg.dropout, derive_seed(s, 2 * bi as u64))),
            _ => None,
        };
        if let Some(keep) = &attn_keep {
            attn *= keep;
        }
        let (h1, ln1) = layer_norm((&x + &attn).view(), block.ln1_g.value.view(), block.ln1_b.value.view());
        let ff_pre = affine(h1.view(), block.ff_w1.value.view(), block.ff_b1.value.view());
        let ff_hidden = ff_pre.mapv(gelu);
        let mut ff = affine(ff_hidden.view(), block.ff_w2.value.view(), block.ff_b2.value.view());
        let ff_keep = match seeds.dropout {
            Some(s) if cfg.dropout > 0.0 => {
                Some(dropout_keep(b * t, d, cfg.dropout, derive_seed(s, 2 * bi as u64 + 1)))
            }
            _ => None,
        };
        if let Some(keep) = &ff_keep {
            ff *= keep;
        }
        let (y, ln2) = layer_norm((&h1 + &ff).view(), block.ln2_g.value.view(), block.ln2_b.value.view());
        caches.push(BlockCache {
            x_in: x,
            heads,
            attn_keep,
            ln1,
            h1,
            ff_pre,
            ff_hidden,
            ff_keep,
            ln2,
        });
        x = y;
    }
    let logits = affine(x.view(), params.out_w.value.view(), params.out_b.value.view());
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logits".into()));
    }
    Ok((
        logits,
        ForwardCache {
            tokens: tokens.iter().copied().collect(),
            shape: (b, t),
            blocks: caches,
            x_final: x,
        },
    ))
}

/// Inference forward pass, logits shaped `B×T×V`.
pub fn forward(
    cfg: &ModelConfig,
    params: &ModelParams,
    rt: &QuantumRuntime,
    tokens: ArrayView2<usize>,
    seed: u64,
) -> Result<Array3<f64>> {
    let (b, t) = tokens.dim();
    let (logits, _) = forward_cached(
        cfg,
        params,
        rt,
        tokens,
        PassSeeds {
            circuits: seed,
            dropout: None,
        },
    )?;
    Ok(to3(logits, b, t))
}

fn add_grad(p: &mut super::params::Param, g: &Array2<f64>) {
    p.grad += g;
}

fn head_backward(
    cfg: &ModelConfig,
    head: &mut HeadParams,
    cache: &HeadCache,
    x: ArrayView2<f64>,
    d_attn: ArrayView2<f64>,
    dx: &mut Array2<f64>,
    (b, t): (usize, usize),
) {
    let d = cfg.d_model as f64;
    let out = &cache.tanh;
    let ctx = to2(out.context.clone());
    add_grad(&mut head.wo, &ctx.t().dot(&d_attn));
    let d_ctx = to3(d_attn.dot(&head.wo.value.t()), b, t);

    // ctx = P·V
    let d_p = bmm(d_ctx.view(), bt(out.v.view()).view());
    let d_v = bmm(bt(out.weights.view()).view(), d_ctx.view());
    let mut d_s = match cfg.attn_norm {
        AttnNorm::Softmax => causal_softmax_backward(d_p.view(), out.weights.view(), 1.0 / d.sqrt()),
        AttnNorm::ScaleOnly => d_p.mapv(|g| g / d),
    };
    mask_upper(&mut d_s);
    // scores = Q·Kᵀ
    let d_q = bmm(d_s.view(), out.k.view());
    let d_k = bmm(bt(d_s.view()).view(), out.q.view());

    for (w, act, grad) in [
        (&mut head.wq, &out.q, d_q),
        (&mut head.wk, &out.k, d_k),
        (&mut head.wv, &out.v, d_v),
    ] {
        let d_pre = to2(grad * &act.mapv(|a| 1.0 - a * a));
        w.grad += &x.t().dot(&d_pre);
        *dx += &d_pre.dot(&w.value.t());
    }

    if let Some(e) = &cache.expressive {
        add_grad(&mut head.we, &e.features.t().dot(&d_attn));
        let d_angles = super::straight_through_backward(d_attn.dot(&head.we.value.t()));
        let d_apre = d_angles * &e.angles.mapv(|a| 1.0 - a * a);
        add_grad(&mut head.mlp_w2, &e.hidden.t().dot(&d_apre));
        add_grad(&mut head.mlp_b2, &d_apre.sum_axis(Axis(0)).insert_axis(Axis(0)));
        let d_hidden = d_apre.dot(&head.mlp_w2.value.t()) * &e.hidden_pre.mapv(gelu_grad);
        add_grad(&mut head.mlp_w1, &x.t().dot(&d_hidden));
        add_grad(&mut head.mlp_b1, &d_hidden.sum_axis(Axis(0)).insert_axis(Axis(0)));
        *dx += &d_hidden.dot(&head.mlp_w1.value.t());
    }
}

fn block_backward(
    cfg: &ModelConfig,
    block: &mut BlockParams,
    cache: &BlockCache,
    dy: Array2<f64>,
    shape: (usize, usize),
) -> Array2<f64> {
    let (d_sum2, dg, db) = layer_norm_backward(dy.view(), block.ln2_g.value.view(), &cache.ln2);
    add_grad(&mut block.ln2_g, &dg);
    add_grad(&mut block.ln2_b, &db);
    let mut d_h1 = d_sum2.clone();
    let mut d_ff = d_sum2;
    if let Some(keep) = &cache.ff_keep {
        d_ff *= keep;
    }
    add_grad(&mut block.ff_w2, &cache.ff_hidden.t().dot(&d_ff));
    add_grad(&mut block.ff_b2, &d_ff.sum_axis(Axis(0)).insert_axis(Axis(0)));
    let d_pre = d_ff.dot(&block.ff_w2.value.t()) * &cache.ff_pre.mapv(gelu_grad);
    add_grad(&mut block.ff_w1, &cache.h1.t().dot(&d_pre));
    add_grad(&mut block.ff_b1, &d_pre.sum_axis(Axis(0)).insert_axis(Axis(0)));
    d_h1 += &d_pre.dot(&block.ff_w1.value.t());

    let (d_sum1, dg, db) = layer_norm_backward(d_h1.view(), block.ln1_g.value.view(), &cache.ln1);
    add_grad(&mut block.ln1_g, &dg);
    add_grad(&mut block.ln1_b, &db);
    let mut dx = d_sum1.clone();
    let mut d_attn = d_sum1;
    if let Some(keep) = &cache.attn_keep {
        d_attn *= keep;
    }
    for (head, hc) in block.heads.iter_mut().zip(&cache.heads) {
        head_backward(cfg, head, hc, cache.x_in.view(), d_attn.view(), &mut dx, shape);
    }
    dx
}

/// Accumulates into `params`' gradient buffers the gradient of a loss whose
/// derivative w.r.t. the logits is `d_logits`.
pub fn backward(cfg: &ModelConfig, params: &mut ModelParams, cache: &ForwardCache, d_logits: ArrayView2<f64>) {
    add_grad(&mut params.out_w, &cache.x_final.t().dot(&d_logits));
    add_grad(&mut params.out_b, &d_logits.sum_axis(Axis(0)).insert_axis(Axis(0)));
    let mut dx = d_logits.dot(&params.out_w.value.t());
    for (block, bc) in params.blocks.iter_mut().zip(&cache.blocks).rev() {
        dx = block_backward(cfg, block, bc, dx, cache.shape);
    }
    let t = cache.shape.1;
    for (r, &tok) in cache.tokens.iter().enumerate() {
        let g = dx.row(r);
        params.tok_emb.grad.row_mut(tok).scaled_add(1.0, &g);
        params.pos_emb.grad.row_mut(r % t).scaled_add(1.0, &g);
    }
}

/// Mean next-token cross-entropy of `tokens` against `targets` (both
/// `B×T`). With `grad`, also accumulates parameter gradients.
pub fn loss(
    cfg: &ModelConfig,
    params: &mut ModelParams,
    rt: &QuantumRuntime,
    tokens: ArrayView2<usize>,
    targets: ArrayView2<usize>,
    seeds: PassSeeds,
    grad: bool,
) -> Result<f64> {
    if tokens.dim() != targets.dim() {
        return Err(Error::argument("tokens and targets differ in shape"));
    }
    let (logits, cache) = forward_cached(cfg, params, rt, tokens, seeds)?;
    let targets: Vec<usize> = targets.iter().copied().collect();
    if let Some(&bad) = targets.iter().find(|&&t| t >= cfg.vocab) {
        return Err(Error::argument(format!("target {bad} outside vocabulary")));
    }
    let (value, d_logits) = cross_entropy(logits.view(), &targets);
    if !value.is_finite() {
        return Err(Error::NonFinite("loss".into()));
    }
    if grad {
        backward(cfg, params, &cache, d_logits.view());
    }
    Ok(value)
}
