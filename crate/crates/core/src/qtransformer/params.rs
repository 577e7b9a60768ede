use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::ModelConfig;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A trainable tensor and its gradient buffer. Vectors are stored as `1×n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Array2<f64>,
    pub grad: Array2<f64>,
}

impl Param {
    fn new(name: String, value: Array2<f64>) -> Self {
        let grad = Array2::zeros(value.raw_dim());
        Param { name, value, grad }
    }

    fn zeros(name: String, rows: usize, cols: usize) -> Self {
        Param::new(name, Array2::zeros((rows, cols)))
    }

    fn ones(name: String, rows: usize, cols: usize) -> Self {
        Param::new(name, Array2::ones((rows, cols)))
    }

    /// Glorot-uniform initialisation.
    fn glorot<R: Rng>(name: String, rows: usize, cols: usize, rng: &mut R) -> Self {
        let s = (6.0 / (rows + cols) as f64).sqrt();
        Param::new(name, Array2::from_shape_fn((rows, cols), |_| rng.random_range(-s..s)))
    }

    fn normal<R: Rng>(name: String, rows: usize, cols: usize, std: f64, rng: &mut R) -> Self {
        let dist = Normal::new(0.0, std).expect("positive std");
        Param::new(name, Array2::from_shape_fn((rows, cols), |_| dist.sample(rng)))
    }
}

/// Projections of one quantum head: tanh query/key/value maps, the context
/// output map, and the expressive-head AngleMLP with its `Q_dim → d`
/// read-out.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub wq: Param,
    pub wk: Param,
    pub wv: Param,
    pub wo: Param,
    pub mlp_w1: Param,
    pub mlp_b1: Param,
    pub mlp_w2: Param,
    pub mlp_b2: Param,
    pub we: Param,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub heads: Vec<HeadParams>,
    pub ln1_g: Param,
    pub ln1_b: Param,
    pub ff_w1: Param,
    pub ff_b1: Param,
    pub ff_w2: Param,
    pub ff_b2: Param,
    pub ln2_g: Param,
    pub ln2_b: Param,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub tok_emb: Param,
    pub pos_emb: Param,
    pub blocks: Vec<BlockParams>,
    pub out_w: Param,
    pub out_b: Param,
}

impl ModelParams {
    /// Seeded random initialisation. Expressive-head tensors exist with
    /// `Q_dim`-sized shapes even when the head is disabled, so checkpoints
    /// always carry the same tensor list.
    pub fn init(cfg: &ModelConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng_from_seed(seed);
        let (v, t, d, q) = (cfg.vocab, cfg.seq_len, cfg.d_model, cfg.q_dim());
        let tok_emb = Param::normal("tok_emb".into(), v, d, 0.5, &mut rng);
        let pos_emb = Param::normal("pos_emb".into(), t, d, 0.5, &mut rng);
        let mut blocks = Vec::with_capacity(cfg.blocks);
        for b in 0..cfg.blocks {
            let mut heads = Vec::with_capacity(cfg.heads);
            for h in 0..cfg.heads {
                let n = |s: &str| format!("block{b}.head{h}.{s}");
                heads.push(HeadParams {
                    wq: Param::glorot(n("wq"), d, d, &mut rng),
                    wk: Param::glorot(n("wk"), d, d, &mut rng),
                    wv: Param::glorot(n("wv"), d, d, &mut rng),
                    wo: Param::glorot(n("wo"), d, d, &mut rng),
                    mlp_w1: Param::glorot(n("mlp_w1"), d, cfg.d_mlp, &mut rng),
                    mlp_b1: Param::zeros(n("mlp_b1"), 1, cfg.d_mlp),
                    mlp_w2: Param::glorot(n("mlp_w2"), cfg.d_mlp, q, &mut rng),
                    mlp_b2: Param::zeros(n("mlp_b2"), 1, q),
                    we: Param::glorot(n("we"), q, d, &mut rng),
                });
            }
            let n = |s: &str| format!("block{b}.{s}");
            blocks.push(BlockParams {
                heads,
                ln1_g: Param::ones(n("ln1_g"), 1, d),
                ln1_b: Param::zeros(n("ln1_b"), 1, d),
                ff_w1: Param::glorot(n("ff_w1"), d, cfg.d_ff, &mut rng),
                ff_b1: Param::zeros(n("ff_b1"), 1, cfg.d_ff),
                ff_w2: Param::glorot(n("ff_w2"), cfg.d_ff, d, &mut rng),
                ff_b2: Param::zeros(n("ff_b2"), 1, d),
                ln2_g: Param::ones(n("ln2_g"), 1, d),
                ln2_b: Param::zeros(n("ln2_b"), 1, d),
            });
        }
        Ok(ModelParams {
            tok_emb,
            pos_emb,
            blocks,
            out_w: Param::glorot("out_w".into(), d, v, &mut rng),
            out_b: Param::zeros("out_b".into(), 1, v),
        })
    }

    /// Every tensor in a fixed order.
    pub fn params(&self) -> Vec<&Param> {
        let mut out = vec![&self.tok_emb, &self.pos_emb];
        for b in &self.blocks {
            for h in &b.heads {
                out.extend([
                    &h.wq, &h.wk, &h.wv, &h.wo, &h.mlp_w1, &h.mlp_b1, &h.mlp_w2, &h.mlp_b2, &h.we,
                ]);
            }
            out.extend([
                &b.ln1_g, &b.ln1_b, &b.ff_w1, &b.ff_b1, &b.ff_w2, &b.ff_b2, &b.ln2_g, &b.ln2_b,
            ]);
        }
        out.extend([&self.out_w, &self.out_b]);
        out
    }

    /// Mutable twin of [`ModelParams::params`], same order.
    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = vec![&mut self.tok_emb, &mut self.pos_emb];
        for b in &mut self.blocks {
            for h in &mut b.heads {
                out.extend([
                    &mut h.wq,
                    &mut h.wk,
                    &mut h.wv,
                    &mut h.wo,
                    &mut h.mlp_w1,
                    &mut h.mlp_b1,
                    &mut h.mlp_w2,
                    &mut h.mlp_b2,
                    &mut h.we,
                ]);
            }
            out.extend([
                &mut b.ln1_g,
                &mut b.ln1_b,
                &mut b.ff_w1,
                &mut b.ff_b1,
                &mut b.ff_w2,
                &mut b.ff_b2,
                &mut b.ln2_g,
                &mut b.ln2_b,
            ]);
        }
        out.extend([&mut self.out_w, &mut self.out_b]);
        out
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.grad.fill(0.0);
        }
    }

    pub fn n_scalars(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    /// Name of the first tensor holding a non-finite value or gradient.
    pub fn first_non_finite(&self) -> Option<&str> {
        self.params()
            .into_iter()
            .find(|p| p.value.iter().chain(p.grad.iter()).any(|x| !x.is_finite()))
            .map(|p| p.name.as_str())
    }

    /// Fails unless every tensor has the shape `cfg` prescribes.
    pub fn check_shapes(&self, cfg: &ModelConfig) -> Result<()> {
        let reference = ModelParams::init(cfg, 0)?;
        let ours = self.params();
        let theirs = reference.params();
        if ours.len() != theirs.len() {
            return Err(Error::structure(format!(
                "{} tensors, configuration needs {}",
                ours.len(),
                theirs.len()
            )));
        }
        for (a, b) in ours.iter().zip(&theirs) {
            if a.name != b.name || a.value.dim() != b.value.dim() {
                return Err(Error::structure(format!(
                    "tensor {} {:?} does not match {} {:?}",
                    a.name,
                    a.value.dim(),
                    b.name,
                    b.value.dim()
                )));
            }
        }
        Ok(())
    }
}
