use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// What normalizes the masked score matrix before the `A·V` product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttnNorm {
    /// Row softmax of `A_raw/√d` over unmasked positions.
    #[default]
    Softmax,
    /// `A_raw/d`, masked, without exponentiation. Entries stay in `[-1, 1]`.
    ScaleOnly,
}

impl fmt::Display for AttnNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttnNorm::Softmax => "softmax",
            AttnNorm::ScaleOnly => "scale_only",
        })
    }
}

impl FromStr for AttnNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "softmax" => Ok(AttnNorm::Softmax),
            "scale_only" => Ok(AttnNorm::ScaleOnly),
            _ => Err(Error::argument(format!("unknown attention normalization '{s}'"))),
        }
    }
}

/// Hyperparameters of the toy transformer. Defaults are the reference
/// configuration: `V=100, T=6, d=32, d_ff=128`, one block with two quantum
/// heads, a 3+3-qubit expressive head (`Q_dim = 24`), 1024 shots, an
/// AngleMLP of width 128, no dropout, `η = 10⁻³` and batches of 5.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub vocab: usize,
    pub seq_len: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub blocks: usize,
    pub heads: usize,
    pub nq_addr: usize,
    pub nq_data: usize,
    /// Shots per address of every quantum circuit.
    pub shots: u64,
    pub d_mlp: usize,
    pub dropout: f64,
    pub lr: f64,
    pub batch: usize,
    pub attn_norm: AttnNorm,
    /// Expressive heads are optional; without them every head is a plain
    /// tanh head.
    pub expressive: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            vocab: 100,
            seq_len: 6,
            d_model: 32,
            d_ff: 128,
            blocks: 1,
            heads: 2,
            nq_addr: 3,
            nq_data: 3,
            shots: 1024,
            d_mlp: 128,
            dropout: 0.0,
            lr: 1e-3,
            batch: 5,
            attn_norm: AttnNorm::Softmax,
            expressive: true,
        }
    }
}

impl ModelConfig {
    pub fn q_dim(&self) -> usize {
        super::q_dim(self.nq_addr, self.nq_data)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("vocab", self.vocab),
            ("seq_len", self.seq_len),
            ("d_model", self.d_model),
            ("d_ff", self.d_ff),
            ("blocks", self.blocks),
            ("heads", self.heads),
            ("nq_data", self.nq_data),
            ("d_mlp", self.d_mlp),
            ("batch", self.batch),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::argument(format!("{name} must be positive")));
            }
        }
        if self.shots == 0 {
            return Err(Error::argument("shots must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::argument(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::argument(format!("learning rate {} must be positive", self.lr)));
        }
        if self.nq_addr + self.nq_data > 12 {
            return Err(Error::argument("expressive head limited to 12 qubits per token"));
        }
        Ok(())
    }

    /// `key=value` pairs in a fixed order, as written to checkpoints.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("vocab", self.vocab.to_string()),
            ("seq_len", self.seq_len.to_string()),
            ("d_model", self.d_model.to_string()),
            ("d_ff", self.d_ff.to_string()),
            ("blocks", self.blocks.to_string()),
            ("heads", self.heads.to_string()),
            ("nq_addr", self.nq_addr.to_string()),
            ("nq_data", self.nq_data.to_string()),
            ("shots", self.shots.to_string()),
            ("d_mlp", self.d_mlp.to_string()),
            ("dropout", self.dropout.to_string()),
            ("lr", self.lr.to_string()),
            ("batch", self.batch.to_string()),
            ("attn_norm", self.attn_norm.to_string()),
            ("expressive", self.expressive.to_string()),
        ]
    }

    /// Sets one field by its `to_pairs` key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::argument(format!("invalid value '{value}' for {key}")))
        }
        match key {
            "vocab" => self.vocab = num(key, value)?,
            "seq_len" => self.seq_len = num(key, value)?,
            "d_model" => self.d_model = num(key, value)?,
            "d_ff" => self.d_ff = num(key, value)?,
            "blocks" => self.blocks = num(key, value)?,
            "heads" => self.heads = num(key, value)?,
            "nq_addr" => self.nq_addr = num(key, value)?,
            "nq_data" => self.nq_data = num(key, value)?,
            "shots" => self.shots = num(key, value)?,
            "d_mlp" => self.d_mlp = num(key, value)?,
            "dropout" => self.dropout = num(key, value)?,
            "lr" => self.lr = num(key, value)?,
            "batch" => self.batch = num(key, value)?,
            "attn_norm" => self.attn_norm = value.parse()?,
            "expressive" => self.expressive = num(key, value)?,
            _ => return Err(Error::argument(format!("unknown model key '{key}'"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_consistent() {
        let c = ModelConfig::default();
        c.validate().unwrap();
        assert_eq!(c.q_dim(), 24);
    }

    #[test]
    fn pairs_round_trip() {
        let mut c = ModelConfig {
            attn_norm: AttnNorm::ScaleOnly,
            dropout: 0.25,
            ..ModelConfig::default()
        };
        c.lr = 3e-4;
        let mut d = ModelConfig::default();
        for (k, v) in c.to_pairs() {
            d.set(k, &v).unwrap();
        }
        assert_eq!(c, d);
        assert!(d.set("width", "3").is_err());
        assert!(d.set("vocab", "x").is_err());
    }
}
