//! A small decoder-only transformer whose attention runs on the shot-sampled
//! product estimator.
//!
//! Each quantum head computes `tanh` projections, quantum `Q·Kᵀ` scores, a
//! causal normalisation and a quantum `P·V` context; an expressive head adds
//! features encoded by a multi-qubit QCrank circuit. Training uses manual
//! backpropagation with straight-through gradients and AdamW.

mod checkpoint;
mod config;
pub mod layers;
mod model;
mod optim;
mod params;
mod train;
mod vnqe;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC};
pub use config::{AttnNorm, ModelConfig};
pub use model::{
    backward, embed, expressive_head_forward, forward, forward_cached, loss, tanh_head_forward, ExpressiveOutput,
    ForwardCache, PassSeeds, QuantumHeadOutput,
};
pub use optim::AdamW;
pub use params::{BlockParams, HeadParams, ModelParams, Param};
pub use train::{make_windows, quantum_perplexity, train, EpochRecord, TrainOptions, TrainReport};
pub use vnqe::{q_dim, qubit_bounds, vnqe_encode};

/// The expressive head's gradient rule: the encoder is treated as the
/// identity, so the upstream gradient passes through unchanged.
pub fn straight_through_backward(upstream: ndarray::Array2<f64>) -> ndarray::Array2<f64> {
    upstream
}
