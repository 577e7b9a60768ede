//! Simulation core for the vectorized quantum transformer.
//!
//! The crate is organised bottom-up:
//!
//! * [`sim`] is a dense statevector simulator for the H/RY/RZ/CNOT/CZ gate set
//!   with exact Z expectations and multinomial shot sampling.
//! * [`encode`] maps classical values in `[-1, 1]` to RY angles and compiles
//!   QCrank uniformly-controlled rotation ladders.
//! * [`vqdp`] batches query/key pairs behind an address register, multiplies
//!   them with the EHands block and rebuilds attention scores from shot counts.
//! * [`noise`] emulates depolarizing two-qubit noise and readout flips, and
//!   fits the linear rescaling applied to hardware results.
//! * [`qtransformer`] is a small decoder-only transformer whose attention and
//!   expressive heads run on the estimators above.

pub mod encode;
pub mod error;
pub mod noise;
pub mod par;
pub mod qtransformer;
pub mod rng;
pub mod sim;
pub mod vqdp;

pub use error::{Error, Result};
