use super::state::StateVector;
use crate::error::{Error, Result};
use crate::rng::{multinomial, rng_from_seed};

/// A measured bit pattern and how many shots produced it.
///
/// `outcome` packs the measured bits with the first measured qubit as the
/// most significant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotOutcome {
    pub outcome: usize,
    pub n_bits: usize,
    pub multiplicity: u64,
}

impl ShotOutcome {
    /// Bit of the `k`-th measured qubit.
    pub fn bit(&self, k: usize) -> bool {
        (self.outcome >> (self.n_bits - 1 - k)) & 1 == 1
    }

    /// Bits in measurement order, e.g. `"0110"`.
    pub fn bitstring(&self) -> String {
        (0..self.n_bits).map(|k| if self.bit(k) { '1' } else { '0' }).collect()
    }
}

/// Draws `n_shots` measurements of `qubits` from the Born distribution.
///
/// The marginal over the measured qubits is computed once and split with a
/// single multinomial draw, which is exact for end-of-circuit measurement.
pub fn sample_shots(state: &StateVector, qubits: &[usize], n_shots: u64, seed: u64) -> Result<Vec<ShotOutcome>> {
    if n_shots == 0 {
        return Err(Error::argument("n_shots must be at least 1"));
    }
    let probs = state.marginal(qubits)?;
    let mut rng = rng_from_seed(seed);
    Ok(outcomes_from_counts(
        &multinomial(&mut rng, n_shots, &probs),
        qubits.len(),
    ))
}

pub(crate) fn outcomes_from_counts(counts: &[u64], n_bits: usize) -> Vec<ShotOutcome> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(outcome, &multiplicity)| ShotOutcome {
            outcome,
            n_bits,
            multiplicity,
        })
        .collect()
}
