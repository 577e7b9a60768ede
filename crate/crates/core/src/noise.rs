//! Hardware-noise emulation and linear rescaling of measured products.
//!
//! Two-qubit gates are followed, with probability `p2q`, by a uniformly
//! random non-identity two-qubit Pauli on their operands (a depolarizing
//! channel unravelled into trajectories); every measured bit then flips
//! independently with probability `p_ro`. Shots that draw the same error
//! pattern share one statevector simulation.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::par::{try_map_indices, ExecPolicy};
use crate::rng::{derive_seed, multinomial, rng_from_seed};
use crate::sim::{run_circuit, CircuitSpec, ShotOutcome, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    /// Depolarizing probability after each two-qubit gate.
    pub p2q: f64,
    /// Readout bit-flip probability per measured qubit.
    pub p_ro: f64,
}

impl NoiseModel {
    pub fn new(p2q: f64, p_ro: f64) -> Result<Self> {
        let m = NoiseModel { p2q, p_ro };
        m.validate()?;
        Ok(m)
    }

    pub fn ideal() -> Self {
        NoiseModel::default()
    }

    pub fn is_ideal(&self) -> bool {
        self.p2q == 0.0 && self.p_ro == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p2q", self.p2q), ("p_ro", self.p_ro)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::argument(format!("{name} = {p} is not in [0, 1)")));
            }
        }
        Ok(())
    }
}

/// One inserted error: two-qubit gate position and Pauli pair `1..16`
/// (control Pauli `p / 4`, target Pauli `p % 4`, with 0 = I, 1 = X, 2 = Y, 3 = Z).
type ErrorPattern = Vec<(u32, u8)>;

/// Samples a noisy execution of `circuit`.
///
/// With an ideal model this is exactly [`run_circuit`] at the same seed.
pub fn run_noisy(circuit: &CircuitSpec, noise: &NoiseModel, shots: u64, seed: u64) -> Result<Vec<ShotOutcome>> {
    run_noisy_with(circuit, noise, shots, seed, ExecPolicy::Sequential)
}

/// [`run_noisy`] with the distinct error trajectories simulated under `policy`.
pub fn run_noisy_with(
    circuit: &CircuitSpec,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    policy: ExecPolicy,
) -> Result<Vec<ShotOutcome>> {
    noise.validate()?;
    circuit.validate()?;
    if shots == 0 {
        return Err(Error::argument("n_shots must be at least 1"));
    }
    let n_bits = circuit.measured().len();
    let mut counts = if noise.p2q == 0.0 {
        let mut c = vec![0u64; 1 << n_bits];
        for o in run_circuit(circuit, shots, seed)? {
            c[o.outcome] = o.multiplicity;
        }
        c
    } else {
        trajectory_counts(circuit, noise.p2q, shots, seed, policy)?
    };
    if noise.p_ro > 0.0 {
        counts = flip_readout(&counts, n_bits, noise.p_ro, derive_seed(seed, 0x5245_4144));
    }
    Ok(crate::sim::outcomes_from_counts(&counts, n_bits))
}

fn trajectory_counts(circuit: &CircuitSpec, p2q: f64, shots: u64, seed: u64, policy: ExecPolicy) -> Result<Vec<u64>> {
    let two_qubit: Vec<usize> = circuit
        .gates()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind().is_two_qubit())
        .map(|(i, _)| i)
        .collect();
    let n2q = two_qubit.len() as u64;

    // Group shots by error pattern. Gaps between errors are geometric.
    let mut rng = rng_from_seed(seed);
    let gap = Geometric::new(p2q).map_err(|e| Error::argument(e.to_string()))?;
    let mut patterns: BTreeMap<ErrorPattern, u64> = BTreeMap::new();
    for _ in 0..shots {
        let mut pattern = ErrorPattern::new();
        let mut pos = gap.sample(&mut rng);
        while pos < n2q {
            pattern.push((pos as u32, rng.random_range(1..16u8)));
            pos += 1 + gap.sample(&mut rng);
        }
        *patterns.entry(pattern).or_insert(0) += 1;
    }

    let groups: Vec<(ErrorPattern, u64)> = patterns.into_iter().collect();
    let measured = circuit.measured_qubits();
    let n_out = 1usize << measured.len();
    let per_group = try_map_indices(policy, groups.len(), |gi| -> Result<Vec<u64>> {
        let (pattern, count) = &groups[gi];
        let state = simulate_with_errors(circuit, &two_qubit, pattern)?;
        let probs = state.marginal(&measured)?;
        let mut rng = rng_from_seed(derive_seed(seed, gi as u64 + 1));
        Ok(multinomial(&mut rng, *count, &probs))
    })?;
    let mut counts = vec![0u64; n_out];
    for c in per_group {
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
    }
    Ok(counts)
}

fn simulate_with_errors(circuit: &CircuitSpec, two_qubit: &[usize], pattern: &ErrorPattern) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.n_qubits())?;
    let mut next = pattern.iter().peekable();
    let mut seen_2q = 0u32;
    for (i, g) in circuit.gates().iter().enumerate() {
        state.apply(g)?;
        if g.kind().is_two_qubit() {
            debug_assert_eq!(two_qubit[seen_2q as usize], i);
            while let Some(&&(pos, pauli)) = next.peek() {
                if pos != seen_2q {
                    break;
                }
                let control = g.control().expect("two-qubit gate has a control");
                state.apply_pauli(control, pauli / 4);
                state.apply_pauli(g.target(), pauli % 4);
                next.next();
            }
            seen_2q += 1;
        }
    }
    Ok(state)
}

fn flip_readout(counts: &[u64], n_bits: usize, p_ro: f64, seed: u64) -> Vec<u64> {
    let mut rng = rng_from_seed(seed);
    let mut out = vec![0u64; counts.len()];
    for (outcome, &m) in counts.iter().enumerate() {
        for _ in 0..m {
            let mut flipped = outcome;
            for b in 0..n_bits {
                if rng.random::<f64>() < p_ro {
                    flipped ^= 1 << b;
                }
            }
            out[flipped] += 1;
        }
    }
    out
}

/// Least-squares linear map `truth ≈ scale · measured + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub scale: f64,
    pub intercept: f64,
    /// RMSE of `scale · measured + intercept - truth`.
    pub fit_rmse: f64,
}

impl Calibration {
    pub fn apply(&self, measured: f64) -> f64 {
        self.scale * measured + self.intercept
    }
}

pub fn fit_scale(measured: &[f64], truth: &[f64]) -> Result<Calibration> {
    if measured.len() != truth.len() {
        return Err(Error::Fit(format!(
            "{} measurements for {} truth values",
            measured.len(),
            truth.len()
        )));
    }
    let n = measured.len();
    if n < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    let nf = n as f64;
    let mx = measured.iter().sum::<f64>() / nf;
    let my = truth.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in measured.iter().zip(truth) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if syy == 0.0 {
        return Err(Error::Fit("truth values are all identical".into()));
    }
    if sxx == 0.0 {
        return Err(Error::Fit("measured values are all identical".into()));
    }
    let scale = sxy / sxx;
    let intercept = my - scale * mx;
    let sse: f64 = measured
        .iter()
        .zip(truth)
        .map(|(&x, &y)| (scale * x + intercept - y).powi(2))
        .sum();
    Ok(Calibration {
        scale,
        intercept,
        fit_rmse: (sse / nf).sqrt(),
    })
}
