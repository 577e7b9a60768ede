use std::sync::atomic::{AtomicU64, Ordering};

use super::table::ShotTable;
use crate::error::{Error, Result};
use crate::noise::{run_noisy_with, NoiseModel};
use crate::par::ExecPolicy;
use crate::rng::{binomial, multinomial, rng_from_seed};
use crate::sim::{run_circuit, CircuitSpec};

/// How many shots a circuit gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotBudget {
    /// Total shots per circuit execution.
    PerCircuit(u64),
    /// Shots per address; a circuit with `n` address qubits gets `S · 2^n`.
    PerAddress(u64),
}

impl ShotBudget {
    pub fn total(self, n_addr: usize) -> u64 {
        match self {
            ShotBudget::PerCircuit(s) => s,
            ShotBudget::PerAddress(s) => s << n_addr,
        }
    }
}

/// Shot sampling, or its shots-free twin that returns the conditional
/// expectations themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimation {
    Exact,
    Sampled(ShotBudget),
}

/// What produces the Born distribution of an address-multiplexed circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Gate-by-gate statevector simulation of the compiled circuit.
    #[default]
    Statevector,
    /// The closed-form output distribution of an ideal QCrank circuit:
    /// uniform over addresses, and given address `ℓ` each data qubit reads 0
    /// with probability `(1 + v_ℓ) / 2`. Agreement with the statevector
    /// engine is covered by the test suite.
    Analytic,
}

/// Execution settings shared by every quantum layer, plus a counter of the
/// circuits run so far.
#[derive(Debug)]
pub struct QuantumRuntime {
    pub estimation: Estimation,
    pub engine: Engine,
    pub noise: NoiseModel,
    pub policy: ExecPolicy,
    circuits: AtomicU64,
}

impl Clone for QuantumRuntime {
    fn clone(&self) -> Self {
        QuantumRuntime {
            estimation: self.estimation,
            engine: self.engine,
            noise: self.noise,
            policy: self.policy,
            circuits: AtomicU64::new(self.circuits_executed()),
        }
    }
}

/// Address-conditioned Z estimates, indexed `[ℓ · n_data + d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEstimate {
    /// Estimates; addresses that received no shots are imputed as 0.
    pub z: Vec<f64>,
    /// Raw counts, absent in exact mode.
    pub table: Option<ShotTable>,
    /// Addresses imputed because they received no shots.
    pub missing: usize,
}

/// A circuit whose measured register is `[address | data]`, together with the
/// ideal conditional expectation of every data qubit.
pub(crate) struct AddressedJob<'a> {
    pub n_addr: usize,
    pub n_data: usize,
    pub expected: &'a [f64],
    pub build: &'a dyn Fn() -> Result<CircuitSpec>,
}

impl QuantumRuntime {
    pub fn new(estimation: Estimation) -> Self {
        QuantumRuntime {
            estimation,
            engine: Engine::default(),
            noise: NoiseModel::ideal(),
            policy: ExecPolicy::default(),
            circuits: AtomicU64::new(0),
        }
    }

    pub fn exact() -> Self {
        QuantumRuntime::new(Estimation::Exact)
    }

    pub fn sampled(budget: ShotBudget) -> Self {
        QuantumRuntime::new(Estimation::Sampled(budget))
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_policy(mut self, policy: ExecPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.estimation == Estimation::Exact
    }

    pub fn circuits_executed(&self) -> u64 {
        self.circuits.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.circuits.store(0, Ordering::Relaxed);
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if !self.noise.is_ideal() {
            if self.is_exact() {
                return Err(Error::argument("noise emulation needs sampled mode"));
            }
            if self.engine != Engine::Statevector {
                return Err(Error::argument("noise emulation needs the statevector engine"));
            }
        }
        if let Estimation::Sampled(b) = self.estimation {
            if b.total(0) == 0 {
                return Err(Error::argument("shot budget must be positive"));
            }
        }
        Ok(())
    }

    pub(crate) fn estimate(&self, job: &AddressedJob<'_>, seed: u64) -> Result<ConditionalEstimate> {
        self.validate()?;
        let k = 1usize << job.n_addr;
        debug_assert_eq!(job.expected.len(), k * job.n_data);
        self.circuits.fetch_add(1, Ordering::Relaxed);
        let table = match (self.estimation, self.engine) {
            (Estimation::Exact, Engine::Analytic) => {
                return Ok(ConditionalEstimate {
                    z: job.expected.iter().map(|v| v.clamp(-1.0, 1.0)).collect(),
                    table: None,
                    missing: 0,
                });
            }
            (Estimation::Exact, Engine::Statevector) => {
                let circuit = (job.build)()?;
                return exact_conditional(&circuit, job.n_addr, job.n_data);
            }
            (Estimation::Sampled(budget), Engine::Statevector) => {
                let circuit = (job.build)()?;
                let shots = budget.total(job.n_addr);
                let outcomes = if self.noise.is_ideal() {
                    run_circuit(&circuit, shots, seed)?
                } else {
                    run_noisy_with(&circuit, &self.noise, shots, seed, ExecPolicy::Sequential)?
                };
                ShotTable::from_outcomes(&outcomes, job.n_addr, job.n_data)?
            }
            (Estimation::Sampled(budget), Engine::Analytic) => analytic_sample(job, budget.total(job.n_addr), seed),
        };
        let mut z = vec![0.0; k * job.n_data];
        let mut missing = 0;
        for l in 0..k {
            if table.address_shots(l) == 0 {
                missing += 1;
                continue;
            }
            for d in 0..job.n_data {
                z[l * job.n_data + d] = table.z_hat_at(l, d).unwrap_or(0.0);
            }
        }
        Ok(ConditionalEstimate {
            z,
            table: Some(table),
            missing,
        })
    }
}

fn analytic_sample(job: &AddressedJob<'_>, shots: u64, seed: u64) -> ShotTable {
    let k = 1usize << job.n_addr;
    let mut rng = rng_from_seed(seed);
    let per_addr = multinomial(&mut rng, shots, &vec![1.0; k]);
    let mut n0 = vec![0u64; k * job.n_data];
    let mut n1 = vec![0u64; k * job.n_data];
    for (l, &n) in per_addr.iter().enumerate() {
        for d in 0..job.n_data {
            let i = l * job.n_data + d;
            let p0 = 0.5 * (1.0 + job.expected[i].clamp(-1.0, 1.0));
            n0[i] = binomial(&mut rng, n, p0);
            n1[i] = n - n0[i];
        }
    }
    ShotTable::from_counts(job.n_addr, job.n_data, n0, n1)
}

/// Conditional `⟨Z_d⟩` given each address, from the exact statevector.
pub(crate) fn exact_conditional(circuit: &CircuitSpec, n_addr: usize, n_data: usize) -> Result<ConditionalEstimate> {
    let measured = circuit.measured_qubits();
    if measured.len() != n_addr + n_data {
        return Err(Error::structure(format!(
            "circuit measures {} qubits, expected {}",
            measured.len(),
            n_addr + n_data
        )));
    }
    let probs = circuit.statevector()?.marginal(&measured)?;
    let k = 1usize << n_addr;
    let mut z = vec![0.0; k * n_data];
    let mut missing = 0;
    for l in 0..k {
        let block = &probs[l << n_data..(l + 1) << n_data];
        let total: f64 = block.iter().sum();
        if total <= 0.0 {
            missing += 1;
            continue;
        }
        for d in 0..n_data {
            let bit = n_data - 1 - d;
            let signed: f64 = block
                .iter()
                .enumerate()
                .map(|(o, p)| if (o >> bit) & 1 == 0 { *p } else { -*p })
                .sum();
            z[l * n_data + d] = signed / total;
        }
    }
    Ok(ConditionalEstimate {
        z,
        table: None,
        missing,
    })
}
