//! Vectorized quantum dot product.
//!
//! All `N = B·T²` query/key pairs of one feature `k` are loaded behind a
//! `⌈log₂ N⌉`-qubit address register by QCrank (x values on data qubit `x`,
//! y values on data qubit `y`). The EHands block, `RZ(π/2)` on `y` followed by
//! `CNOT(x → y)`, leaves `⟨Z_y⟩ = x_ℓ·y_ℓ` conditioned on address `ℓ`. One
//! circuit per feature, summed classically over features, gives `Q·Kᵀ`.

mod export;
mod pairs;
mod runtime;
pub mod stats;
mod table;

use std::f64::consts::FRAC_PI_2;

use ndarray::{Array3, ArrayView3};

use crate::encode::append_qcrank_ladders;
use crate::encode::ladder_controls;
use crate::error::{Error, Result};
use crate::par::try_map_indices;
use crate::sim::{run_circuit, CircuitSpec, Gate};

pub use export::{write_products_csv, PRODUCTS_CSV_HEADER};
pub(crate) use pairs::ceil_log2;
pub use pairs::{build_pair_batch, PairBatch, PairLayout};
pub(crate) use runtime::AddressedJob;
pub use runtime::{ConditionalEstimate, Engine, Estimation, QuantumRuntime, ShotBudget};
pub use table::ShotTable;

/// Shots per address used by the reference accuracy runs.
pub const SHOTS_PER_ADDRESS: u64 = 2500;

/// Address qubits `0..n_addr`, then data qubits `x` and `y`. Measures the
/// address register into `c0…` and `y` into `c{n_addr}`.
pub fn build_vqdp_circuit(batch: &PairBatch) -> Result<CircuitSpec> {
    let n = batch.n_addr();
    let (x_qubit, y_qubit) = (n, n + 1);
    let mut c = CircuitSpec::new(n + 2);
    let addr: Vec<usize> = (0..n).collect();
    for &q in &addr {
        c.push(Gate::h(q))?;
    }
    let (xs, ys) = batch.value_vectors()?;
    append_qcrank_ladders(&mut c, &addr, &[x_qubit, y_qubit], &[xs, ys])?;
    c.push(Gate::rz(y_qubit, FRAC_PI_2))?;
    c.push(Gate::cnot(x_qubit, y_qubit))?;
    for &q in &addr {
        c.measure(q, format!("c{q}"))?;
    }
    c.measure(y_qubit, format!("c{n}"))?;
    Ok(c)
}

fn check_circuit(circuit: &CircuitSpec, batch: &PairBatch) -> Result<()> {
    if circuit.n_qubits() != batch.n_addr() + 2 || circuit.measured().len() != batch.n_addr() + 1 {
        return Err(Error::structure(format!(
            "circuit with {} qubits does not fit a batch with {} address qubits",
            circuit.n_qubits(),
            batch.n_addr()
        )));
    }
    Ok(())
}

/// Runs the product circuit for `shots` shots and groups the `y` outcomes by
/// address. Addresses that received no shots stay at `(0, 0)`; see
/// [`ShotTable::z_hat`].
pub fn estimate_products(circuit: &CircuitSpec, batch: &PairBatch, shots: u64, seed: u64) -> Result<ShotTable> {
    check_circuit(circuit, batch)?;
    let outcomes = run_circuit(circuit, shots, seed)?;
    ShotTable::from_outcomes(&outcomes, batch.n_addr(), 1)
}

/// Shots-free twin of [`estimate_products`]: conditional `⟨Z_y⟩` per address
/// from the exact statevector.
pub fn exact_products(circuit: &CircuitSpec, batch: &PairBatch) -> Result<Vec<f64>> {
    check_circuit(circuit, batch)?;
    Ok(runtime::exact_conditional(circuit, batch.n_addr(), 1)?.z)
}

impl QuantumRuntime {
    /// Estimates every `x_ℓ·y_ℓ` of `batch` with one circuit execution.
    pub fn products(&self, batch: &PairBatch, seed: u64) -> Result<ConditionalEstimate> {
        let expected = batch.truth();
        let build = || build_vqdp_circuit(batch);
        self.estimate(
            &AddressedJob {
                n_addr: batch.n_addr(),
                n_data: 1,
                expected: &expected,
                build: &build,
            },
            seed,
        )
    }
}

/// Output of a batched quantum contraction.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionTensor {
    /// `B×T×T` scores (or `B×T×d` for [`vqdp_contract`]).
    pub scores: Array3<f64>,
    /// Plug-in estimator variance per entry, summed over the contracted
    /// index; zero in exact mode.
    pub variance: Array3<f64>,
    /// Circuits executed, one per feature.
    pub circuits: usize,
    /// Shots per circuit, zero in exact mode.
    pub shots_per_circuit: u64,
    /// Address slots imputed as 0 because no shot landed on them.
    pub missing: usize,
}

fn entry_variance(est: &ConditionalEstimate, addr: usize) -> f64 {
    match &est.table {
        None => 0.0,
        Some(t) => {
            let n = t.address_shots(addr);
            if n == 0 {
                1.0
            } else {
                let z = est.z[addr];
                (1.0 - z * z) / n as f64
            }
        }
    }
}

fn shots_of(rt: &QuantumRuntime, n_addr: usize) -> u64 {
    match rt.estimation {
        Estimation::Exact => 0,
        Estimation::Sampled(b) => b.total(n_addr),
    }
}

/// Batched `Q·Kᵀ`: one product circuit per feature `k`, seeded `seed ⊕ k`.
pub fn vqdp_matmul(rt: &QuantumRuntime, q: ArrayView3<f64>, k: ArrayView3<f64>, seed: u64) -> Result<AttentionTensor> {
    let (b, t, d) = q.dim();
    if k.dim() != (b, t, d) {
        return Err(Error::argument(format!(
            "query shape {:?} differs from key shape {:?}",
            q.shape(),
            k.shape()
        )));
    }
    let per_feature = try_map_indices(rt.policy, d, |f| {
        let batch = build_pair_batch(q, k, f)?;
        let est = rt.products(&batch, seed ^ f as u64)?;
        Ok::<_, Error>((batch, est))
    })?;
    let mut scores = Array3::zeros((b, t, t));
    let mut variance = Array3::zeros((b, t, t));
    let mut missing = 0;
    let mut n_addr = 0;
    for (batch, est) in &per_feature {
        n_addr = batch.n_addr();
        missing += est.missing;
        for bb in 0..b {
            for i in 0..t {
                for j in 0..t {
                    let l = batch.addr_of(bb, i, j).expect("valid attention index");
                    scores[[bb, i, j]] += est.z[l];
                    variance[[bb, i, j]] += entry_variance(est, l);
                }
            }
        }
    }
    if missing > 0 {
        log::warn!("{missing} address slot(s) received no shots and were imputed as 0");
    }
    Ok(AttentionTensor {
        scores,
        variance,
        circuits: d,
        shots_per_circuit: shots_of(rt, n_addr),
        missing,
    })
}

/// Batched `A·V` for `A: B×T×T`, `V: B×T×d`, through the same pair protocol:
/// circuit `k` loads `(A[b,i,j], V[b,j,k])` at address `(b, i, j)` and the
/// products are summed over `j`. Seeds are `seed ⊕ k`.
pub fn vqdp_contract(
    rt: &QuantumRuntime,
    a: ArrayView3<f64>,
    v: ArrayView3<f64>,
    seed: u64,
) -> Result<AttentionTensor> {
    let (b, t, t2) = a.dim();
    let (vb, vt, d) = v.dim();
    if t != t2 || vb != b || vt != t {
        return Err(Error::argument(format!(
            "cannot contract A {:?} with V {:?}",
            a.shape(),
            v.shape()
        )));
    }
    let per_feature = try_map_indices(rt.policy, d, |f| {
        let batch = PairBatch::from_fn(b, t, |bb, i, j| {
            let (x, y) = (a[[bb, i, j]], v[[bb, j, f]]);
            if !(-1.0..=1.0).contains(&x) {
                return Err(Error::Domain {
                    value: x,
                    location: format!("A[b={bb}, i={i}, j={j}]"),
                });
            }
            if !(-1.0..=1.0).contains(&y) {
                return Err(Error::Domain {
                    value: y,
                    location: format!("V[b={bb}, j={j}, k={f}]"),
                });
            }
            Ok((x, y))
        })?;
        let est = rt.products(&batch, seed ^ f as u64)?;
        Ok::<_, Error>((batch, est))
    })?;
    let mut out = Array3::zeros((b, t, d));
    let mut variance = Array3::zeros((b, t, d));
    let mut missing = 0;
    let mut n_addr = 0;
    for (f, (batch, est)) in per_feature.iter().enumerate() {
        n_addr = batch.n_addr();
        missing += est.missing;
        for bb in 0..b {
            for i in 0..t {
                for j in 0..t {
                    let l = batch.addr_of(bb, i, j).expect("valid attention index");
                    out[[bb, i, f]] += est.z[l];
                    variance[[bb, i, f]] += entry_variance(est, l);
                }
            }
        }
    }
    if missing > 0 {
        log::warn!("{missing} address slot(s) received no shots and were imputed as 0");
    }
    Ok(AttentionTensor {
        scores: out,
        variance,
        circuits: d,
        shots_per_circuit: shots_of(rt, n_addr),
        missing,
    })
}

/// Size and cost of the product circuit for a batch of `N` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceReport {
    pub batch_size: usize,
    pub n_qubits: usize,
    pub cx_count: usize,
    pub cx_depth: usize,
    pub recommended_shots: u64,
}

/// Qubits, CX count, CX depth and suggested shots of the circuit that loads
/// `batch_size` addresses onto `n_data` data qubits and (for `n_data ≥ 2`)
/// multiplies the first two with one EHands CNOT.
///
/// For `n_data = 2` and at least two address qubits this is
/// `(n + 2, 2·2^n + 1, 2^n + 1, 2500·2^n)`. Smaller registers cannot reach
/// that depth because ladders share their only control, and the depth is
/// obtained by scheduling the ladder controls.
pub fn resource_report(batch_size: usize, n_data: usize) -> Result<ResourceReport> {
    if batch_size == 0 {
        return Err(Error::argument("batch size must be at least 1"));
    }
    if n_data == 0 {
        return Err(Error::argument("need at least one data qubit"));
    }
    let n_addr = ceil_log2(batch_size);
    let k = 1usize << n_addr;
    let ladder_cx = if n_addr == 0 { 0 } else { k };
    let multiplier = usize::from(n_data >= 2);
    Ok(ResourceReport {
        batch_size,
        n_qubits: n_addr + n_data,
        cx_count: n_data * ladder_cx + multiplier,
        cx_depth: scheduled_cx_depth(n_addr, n_data) + multiplier,
        recommended_shots: SHOTS_PER_ADDRESS * k as u64,
    })
}

/// As-soon-as-possible depth of the interleaved ladders, ignoring rotations.
fn scheduled_cx_depth(n_addr: usize, n_data: usize) -> usize {
    if n_addr == 0 {
        return 0;
    }
    if n_data == 2 && n_addr >= 2 {
        // Consecutive Gray-code control bits differ, so the two ladders
        // never contend for a control in the same slot.
        return 1 << n_addr;
    }
    let seqs: Vec<Vec<usize>> = (0..n_data).map(|d| ladder_controls(n_addr, d)).collect();
    let mut addr_free = vec![0usize; n_addr];
    let mut data_free = vec![0usize; n_data];
    let mut depth = 0;
    for j in 0..1usize << n_addr {
        for (d, seq) in seqs.iter().enumerate() {
            let bit = seq[j];
            let layer = addr_free[bit].max(data_free[d]) + 1;
            addr_free[bit] = layer;
            data_free[d] = layer;
            depth = depth.max(layer);
        }
    }
    // After the ladders the EHands CNOT waits for both data qubits.
    if n_data >= 2 {
        depth = depth.max(data_free[0].max(data_free[1]));
    }
    depth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_pairs(n: usize, seed: u64) -> PairBatch {
        let mut rng = rng_from_seed(seed);
        PairBatch::from_pairs(
            (0..n)
                .map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_pair_is_the_two_qubit_circuit() {
        let batch = PairBatch::from_pairs(vec![(0.5, -0.6)]).unwrap();
        let c = build_vqdp_circuit(&batch).unwrap();
        assert_eq!(c.n_qubits(), 2);
        assert_eq!(c.cx_count(), 1);
        let z = exact_products(&c, &batch).unwrap();
        assert!((z[0] + 0.3).abs() < 1e-14);
    }

    #[test]
    fn exact_products_match_truth() {
        for n in [2, 3, 4, 7, 16, 32] {
            let batch = random_pairs(n, n as u64);
            let c = build_vqdp_circuit(&batch).unwrap();
            let z = exact_products(&c, &batch).unwrap();
            for (l, t) in batch.truth().iter().enumerate() {
                assert!((z[l] - t).abs() < 1e-10, "n={n} l={l}");
            }
        }
    }

    #[test]
    fn table3_circuit_shapes() {
        for (n, qubits, cx, depth) in [(4, 4, 9, 5), (32, 7, 65, 33), (128, 9, 257, 129)] {
            let batch = random_pairs(n, 1);
            let c = build_vqdp_circuit(&batch).unwrap();
            assert_eq!(c.n_qubits(), qubits);
            assert_eq!(c.cx_count(), cx);
            assert_eq!(c.cx_depth(), depth);
        }
    }

    #[test]
    fn deterministic_products() {
        let batch = PairBatch::from_pairs(vec![(1.0, 1.0); 8]).unwrap();
        let c = build_vqdp_circuit(&batch).unwrap();
        let t = estimate_products(&c, &batch, 4000, 3).unwrap();
        for l in 0..8 {
            assert_eq!(t.z_hat(l), Some(1.0));
        }
        assert_eq!(t.shots_total(), 4000);
    }

    #[test]
    fn engines_agree_on_the_distribution() {
        let batch = random_pairs(12, 9);
        let rt_sv = QuantumRuntime::exact();
        let rt_an = QuantumRuntime::exact().with_engine(Engine::Analytic);
        let a = rt_sv.products(&batch, 0).unwrap();
        let b = rt_an.products(&batch, 0).unwrap();
        for (x, y) in a.z.iter().zip(&b.z) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn counter_counts_circuits() {
        let rt = QuantumRuntime::exact().with_engine(Engine::Analytic);
        let q = Array3::from_elem((1, 3, 5), 0.2);
        vqdp_matmul(&rt, q.view(), q.view(), 0).unwrap();
        assert_eq!(rt.circuits_executed(), 5);
    }

    #[test]
    fn zero_tensors_score_zero() {
        let rt = QuantumRuntime::sampled(ShotBudget::PerCircuit(1000));
        let q = Array3::<f64>::zeros((2, 2, 3));
        let a = vqdp_matmul(&rt, q.view(), q.view(), 5).unwrap();
        // x = 0 on every address: the y qubit is |0> or |1> with equal weight
        // only through RY(pi/2); with y = 0 too, the product qubit is uniform,
        // so the estimate is shot noise around 0.
        assert!(a.scores.iter().all(|s| s.abs() <= 3.0));
        let rt = QuantumRuntime::exact();
        let a = vqdp_matmul(&rt, q.view(), q.view(), 5).unwrap();
        assert!(a.scores.iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn noise_requires_sampling_on_statevector() {
        let noise = crate::noise::NoiseModel::new(0.01, 0.0).unwrap();
        let batch = random_pairs(4, 0);
        assert!(QuantumRuntime::exact().with_noise(noise).products(&batch, 0).is_err());
        let rt = QuantumRuntime::sampled(ShotBudget::PerCircuit(100))
            .with_engine(Engine::Analytic)
            .with_noise(noise);
        assert!(rt.products(&batch, 0).is_err());
    }

    #[test]
    fn resource_table() {
        let rows = [
            (4, 4, 10_000, 9, 5),
            (8, 5, 20_000, 17, 9),
            (16, 6, 40_000, 33, 17),
            (32, 7, 80_000, 65, 33),
            (64, 8, 160_000, 129, 65),
            (128, 9, 320_000, 257, 129),
        ];
        for (n, q, shots, cx, depth) in rows {
            let r = resource_report(n, 2).unwrap();
            assert_eq!(
                (r.n_qubits, r.recommended_shots, r.cx_count, r.cx_depth),
                (q, shots, cx, depth)
            );
        }
    }

    #[test]
    fn resource_report_matches_compiled_circuits() {
        for n in 1..=300usize {
            let batch = PairBatch::from_pairs(vec![(0.3, 0.4); n]).unwrap();
            let c = build_vqdp_circuit(&batch).unwrap();
            let r = resource_report(n, 2).unwrap();
            assert_eq!(r.n_qubits, c.n_qubits(), "n={n}");
            assert_eq!(r.cx_count, c.cx_count(), "n={n}");
            assert_eq!(r.cx_depth, c.cx_depth(), "n={n}");
        }
    }

    #[test]
    fn resource_report_degenerate_sizes() {
        // One pair: no address qubits, only the EHands CNOT.
        let r = resource_report(1, 2).unwrap();
        assert_eq!(
            (r.n_qubits, r.cx_count, r.cx_depth, r.recommended_shots),
            (2, 1, 1, 2500)
        );
        assert!(resource_report(0, 2).is_err());
    }
}
