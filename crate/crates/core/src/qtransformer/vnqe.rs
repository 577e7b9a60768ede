//! Vectorized nonlinear quantum encoder for the expressive head.
//!
//! A `Q_dim = 2^{nq_addr}·nq_data` feature vector of one token is split into
//! `nq_data` chunks of `2^{nq_addr}` values, chunk `d` loaded by QCrank onto
//! data qubit `d`. All tokens of a batch share one circuit: the address
//! register is `[token bits | nq_addr bits]`, so address
//! `ℓ = token·2^{nq_addr} + m` holds feature `d·2^{nq_addr} + m` on data qubit
//! `d`. The conditional `⟨Z⟩` of every (address, data qubit) is the encoded
//! value, so in exact mode the encoder returns its input.

use ndarray::{Array3, ArrayView3};

use crate::encode::{compile_qcrank, ValueVector};
use crate::error::{Error, Result};
use crate::vqdp::{ceil_log2, AddressedJob, QuantumRuntime};

/// Number of features carried by `nq_addr` address and `nq_data` data qubits.
pub fn q_dim(nq_addr: usize, nq_data: usize) -> usize {
    (1usize << nq_addr) * nq_data
}

/// Fewest qubits able to carry `q_dim` features, `min_k k + ⌈Q_dim/2^k⌉`
/// over `1 ≤ k ≤ ⌊log₂ Q_dim⌋`, and the looser `⌈log₂ Q_dim⌉ + 1`.
pub fn qubit_bounds(q_dim: usize) -> Result<(usize, usize)> {
    if q_dim == 0 {
        return Err(Error::argument("Q_dim must be at least 1"));
    }
    let loose = ceil_log2(q_dim) + 1;
    let max_k = (usize::BITS - 1 - q_dim.leading_zeros()) as usize;
    // With Q_dim = 1 the range is empty; a single data qubit suffices.
    let exact = (1..=max_k).map(|k| k + q_dim.div_ceil(1 << k)).min().unwrap_or(1);
    Ok((exact, loose))
}

/// Encodes `a` (`B×T×Q_dim`, entries in `[-1, 1]`) with one circuit and
/// returns the measured features in the same layout.
pub fn vnqe_encode(
    rt: &QuantumRuntime,
    a: ArrayView3<f64>,
    nq_addr: usize,
    nq_data: usize,
    seed: u64,
) -> Result<Array3<f64>> {
    let (b, t, q) = a.dim();
    if q != q_dim(nq_addr, nq_data) {
        return Err(Error::structure(format!(
            "feature length {q} differs from Q_dim = 2^{nq_addr}·{nq_data} = {}",
            q_dim(nq_addr, nq_data)
        )));
    }
    for ((bb, tt, f), &v) in a.indexed_iter() {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::Domain {
                value: v,
                location: format!("encoder input [b={bb}, t={tt}, q={f}]"),
            });
        }
    }
    let tokens = b * t;
    let n_addr = ceil_log2(tokens) + nq_addr;
    let m_count = 1usize << nq_addr;
    let k = 1usize << n_addr;
    let mut expected = vec![0.0; k * nq_data];
    for tok in 0..tokens {
        let (bb, tt) = (tok / t, tok % t);
        for m in 0..m_count {
            for d in 0..nq_data {
                expected[(tok * m_count + m) * nq_data + d] = a[[bb, tt, d * m_count + m]];
            }
        }
    }
    let build = || {
        let data = (0..nq_data)
            .map(|d| ValueVector::new((0..k).map(|l| expected[l * nq_data + d]).collect()))
            .collect::<Result<Vec<_>>>()?;
        compile_qcrank(&data, n_addr, nq_data)
    };
    let est = rt.estimate(
        &AddressedJob {
            n_addr,
            n_data: nq_data,
            expected: &expected,
            build: &build,
        },
        seed,
    )?;
    if est.missing > 0 {
        log::warn!(
            "{} encoder address(es) received no shots and were imputed as 0",
            est.missing
        );
    }
    let mut out = Array3::zeros((b, t, q));
    for tok in 0..tokens {
        let (bb, tt) = (tok / t, tok % t);
        for m in 0..m_count {
            for d in 0..nq_data {
                out[[bb, tt, d * m_count + m]] = est.z[(tok * m_count + m) * nq_data + d];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vqdp::{Engine, ShotBudget};

    #[test]
    fn dimensions() {
        assert_eq!(q_dim(3, 3), 24);
        assert_eq!(q_dim(6, 6), 384);
        for n in 2..10 {
            assert_eq!(q_dim(n - 1, 1), 1 << (n - 1));
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(qubit_bounds(32).unwrap().1, 6);
        assert_eq!(qubit_bounds(24).unwrap(), (6, 6));
        assert_eq!(qubit_bounds(1).unwrap(), (1, 1));
        assert!(qubit_bounds(0).is_err());
        // The loose bound is never below the exact minimum.
        for q in 1..2000 {
            let (e, l) = qubit_bounds(q).unwrap();
            assert!(e <= l, "q={q}");
        }
    }

    #[test]
    fn exact_round_trip_on_both_engines() {
        let a = Array3::from_shape_fn((1, 3, 8), |(_, t, q)| ((t * 8 + q) as f64 * 0.37).sin());
        for engine in [Engine::Statevector, Engine::Analytic] {
            let rt = QuantumRuntime::exact().with_engine(engine);
            let out = vnqe_encode(&rt, a.view(), 2, 2, 0).unwrap();
            for (x, y) in out.iter().zip(a.iter()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_input_gives_zero_features() {
        let a = Array3::zeros((2, 2, 24));
        let out = vnqe_encode(&QuantumRuntime::exact(), a.view(), 3, 3, 0).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sampled_engines_agree_statistically() {
        let a = Array3::from_shape_fn((1, 2, 4), |(_, t, q)| if (t + q) % 2 == 0 { 0.6 } else { -0.2 });
        let sv = QuantumRuntime::sampled(ShotBudget::PerAddress(20_000));
        let an = QuantumRuntime::sampled(ShotBudget::PerAddress(20_000)).with_engine(Engine::Analytic);
        let x = vnqe_encode(&sv, a.view(), 1, 2, 3).unwrap();
        let y = vnqe_encode(&an, a.view(), 1, 2, 3).unwrap();
        for ((u, v), w) in x.iter().zip(y.iter()).zip(a.iter()) {
            assert!((u - w).abs() < 0.04);
            assert!((v - w).abs() < 0.04);
        }
    }

    #[test]
    fn layout_checks() {
        let a = Array3::zeros((1, 1, 5));
        assert!(matches!(
            vnqe_encode(&QuantumRuntime::exact(), a.view(), 1, 2, 0),
            Err(Error::Structure(_))
        ));
        let a = Array3::from_elem((1, 1, 4), 1.5);
        assert!(matches!(
            vnqe_encode(&QuantumRuntime::exact(), a.view(), 1, 2, 0),
            Err(Error::Domain { .. })
        ));
    }
}
