//! Noise emulation and linear calibration.

use rand::Rng;
use vqt_core::noise::{fit_scale, run_noisy, NoiseModel};
use vqt_core::rng::{derive_seed, rng_from_seed};
use vqt_core::sim::{run_circuit, CircuitSpec};
use vqt_core::vqdp::stats::mean_and_variance;
use vqt_core::vqdp::{build_vqdp_circuit, PairBatch, QuantumRuntime, ShotBudget};

fn random_batches(n: usize, pairs: usize, seed: u64) -> Vec<PairBatch> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            PairBatch::from_pairs(
                (0..pairs)
                    .map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
                    .collect(),
            )
            .unwrap()
        })
        .collect()
}

fn rmse(rt: &QuantumRuntime, batches: &[PairBatch], seed: u64) -> f64 {
    let mut sq = Vec::new();
    for (i, b) in batches.iter().enumerate() {
        let est = rt.products(b, derive_seed(seed, i as u64)).unwrap();
        let truth = b.truth();
        sq.extend((0..b.n_valid()).map(|l| (est.z[l] - truth[l]).powi(2)));
    }
    (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
}

#[test]
fn ideal_noise_is_bit_identical() {
    let batch = random_batches(1, 16, 1).pop().unwrap();
    let c = build_vqdp_circuit(&batch).unwrap();
    assert_eq!(
        run_noisy(&c, &NoiseModel::ideal(), 10_000, 5).unwrap(),
        run_circuit(&c, 10_000, 5).unwrap()
    );
}

#[test]
fn readout_coin_flip() {
    let mut c = CircuitSpec::new(1);
    c.measure(0, "c0").unwrap();
    let shots = 40_000;
    let out = run_noisy(&c, &NoiseModel::new(0.0, 0.5).unwrap(), shots, 2).unwrap();
    let n0 = out.iter().find(|o| o.outcome == 0).map_or(0, |o| o.multiplicity) as f64;
    let sigma = (0.25 / shots as f64).sqrt();
    assert!((n0 / shots as f64 - 0.5).abs() < 4.0 * sigma);
}

#[test]
fn rmse_grows_with_gate_error() {
    let batches = random_batches(30, 32, 3);
    let mut last = 0.0;
    for p in [0.0, 1e-3, 2.5e-3, 1e-2] {
        let rt = QuantumRuntime::sampled(ShotBudget::PerCircuit(80_000)).with_noise(NoiseModel::new(p, 0.0).unwrap());
        let e = rmse(&rt, &batches, 17);
        assert!(e >= last, "p={p}: rmse {e} < {last}");
        last = e;
    }
    assert!(last > 0.017);
}

#[test]
fn rmse_grows_with_circuit_size_under_noise() {
    let noise = NoiseModel::new(2.5e-3, 0.0).unwrap();
    let rt = QuantumRuntime::sampled(ShotBudget::PerAddress(2500)).with_noise(noise);
    let mut last = 0.0;
    for pairs in [4, 16, 64] {
        let e = rmse(&rt, &random_batches(10, pairs, pairs as u64), 1);
        assert!(e > last, "pairs {pairs}: {e}");
        last = e;
    }
}

#[test]
fn calibration_recovers_injected_attenuation() {
    let batches = random_batches(30, 32, 4);
    let rt = QuantumRuntime::sampled(ShotBudget::PerCircuit(80_000));
    for s in [0.45, 0.7, 0.9] {
        let mut measured = Vec::new();
        let mut truth = Vec::new();
        for (i, b) in batches.iter().enumerate() {
            let est = rt.products(b, derive_seed(8, i as u64)).unwrap();
            measured.extend(est.z[..32].iter().map(|z| s * z));
            truth.extend_from_slice(&b.truth()[..32]);
        }
        let cal = fit_scale(&measured, &truth).unwrap();
        assert!((cal.scale * s - 1.0).abs() < 0.05, "s={s}: scale {}", cal.scale);
    }
}

#[test]
fn calibration_does_not_worsen_noisy_data() {
    let batches = random_batches(10, 32, 6);
    let rt = QuantumRuntime::sampled(ShotBudget::PerCircuit(80_000)).with_noise(NoiseModel::new(1e-2, 0.02).unwrap());
    let mut measured = Vec::new();
    let mut truth = Vec::new();
    for (i, b) in batches.iter().enumerate() {
        let est = rt.products(b, i as u64).unwrap();
        measured.extend_from_slice(&est.z[..32]);
        truth.extend_from_slice(&b.truth()[..32]);
    }
    let raw: Vec<f64> = measured.iter().zip(&truth).map(|(m, t)| m - t).collect();
    let raw_rmse = (raw.iter().map(|r| r * r).sum::<f64>() / raw.len() as f64).sqrt();
    let cal = fit_scale(&measured, &truth).unwrap();
    assert!(cal.fit_rmse <= raw_rmse);
    // Depolarizing noise contracts the estimates, so the correction enlarges.
    assert!(cal.scale > 1.0);
    let _ = mean_and_variance(&raw);
}
