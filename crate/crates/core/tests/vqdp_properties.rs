//! Statistical and structural properties of the product estimator.

use ndarray::Array3;
use rand::Rng;
use vqt_core::par::ExecPolicy;
use vqt_core::rng::{derive_seed, rng_from_seed};
use vqt_core::vqdp::stats::{mean_and_variance, simulate_estimates};
use vqt_core::vqdp::{
    build_vqdp_circuit, estimate_products, vqdp_matmul, Engine, PairBatch, QuantumRuntime, ShotBudget,
};

fn random_tensor(shape: (usize, usize, usize), rng: &mut impl Rng) -> Array3<f64> {
    Array3::from_shape_fn(shape, |_| rng.random_range(-1.0..=1.0))
}

/// Triple-loop reference for `Q·Kᵀ`.
fn classical_scores(q: &Array3<f64>, k: &Array3<f64>) -> Array3<f64> {
    let (b, t, d) = q.dim();
    Array3::from_shape_fn((b, t, t), |(bb, i, j)| {
        (0..d).map(|f| q[[bb, i, f]] * k[[bb, j, f]]).sum()
    })
}

#[test]
fn exact_mode_equals_classical_matmul() {
    let mut rng = rng_from_seed(2024);
    let rt = QuantumRuntime::exact();
    for case in 0..100 {
        let shape = (
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        );
        let q = random_tensor(shape, &mut rng);
        let k = random_tensor(shape, &mut rng);
        let a = vqdp_matmul(&rt, q.view(), k.view(), case).unwrap();
        let want = classical_scores(&q, &k);
        for (x, y) in a.scores.iter().zip(want.iter()) {
            assert!((x - y).abs() < 1e-10, "case {case} shape {shape:?}");
        }
        assert!(a.scores.iter().all(|s| s.abs() <= shape.2 as f64 + 1e-12));
    }
}

#[test]
fn small_exact_example() {
    let mut rng = rng_from_seed(7);
    let q = random_tensor((1, 2, 3), &mut rng);
    let k = random_tensor((1, 2, 3), &mut rng);
    let a = vqdp_matmul(&QuantumRuntime::exact(), q.view(), k.view(), 0).unwrap();
    let want = classical_scores(&q, &k);
    for (x, y) in a.scores.iter().zip(want.iter()) {
        assert!((x - y).abs() < 1e-10);
    }
}

/// Padding addresses hold (0, 0): growing the batch into a larger register
/// leaves the valid scores untouched.
#[test]
fn padding_is_neutral() {
    let mut rng = rng_from_seed(8);
    for (b, t) in [(1, 3), (2, 3), (3, 2)] {
        let q = random_tensor((b, t, 2), &mut rng);
        let k = random_tensor((b, t, 2), &mut rng);
        let a = vqdp_matmul(&QuantumRuntime::exact(), q.view(), k.view(), 0).unwrap();
        let want = classical_scores(&q, &k);
        for (x, y) in a.scores.iter().zip(want.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
        let batch = vqt_core::vqdp::build_pair_batch(q.view(), k.view(), 0).unwrap();
        for l in batch.n_valid()..batch.n_addresses() {
            assert_eq!(batch.pair(l), (0.0, 0.0));
        }
    }
}

#[test]
fn estimator_is_unbiased() {
    let trials = 10_000;
    for &(x, y) in &[(0.9, 0.8), (0.5, -0.6), (-0.3, -0.2), (0.0, 0.7), (1.0, -1.0)] {
        let xy: f64 = x * y;
        let m = 100;
        let est = simulate_estimates(xy, m, trials, 11).unwrap();
        let (mean, _) = mean_and_variance(&est);
        let se = ((1.0 - xy * xy) / m as f64 / trials as f64).sqrt();
        assert!((mean - xy).abs() <= 3.0 * se + 1e-15, "xy={xy}: mean {mean}, se {se}");
    }
}

/// The statevector estimator, not only the binomial model, is unbiased.
#[test]
fn circuit_estimates_are_unbiased() {
    let batch = PairBatch::from_pairs(vec![(0.5, -0.6), (0.9, 0.9), (-0.2, 0.4), (0.0, 0.3)]).unwrap();
    let c = build_vqdp_circuit(&batch).unwrap();
    let truth = batch.truth();
    let shots = 4000;
    let runs = 300;
    let mut sums = [0.0; 4];
    for r in 0..runs {
        let t = estimate_products(&c, &batch, shots, derive_seed(1, r)).unwrap();
        for (l, s) in sums.iter_mut().enumerate() {
            *s += t.z_hat(l).unwrap();
        }
    }
    for l in 0..4 {
        let mean = sums[l] / runs as f64;
        // Per-address shots fluctuate around shots/4.
        let se = ((1.0 - truth[l] * truth[l]) / (shots as f64 / 4.0) / runs as f64).sqrt();
        assert!((mean - truth[l]).abs() <= 3.0 * se + 1e-12, "address {l}");
    }
}

#[test]
fn zero_shot_addresses_are_flagged() {
    let batch = PairBatch::from_pairs(vec![(0.1, 0.2); 64]).unwrap();
    let c = build_vqdp_circuit(&batch).unwrap();
    let t = estimate_products(&c, &batch, 8, 0).unwrap();
    let missing = t.missing_addresses();
    assert!(missing.len() >= 56);
    for l in missing {
        assert_eq!(t.z_hat(l), None);
    }
}

/// Residual spread of batches of 32 pairs scales as `1/√M`.
#[test]
fn residual_scale_law() {
    let mut rng = rng_from_seed(99);
    let batches: Vec<PairBatch> = (0..30)
        .map(|_| {
            PairBatch::from_pairs(
                (0..32)
                    .map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    let mut normalised = Vec::new();
    for m in [20_000u64, 80_000, 320_000] {
        let rt = QuantumRuntime::sampled(ShotBudget::PerCircuit(m));
        let mut residuals = Vec::new();
        for (i, b) in batches.iter().enumerate() {
            let est = rt.products(b, derive_seed(m, i as u64)).unwrap();
            let truth = b.truth();
            residuals.extend((0..32).map(|l| est.z[l] - truth[l]));
        }
        let (_, var) = mean_and_variance(&residuals);
        normalised.push(var.sqrt() * (m as f64).sqrt());
    }
    let first = normalised[0];
    for v in &normalised {
        assert!((v / first - 1.0).abs() < 0.15, "{normalised:?}");
    }
}

#[test]
fn engines_agree_in_distribution() {
    let batch = PairBatch::from_pairs(vec![(0.8, -0.5), (0.3, 0.3), (-1.0, 0.6)]).unwrap();
    let runs = 400;
    let mut means = [[0.0; 3]; 2];
    for (e, engine) in [Engine::Statevector, Engine::Analytic].into_iter().enumerate() {
        let rt = QuantumRuntime::sampled(ShotBudget::PerCircuit(2000)).with_engine(engine);
        for r in 0..runs {
            let est = rt.products(&batch, derive_seed(3, r)).unwrap();
            for (m, z) in means[e].iter_mut().zip(&est.z) {
                *m += z / runs as f64;
            }
        }
    }
    for l in 0..3 {
        assert!((means[0][l] - means[1][l]).abs() < 0.01, "{means:?}");
    }
}

#[test]
fn parallel_and_sequential_agree_bitwise() {
    let mut rng = rng_from_seed(12);
    let q = random_tensor((2, 4, 6), &mut rng);
    let k = random_tensor((2, 4, 6), &mut rng);
    let seq = QuantumRuntime::sampled(ShotBudget::PerCircuit(5000)).with_policy(ExecPolicy::Sequential);
    let par = QuantumRuntime::sampled(ShotBudget::PerCircuit(5000)).with_policy(ExecPolicy::Parallel);
    let a = vqdp_matmul(&seq, q.view(), k.view(), 77).unwrap();
    let b = vqdp_matmul(&par, q.view(), k.view(), 77).unwrap();
    assert_eq!(a, b);
}

/// Score variance is the sum of per-feature product variances, bounded by
/// `d·Var_max` with `Var_max = 1/M` at the per-address shot count.
#[test]
fn score_variance_accounting() {
    let mut rng = rng_from_seed(5);
    let (b, t, d) = (1, 4, 32);
    let q = random_tensor((b, t, d), &mut rng);
    let k = random_tensor((b, t, d), &mut rng);
    let per_address = 1024u64;
    let rt = QuantumRuntime::sampled(ShotBudget::PerAddress(per_address)).with_engine(Engine::Analytic);
    let exact = classical_scores(&q, &k);
    let runs = 200;
    let mut sq = Array3::<f64>::zeros((b, t, t));
    for r in 0..runs {
        let a = vqdp_matmul(&rt, q.view(), k.view(), derive_seed(21, r)).unwrap();
        sq += &(&a.scores - &exact).mapv(|v| v * v);
    }
    let bound = (d as f64 / per_address as f64).sqrt();
    for v in sq.iter() {
        let std = (v / runs as f64).sqrt();
        // Sampling error of a 200-run standard deviation is about 5%.
        assert!(std <= 1.15 * bound, "std {std} above {bound}");
    }
}
