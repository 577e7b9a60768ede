//! Model-level checks: gradients, straight-through training signal,
//! encoder faithfulness and perplexity.

use ndarray::{Array2, Array3};
use rand::Rng;
use vqt_core::qtransformer::{forward, loss, quantum_perplexity, vnqe_encode, ModelConfig, ModelParams, PassSeeds};
use vqt_core::rng::{derive_seed, rng_from_seed};
use vqt_core::vqdp::{Engine, QuantumRuntime, ShotBudget};

/// Frozen tiny configuration used by the gradient audit.
fn tiny() -> ModelConfig {
    ModelConfig {
        vocab: 10,
        seq_len: 4,
        d_model: 8,
        d_ff: 16,
        blocks: 1,
        heads: 2,
        nq_addr: 2,
        nq_data: 2,
        d_mlp: 12,
        batch: 2,
        dropout: 0.0,
        ..ModelConfig::default()
    }
}

fn batch(cfg: &ModelConfig, seed: u64) -> (Array2<usize>, Array2<usize>) {
    let mut rng = rng_from_seed(seed);
    let mut draw = || Array2::from_shape_fn((cfg.batch, cfg.seq_len), |_| rng.random_range(0..cfg.vocab));
    (draw(), draw())
}

const SEEDS: PassSeeds = PassSeeds {
    circuits: 0,
    dropout: None,
};

#[test]
fn gradient_audit_exact_mode() {
    let cfg = tiny();
    let rt = QuantumRuntime::exact();
    let (x, y) = batch(&cfg, 1);
    let mut params = ModelParams::init(&cfg, 2).unwrap();
    // Perturb layer-norm gains and biases away from (1, 0) so their
    // gradients are generic.
    let mut rng = rng_from_seed(3);
    for p in params.params_mut() {
        p.value.mapv_inplace(|v| v + 0.1 * rng.random_range(-1.0..1.0));
    }
    params.zero_grad();
    loss(&cfg, &mut params, &rt, x.view(), y.view(), SEEDS, true).unwrap();
    let analytic: Vec<(String, Array2<f64>)> = params
        .params()
        .iter()
        .map(|p| (p.name.clone(), p.grad.clone()))
        .collect();

    let h = 1e-5;
    let n_tensors = analytic.len();
    for (pi, (name, grad)) in analytic.into_iter().enumerate() {
        let mut numeric = Array2::<f64>::zeros(grad.dim());
        for idx in 0..grad.len() {
            let (r, c) = (idx / grad.ncols(), idx % grad.ncols());
            let mut eval = |delta: f64| {
                params.params_mut()[pi].value[[r, c]] += delta;
                let l = loss(&cfg, &mut params, &rt, x.view(), y.view(), SEEDS, false).unwrap();
                params.params_mut()[pi].value[[r, c]] -= delta;
                l
            };
            numeric[[r, c]] = (eval(h) - eval(-h)) / (2.0 * h);
        }
        let diff = (&grad - &numeric).mapv(|v| v * v).sum().sqrt();
        let scale = grad
            .mapv(|v| v * v)
            .sum()
            .sqrt()
            .max(numeric.mapv(|v| v * v).sum().sqrt());
        let rel = if scale < 1e-12 { diff } else { diff / scale };
        assert!(rel < 1e-4, "{name}: relative gradient error {rel:e}");
        assert!(scale > 0.0, "{name}: gradient vanishes identically");
    }
    assert!(n_tensors >= 20);
}

#[test]
fn exact_forward_is_pure() {
    let cfg = tiny();
    let params = ModelParams::init(&cfg, 9).unwrap();
    let (x, _) = batch(&cfg, 4);
    let a = forward(&cfg, &params, &QuantumRuntime::exact(), x.view(), 1).unwrap();
    let b = forward(&cfg, &params, &QuantumRuntime::exact(), x.view(), 2).unwrap();
    assert_eq!(a, b);
}

/// Averaged over circuit seeds, sampled-mode gradients approach the exact
/// gradient: the measured layers are unbiased and the backward pass treats
/// them as identity.
#[test]
fn straight_through_gradients_average_to_exact() {
    let cfg = tiny();
    let (x, y) = batch(&cfg, 5);
    let mut params = ModelParams::init(&cfg, 6).unwrap();
    params.zero_grad();
    loss(
        &cfg,
        &mut params,
        &QuantumRuntime::exact(),
        x.view(),
        y.view(),
        SEEDS,
        true,
    )
    .unwrap();
    let exact: Vec<Array2<f64>> = params.params().iter().map(|p| p.grad.clone()).collect();

    let rt = QuantumRuntime::sampled(ShotBudget::PerAddress(4096)).with_engine(Engine::Analytic);
    params.zero_grad();
    let runs = 100;
    for s in 0..runs {
        let seeds = PassSeeds {
            circuits: derive_seed(77, s),
            dropout: None,
        };
        loss(&cfg, &mut params, &rt, x.view(), y.view(), seeds, true).unwrap();
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, e) in params.params().iter().zip(&exact) {
        let mean = p.grad.mapv(|g| g / runs as f64);
        num += (&mean - e).mapv(|v| v * v).sum();
        den += e.mapv(|v| v * v).sum();
    }
    let rel = (num / den).sqrt();
    assert!(rel < 0.05, "mean sampled gradient deviates by {rel}");
}

#[test]
fn sampled_logits_track_exact_logits() {
    let cfg = tiny();
    let params = ModelParams::init(&cfg, 10).unwrap();
    let (x, _) = batch(&cfg, 11);
    let exact = forward(&cfg, &params, &QuantumRuntime::exact(), x.view(), 0).unwrap();
    let rt = QuantumRuntime::sampled(ShotBudget::PerAddress(100_000)).with_engine(Engine::Analytic);
    let sampled = forward(&cfg, &params, &rt, x.view(), 3).unwrap();
    let max_dev = (&exact - &sampled).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_dev < 0.2, "max logit deviation {max_dev}");
}

#[test]
fn perplexity_is_exp_of_loss() {
    let cfg = tiny();
    for s in 0..10 {
        let mut params = ModelParams::init(&cfg, s).unwrap();
        let (x, y) = batch(&cfg, 100 + s);
        let l = loss(
            &cfg,
            &mut params,
            &QuantumRuntime::exact(),
            x.view(),
            y.view(),
            SEEDS,
            false,
        )
        .unwrap();
        let logits = forward(&cfg, &params, &QuantumRuntime::exact(), x.view(), 0).unwrap();
        let rows = logits
            .into_shape_with_order((cfg.batch * cfg.seq_len, cfg.vocab))
            .unwrap();
        let targets: Vec<usize> = y.iter().copied().collect();
        let qpl = quantum_perplexity(rows.view(), &targets).unwrap();
        assert!((qpl - l.exp()).abs() < 1e-10 * qpl.max(1.0));
    }
    let uniform = Array2::<f64>::zeros((3, 100));
    assert!((quantum_perplexity(uniform.view(), &[0, 5, 99]).unwrap() - 100.0).abs() < 1e-9);
    let mut one_hot = Array2::<f64>::from_elem((2, 4), -1e4);
    one_hot[[0, 1]] = 0.0;
    one_hot[[1, 3]] = 0.0;
    assert!((quantum_perplexity(one_hot.view(), &[1, 3]).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn encoder_is_faithful_at_both_widths() {
    let mut rng = rng_from_seed(13);
    for (nq_addr, nq_data, tokens) in [(3usize, 3usize, 8usize), (7, 3, 4)] {
        let q = (1 << nq_addr) * nq_data;
        let a = Array3::from_shape_fn((1, tokens, q), |_| rng.random_range(-1.0..=1.0));
        let out = vnqe_encode(&QuantumRuntime::exact(), a.view(), nq_addr, nq_data, 0).unwrap();
        let dev = (&out - &a).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(dev < 1e-10, "Q_dim {q}: deviation {dev:e}");
    }
}
