//! Sequential versus data-parallel execution of the attention kernel and of
//! a noisy product sweep.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array3;
use rand::Rng;
use vqt_core::noise::NoiseModel;
use vqt_core::par::ExecPolicy;
use vqt_core::rng::rng_from_seed;
use vqt_core::vqdp::{vqdp_matmul, QuantumRuntime, ShotBudget};

fn tensor(shape: (usize, usize, usize), seed: u64) -> Array3<f64> {
    let mut rng = rng_from_seed(seed);
    Array3::from_shape_fn(shape, |_| rng.random_range(-1.0..=1.0))
}

fn policies() -> [(&'static str, ExecPolicy); 2] {
    [
        ("sequential", ExecPolicy::Sequential),
        ("parallel", ExecPolicy::Parallel),
    ]
}

fn attention_scores(c: &mut Criterion) {
    let q = tensor((10, 10, 10), 1);
    let k = tensor((10, 10, 10), 2);
    let mut group = c.benchmark_group("vqdp_matmul_10x10x10");
    group.sample_size(10);
    for (name, policy) in policies() {
        let rt = QuantumRuntime::sampled(ShotBudget::PerCircuit(300_000)).with_policy(policy);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| vqdp_matmul(&rt, black_box(q.view()), black_box(k.view()), 7).unwrap())
        });
    }
    group.finish();
}

fn noisy_scores(c: &mut Criterion) {
    let q = tensor((2, 4, 16), 3);
    let k = tensor((2, 4, 16), 4);
    let noise = NoiseModel::new(2.5e-3, 0.01).unwrap();
    let mut group = c.benchmark_group("noisy_vqdp_matmul_2x4x16");
    group.sample_size(10);
    for (name, policy) in policies() {
        let rt = QuantumRuntime::sampled(ShotBudget::PerCircuit(20_000))
            .with_noise(noise)
            .with_policy(policy);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| vqdp_matmul(&rt, black_box(q.view()), black_box(k.view()), 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, attention_scores, noisy_scores);
criterion_main!(benches);
