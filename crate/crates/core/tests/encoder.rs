//! QCrank compiler soundness against the direct block-diagonal rotation.

use proptest::prelude::*;
use rand::Rng;
use vqt_core::encode::{apply_ucry_direct, compile_qcrank, even_encode, ucry_angle_transform, UcryBlock, ValueVector};
use vqt_core::rng::rng_from_seed;
use vqt_core::sim::{Gate, StateVector};

fn random_angles(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..1usize << n)
        .map(|_| rng.random_range(0.0..std::f64::consts::PI))
        .collect()
}

/// Hadamards on the controls, then either the compiled ladder or the direct
/// rotation; the two states must agree up to global phase.
fn compiled_vs_direct(n: usize, angles: Vec<f64>) -> f64 {
    let controls: Vec<usize> = (0..n).collect();
    let block = UcryBlock::new(controls, n, angles).unwrap();
    let mut base = StateVector::zero(n + 1).unwrap();
    for q in 0..n {
        base.apply(&Gate::h(q)).unwrap();
    }
    let mut compiled = base.clone();
    for g in block.gates() {
        compiled.apply(&g).unwrap();
    }
    let direct = apply_ucry_direct(base, &block).unwrap();
    compiled.distance_up_to_phase(&direct)
}

#[test]
fn compiler_is_sound_for_one_to_five_address_qubits() {
    for n in 1..=5 {
        for seed in 0..10 {
            let d = compiled_vs_direct(n, random_angles(n, seed * 31 + n as u64));
            assert!(d < 1e-10, "n={n} seed={seed}: distance {d}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn soundness_on_arbitrary_angles(angles in (1usize..=4).prop_flat_map(|n| prop::collection::vec(-3.2f64..3.2, 1 << n))) {
        let n = angles.len().trailing_zeros() as usize;
        prop_assert!(compiled_vs_direct(n, angles) < 1e-10);
    }

    #[test]
    fn transform_is_linear(
        pair in (0usize..=5).prop_flat_map(|n| (prop::collection::vec(-3.0f64..3.0, 1 << n), prop::collection::vec(-3.0f64..3.0, 1 << n)))
    ) {
        let (a, b) = pair;
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ta = ucry_angle_transform(&a).unwrap();
        let tb = ucry_angle_transform(&b).unwrap();
        let ts = ucry_angle_transform(&sum).unwrap();
        for i in 0..ts.len() {
            prop_assert!((ts[i] - ta[i] - tb[i]).abs() < 1e-12);
        }
    }

    /// Every conditional ⟨Z⟩ of every data qubit equals the loaded value.
    #[test]
    fn qcrank_reads_back_its_values(
        (n_addr, n_data, seed) in (0usize..=4, 1usize..=3, any::<u64>())
    ) {
        let k = 1usize << n_addr;
        let mut rng = rng_from_seed(seed);
        let values: Vec<Vec<f64>> = (0..n_data).map(|_| (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
        let data: Vec<ValueVector> = values.iter().map(|v| ValueVector::new(v.clone()).unwrap()).collect();
        let c = compile_qcrank(&data, n_addr, n_data).unwrap();
        prop_assert_eq!(c.cx_count(), if n_addr == 0 { 0 } else { n_data * k });
        prop_assert_eq!(c.gates().iter().filter(|g| g.angle().is_some()).count(), n_data * k);
        let probs = c.statevector().unwrap().marginal(&c.measured_qubits()).unwrap();
        for l in 0..k {
            let block = &probs[l << n_data..(l + 1) << n_data];
            let total: f64 = block.iter().sum();
            for (d, v) in values.iter().enumerate() {
                let bit = n_data - 1 - d;
                let z: f64 = block.iter().enumerate().map(|(o, p)| if (o >> bit) & 1 == 0 { *p } else { -*p }).sum::<f64>() / total;
                prop_assert!((z - v[l]).abs() < 1e-10);
            }
            prop_assert!((total - 1.0 / k as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn arccos_round_trip() {
    let mut rng = rng_from_seed(4);
    for _ in 0..10_000 {
        let x: f64 = rng.random_range(-1.0..=1.0);
        assert!((even_encode(x).unwrap().cos() - x).abs() < 1e-12);
    }
}

#[test]
fn padding_is_exact_zero() {
    let v = ValueVector::padded(vec![0.5, -0.25, 1.0], 8).unwrap();
    assert_eq!(&v.values()[3..], &[0.0; 5]);
    assert_eq!(v.pad_mask().iter().filter(|&&m| m).count(), 5);
}

#[test]
fn uniform_angles_compile_to_one_rotation() {
    let a = ucry_angle_transform(&[0.7; 8]).unwrap();
    assert!((a[0] - 0.7).abs() < 1e-15);
    assert!(a[1..].iter().all(|x| x.abs() < 1e-15));
}
