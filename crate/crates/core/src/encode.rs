//! Value-to-angle encoding and the QCrank uniformly-controlled-RY compiler.
//!
//! A value `x ∈ [-1, 1]` is stored as `RY(arccos x)|0⟩`, whose Z expectation
//! is `x`. QCrank stores `2^n` such values on one data qubit behind an
//! `n`-qubit address register: conditioned on address `|ℓ⟩` the data qubit
//! holds `RY(θ_ℓ)|0⟩`. The block-diagonal rotation is compiled into an
//! alternating RY/CNOT ladder whose CNOT controls walk the address bits in
//! reflected Gray-code order.
//!
//! Address bit `b` of `ℓ` (value `2^b`) lives on the address qubit at
//! position `n - 1 - b` of the most-significant-first address list.

use crate::error::{Error, Result};
use crate::sim::{CircuitSpec, Gate, StateVector};

/// Classical values in `[-1, 1]` with a mask flagging padding zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector {
    values: Vec<f64>,
    pad_mask: Vec<bool>,
}

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &x) in values.iter().enumerate() {
            check_range(x, || format!("index {i}"))?;
        }
        let pad_mask = vec![false; values.len()];
        Ok(ValueVector { values, pad_mask })
    }

    /// Pads with zeros up to `len`.
    pub fn padded(values: Vec<f64>, len: usize) -> Result<Self> {
        if values.len() > len {
            return Err(Error::argument(format!(
                "{} values do not fit in {len} slots",
                values.len()
            )));
        }
        let mut v = ValueVector::new(values)?;
        v.pad_mask.resize(len, true);
        v.values.resize(len, 0.0);
        Ok(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pad_mask(&self) -> &[bool] {
        &self.pad_mask
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn angles(&self) -> AngleVector {
        AngleVector {
            thetas: self.values.iter().map(|x| x.acos()).collect(),
        }
    }
}

/// RY angles in `[0, π]`, one per encoded value.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleVector {
    pub thetas: Vec<f64>,
}

fn check_range(x: f64, location: impl FnOnce() -> String) -> Result<()> {
    // NaN fails both comparisons and is rejected too.
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            value: x,
            location: location(),
        })
    }
}

/// `arccos(x)`: the RY angle whose Z expectation on `|0⟩` is `x`.
pub fn even_encode(x: f64) -> Result<f64> {
    check_range(x, || "even_encode input".to_string())?;
    Ok(x.acos())
}

#[inline]
pub fn gray_code(j: usize) -> usize {
    j ^ (j >> 1)
}

/// Address bit controlling the CNOT after each ladder slot.
///
/// Slot `j` of the unrotated ladder is followed by a CNOT on the bit where
/// `gray(j)` and `gray(j+1)` differ; the final CNOT wraps around on the most
/// significant bit. `rotation` cyclically delays the sequence, so that data
/// qubit `d` (rotation `d`) never shares a control with data qubit `d - 1`
/// in the same slot. Empty when `n_addr == 0`.
pub fn ladder_controls(n_addr: usize, rotation: usize) -> Vec<usize> {
    if n_addr == 0 {
        return Vec::new();
    }
    let k = 1usize << n_addr;
    let base: Vec<usize> = (0..k)
        .map(|j| {
            if j + 1 == k {
                n_addr - 1
            } else {
                (gray_code(j) ^ gray_code(j + 1)).trailing_zeros() as usize
            }
        })
        .collect();
    let r = rotation % k;
    (0..k).map(|j| base[(j + k - r) % k]).collect()
}

/// Address-bit mask of CNOTs already applied before each slot.
fn prefix_masks(n_addr: usize, controls: &[usize]) -> Vec<usize> {
    let k = 1usize << n_addr;
    let mut masks = Vec::with_capacity(k);
    let mut g = 0usize;
    for j in 0..k {
        masks.push(g);
        if let Some(&c) = controls.get(j) {
            g ^= 1 << c;
        }
    }
    masks
}

/// Unnormalised fast Walsh–Hadamard transform:
/// `out[m] = Σ_ℓ (-1)^{popcount(ℓ & m)} v[ℓ]`.
pub fn walsh_hadamard(v: &[f64]) -> Vec<f64> {
    let mut a = v.to_vec();
    let n = a.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (a[j], a[j + h]);
                a[j] = x + y;
                a[j + h] = x - y;
            }
        }
        h *= 2;
    }
    a
}

fn alphas_for_ladder(target_angles: &[f64], n_addr: usize, controls: &[usize]) -> Vec<f64> {
    let k = target_angles.len() as f64;
    let w = walsh_hadamard(target_angles);
    prefix_masks(n_addr, controls).into_iter().map(|g| w[g] / k).collect()
}

fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::argument(format!("length {len} is not a power of two")));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Ladder rotation angles that realise `target_angles` on the unrotated
/// Gray-code ladder.
///
/// Pushing every CNOT through the rotations turns the ladder into
/// `RY(Σ_j (-1)^{ℓ·g_j} α_j)` for control state `ℓ`, where `g_j` is the
/// Gray code of slot `j`. Inverting that Hadamard-type system gives
/// `α_j = 2^{-n} Σ_ℓ (-1)^{ℓ·g_j} θ_ℓ`.
pub fn ucry_angle_transform(target_angles: &[f64]) -> Result<Vec<f64>> {
    let n = log2_exact(target_angles.len())?;
    Ok(alphas_for_ladder(target_angles, n, &ladder_controls(n, 0)))
}

/// A uniformly controlled RY: `RY(target_angles[ℓ])` on `target` when the
/// controls are in basis state `|ℓ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct UcryBlock {
    /// Control qubits, most significant address bit first.
    pub controls: Vec<usize>,
    pub target: usize,
    pub target_angles: AngleVector,
    /// Ladder angles for the unrotated Gray-code sequence.
    pub compiled_alphas: Vec<f64>,
}

impl UcryBlock {
    pub fn new(controls: Vec<usize>, target: usize, target_angles: Vec<f64>) -> Result<Self> {
        let n = log2_exact(target_angles.len())?;
        if n != controls.len() {
            return Err(Error::argument(format!(
                "{} angles need {n} controls, got {}",
                target_angles.len(),
                controls.len()
            )));
        }
        if controls.contains(&target) {
            return Err(Error::structure(format!("target {target} is also a control")));
        }
        let compiled_alphas = ucry_angle_transform(&target_angles)?;
        Ok(UcryBlock {
            controls,
            target,
            target_angles: AngleVector { thetas: target_angles },
            compiled_alphas,
        })
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }

    /// The RY/CNOT ladder for this block.
    pub fn gates(&self) -> Vec<Gate> {
        ladder_gates(&self.controls, self.target, &self.target_angles.thetas, 0)
    }
}

fn ladder_gates(controls: &[usize], target: usize, thetas: &[f64], rotation: usize) -> Vec<Gate> {
    let n = controls.len();
    let seq = ladder_controls(n, rotation);
    let alphas = alphas_for_ladder(thetas, n, &seq);
    let mut gates = Vec::with_capacity(2 * alphas.len());
    for (j, &a) in alphas.iter().enumerate() {
        gates.push(Gate::ry(target, a));
        if let Some(&bit) = seq.get(j) {
            gates.push(Gate::cnot(controls[n - 1 - bit], target));
        }
    }
    gates
}

/// Applies `diag(RY(θ_0), …, RY(θ_{2^n - 1}))` directly, without compiling.
pub fn apply_ucry_direct(mut state: StateVector, block: &UcryBlock) -> Result<StateVector> {
    let n_qubits = state.n_qubits();
    for &q in block.controls.iter().chain(std::iter::once(&block.target)) {
        if q >= n_qubits {
            return Err(Error::structure(format!(
                "qubit {q} out of range for {n_qubits} qubits"
            )));
        }
    }
    let tm = state.mask(block.target);
    let cmasks: Vec<usize> = block.controls.iter().map(|&q| state.mask(q)).collect();
    let n = cmasks.len();
    let trig: Vec<(f64, f64)> = block.target_angles.thetas.iter().map(|t| (t / 2.0).sin_cos()).collect();
    let mut amps = state.amplitudes().to_vec();
    for i in 0..amps.len() {
        if i & tm != 0 {
            continue;
        }
        let mut ell = 0usize;
        for (pos, &m) in cmasks.iter().enumerate() {
            if i & m != 0 {
                ell |= 1 << (n - 1 - pos);
            }
        }
        let (sin, cos) = trig[ell];
        let (a0, a1) = (amps[i], amps[i | tm]);
        amps[i] = a0 * cos - a1 * sin;
        amps[i | tm] = a0 * sin + a1 * cos;
    }
    state = StateVector::from_amplitudes(amps)?;
    Ok(state)
}

/// Appends QCrank loading of `data[d]` onto `data_qubits[d]` behind the
/// address register `addr_qubits` (most significant first). No Hadamards.
///
/// Ladders for different data qubits are interleaved slot by slot, data
/// qubit `d` using ladder rotation `d`.
pub(crate) fn append_qcrank_ladders(
    circuit: &mut CircuitSpec,
    addr_qubits: &[usize],
    data_qubits: &[usize],
    data: &[ValueVector],
) -> Result<()> {
    let n_addr = addr_qubits.len();
    let k = 1usize << n_addr;
    if data.len() != data_qubits.len() {
        return Err(Error::argument(format!(
            "{} value vectors for {} data qubits",
            data.len(),
            data_qubits.len()
        )));
    }
    let ladders: Vec<Vec<Gate>> = data
        .iter()
        .zip(data_qubits)
        .enumerate()
        .map(|(d, (values, &q))| {
            if values.len() != k {
                return Err(Error::argument(format!(
                    "data qubit {d} has {} values, expected 2^{n_addr} = {k}",
                    values.len()
                )));
            }
            Ok(ladder_gates(addr_qubits, q, &values.angles().thetas, d))
        })
        .collect::<Result<_>>()?;
    let per_slot = if n_addr == 0 { 1 } else { 2 };
    for j in 0..k {
        for ladder in &ladders {
            for g in &ladder[j * per_slot..(j + 1) * per_slot] {
                circuit.push(*g)?;
            }
        }
    }
    Ok(())
}

/// QCrank circuit: Hadamards on `n_addr` address qubits (qubits
/// `0..n_addr`), then one ladder per data qubit (qubits `n_addr..`).
/// Measures every qubit; address registers are `c0…`, data registers `d0…`.
pub fn compile_qcrank(batch: &[ValueVector], n_addr: usize, n_data: usize) -> Result<CircuitSpec> {
    if batch.len() != n_data {
        return Err(Error::argument(format!(
            "{} value vectors for {n_data} data qubits",
            batch.len()
        )));
    }
    let mut c = CircuitSpec::new(n_addr + n_data);
    let addr: Vec<usize> = (0..n_addr).collect();
    let data: Vec<usize> = (n_addr..n_addr + n_data).collect();
    for &q in &addr {
        c.push(Gate::h(q))?;
    }
    append_qcrank_ladders(&mut c, &addr, &data, batch)?;
    for &q in &addr {
        c.measure(q, format!("c{q}"))?;
    }
    for (d, &q) in data.iter().enumerate() {
        c.measure(q, format!("d{d}"))?;
    }
    Ok(c)
}
