use num_complex::Complex64;

use super::gate::Gate;
use super::MAX_QUBITS;
use crate::error::{Error, Result};

/// Dense amplitude vector over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::argument(format!(
                "{n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Wraps an amplitude vector whose length must be a power of two. The
    /// vector is taken as given; callers normalise if they need to.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::argument(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Bit mask of `qubit` inside a basis-state index.
    #[inline]
    pub(crate) fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::structure(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::H { target } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_real_1q(target, [[s, s], [s, -s]]);
            }
            Gate::Ry { target, theta } => {
                let (sin, cos) = (theta / 2.0).sin_cos();
                self.apply_real_1q(target, [[cos, -sin], [sin, cos]]);
            }
            Gate::Rz { target, theta } => {
                let phase0 = Complex64::from_polar(1.0, -theta / 2.0);
                let phase1 = Complex64::from_polar(1.0, theta / 2.0);
                let m = self.mask(target);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & m == 0 { phase0 } else { phase1 };
                }
            }
            Gate::Cnot { control, target } => {
                let (cm, tm) = (self.mask(control), self.mask(target));
                for i in 0..self.amps.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amps.swap(i, i | tm);
                    }
                }
            }
            Gate::Cz { control, target } => {
                let both = self.mask(control) | self.mask(target);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & both == both {
                        *a = -*a;
                    }
                }
            }
        }
        Ok(())
    }

    fn apply_real_1q(&mut self, target: usize, m: [[f64; 2]; 2]) {
        let tm = self.mask(target);
        for i in 0..self.amps.len() {
            if i & tm == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | tm]);
                self.amps[i] = a0 * m[0][0] + a1 * m[0][1];
                self.amps[i | tm] = a0 * m[1][0] + a1 * m[1][1];
            }
        }
    }

    /// Applies a single-qubit Pauli (1 = X, 2 = Y, 3 = Z; 0 is identity).
    pub(crate) fn apply_pauli(&mut self, qubit: usize, pauli: u8) {
        let m = self.mask(qubit);
        let i_unit = Complex64::new(0.0, 1.0);
        match pauli {
            0 => {}
            1 => {
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        self.amps.swap(i, i | m);
                    }
                }
            }
            2 => {
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = -i_unit * a1;
                        self.amps[i | m] = i_unit * a0;
                    }
                }
            }
            3 => {
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            _ => unreachable!("pauli index {pauli}"),
        }
    }

    /// Exact `⟨Z_qubit⟩`.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & m == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// Born distribution over the listed qubits. Outcome index `k` has the
    /// first listed qubit as its most significant bit.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for (k, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..k].contains(&q) {
                return Err(Error::structure(format!("qubit {q} listed twice")));
            }
        }
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let m = qubits.len();
        let mut probs = vec![0.0; 1 << m];
        for (i, a) in self.amps.iter().enumerate() {
            let mut k = 0usize;
            for (pos, &mask) in masks.iter().enumerate() {
                if i & mask != 0 {
                    k |= 1 << (m - 1 - pos);
                }
            }
            probs[k] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Copy with the global phase fixed so the first amplitude above `1e-12`
    /// in magnitude is real and positive.
    pub fn canonical_phase(&self) -> StateVector {
        let mut out = self.clone();
        if let Some(a) = self.amps.iter().find(|a| a.norm() > 1e-12) {
            let phase = a.conj() / a.norm();
            for x in out.amps.iter_mut() {
                *x *= phase;
            }
        }
        out
    }

    /// Largest amplitude difference after fixing both global phases.
    pub fn distance_up_to_phase(&self, other: &StateVector) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        let (a, b) = (self.canonical_phase(), other.canonical_phase());
        a.amps
            .iter()
            .zip(&b.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// Value-semantics wrapper around [`StateVector::apply`].
pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ry_half_pi_on_zero() {
        let s = apply_gate(StateVector::zero(1).unwrap(), &Gate::ry(0, FRAC_PI_2)).unwrap();
        let a = s.amplitudes();
        assert!((a[0] - c(FRAC_PI_4.cos())).norm() < 1e-15);
        assert!((a[1] - c(FRAC_PI_4.sin())).norm() < 1e-15);
    }

    #[test]
    fn ry_zero_is_identity() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        s.apply(&Gate::ry(1, 0.7)).unwrap();
        let before = s.clone();
        s.apply(&Gate::ry(1, 0.0)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn two_value_encoding_closed_form() {
        let (x0, x1) = (0.3f64, -0.8f64);
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&Gate::ry(0, x0.acos())).unwrap();
        s.apply(&Gate::ry(1, x1.acos())).unwrap();
        let want = [
            0.5 * (1.3f64).sqrt() * (0.2f64).sqrt(),
            0.5 * (1.3f64).sqrt() * (1.8f64).sqrt(),
            0.5 * (0.7f64).sqrt() * (0.2f64).sqrt(),
            0.5 * (0.7f64).sqrt() * (1.8f64).sqrt(),
        ];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a - c(w)).norm() < 1e-14, "{a} vs {w}");
        }
    }

    /// EHands block: RY encode, RZ(pi/2) on the second qubit, then CNOT.
    fn ehands(x0: f64, x1: f64) -> StateVector {
        let mut s = StateVector::zero(2).unwrap();
        for g in [
            Gate::ry(0, x0.acos()),
            Gate::ry(1, x1.acos()),
            Gate::rz(1, FRAC_PI_2),
            Gate::cnot(0, 1),
        ] {
            s.apply(&g).unwrap();
        }
        s
    }

    #[test]
    fn ehands_amplitudes_match_printed_vector() {
        let (x0, x1) = (0.5f64, -0.6f64);
        let s = ehands(x0, x1);
        let i = Complex64::new(0.0, 1.0);
        let g = Complex64::from_polar(0.5, -FRAC_PI_4);
        let want = [
            g * ((1.0 + x0) * (1.0 + x1)).sqrt(),
            g * i * ((1.0 + x0) * (1.0 - x1)).sqrt(),
            g * i * ((1.0 - x0) * (1.0 - x1)).sqrt(),
            g * ((1.0 - x0) * (1.0 + x1)).sqrt(),
        ];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a - w).norm() < 1e-14, "{a} vs {w}");
        }
        assert!((s.expectation_z(1).unwrap() - (-0.30)).abs() < 1e-14);
    }

    #[test]
    fn expectation_basics() {
        let s = StateVector::zero(1).unwrap();
        assert_eq!(s.expectation_z(0).unwrap(), 1.0);
        let plus = apply_gate(s, &Gate::h(0)).unwrap();
        assert!(plus.expectation_z(0).unwrap().abs() < 1e-15);
        assert!(plus.expectation_z(1).is_err());
    }

    #[test]
    fn cnot_squared_is_identity() {
        let mut s = StateVector::zero(3).unwrap();
        for g in [Gate::h(0), Gate::ry(1, 1.1), Gate::ry(2, 0.3), Gate::rz(2, 0.4)] {
            s.apply(&g).unwrap();
        }
        let before = s.clone();
        s.apply(&Gate::cnot(0, 2)).unwrap();
        assert_ne!(s, before);
        s.apply(&Gate::cnot(0, 2)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn ry_inverse() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        s.apply(&Gate::ry(1, 0.9)).unwrap();
        let before = s.clone();
        s.apply(&Gate::ry(0, 2.1)).unwrap();
        s.apply(&Gate::ry(0, -2.1)).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn cz_and_paulis() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        s.apply(&Gate::h(1)).unwrap();
        s.apply(&Gate::cz(0, 1)).unwrap();
        assert!((s.amplitudes()[3] - c(-0.5)).norm() < 1e-15);

        let mut z = StateVector::zero(1).unwrap();
        z.apply_pauli(0, 1);
        assert_eq!(z.expectation_z(0).unwrap(), -1.0);
        z.apply_pauli(0, 2);
        assert_eq!(z.expectation_z(0).unwrap(), 1.0);
        // Y X |0> = Y |1> = -i |0>
        assert!((z.amplitudes()[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn marginal_ordering() {
        // |q0 q1 q2> = |1 0 1>
        let mut s = StateVector::zero(3).unwrap();
        s.apply(&Gate::ry(0, PI)).unwrap();
        s.apply(&Gate::ry(2, PI)).unwrap();
        let m = s.marginal(&[2, 1]).unwrap();
        // outcome (q2, q1) = (1, 0) -> index 0b10
        assert!((m[2] - 1.0).abs() < 1e-12);
        assert!(s.marginal(&[0, 0]).is_err());
    }

    #[test]
    fn phase_canonicalisation() {
        let s = ehands(0.1, 0.2);
        let amps: Vec<Complex64> = s
            .amplitudes()
            .iter()
            .map(|a| a * Complex64::from_polar(1.0, 0.77))
            .collect();
        let t = StateVector::from_amplitudes(amps).unwrap();
        assert!(s.distance_up_to_phase(&t) < 1e-14);
    }

    #[test]
    fn register_limits() {
        assert!(StateVector::zero(super::MAX_QUBITS + 1).is_err());
        assert!(StateVector::from_amplitudes(vec![c(1.0); 3]).is_err());
    }
}
