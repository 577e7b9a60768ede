use std::fmt::Write as _;

use super::gate::Gate;
use super::sample::{sample_shots, ShotOutcome};
use super::state::StateVector;
use crate::error::{Error, Result};

/// A qubit read out into a named classical register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measurement {
    pub qubit: usize,
    pub label: String,
}

/// Ordered gate list on `n_qubits` qubits, measured in Z at the end.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitSpec {
    n_qubits: usize,
    gates: Vec<Gate>,
    measured: Vec<Measurement>,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize) -> Self {
        CircuitSpec {
            n_qubits,
            gates: Vec::new(),
            measured: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn measured(&self) -> &[Measurement] {
        &self.measured
    }

    pub fn measured_qubits(&self) -> Vec<usize> {
        self.measured.iter().map(|m| m.qubit).collect()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn measure(&mut self, qubit: usize, label: impl Into<String>) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::structure(format!("cannot measure qubit {qubit}")));
        }
        if self.measured.iter().any(|m| m.qubit == qubit) {
            return Err(Error::structure(format!("qubit {qubit} measured twice")));
        }
        let label = label.into();
        if label.is_empty() || label.contains(char::is_whitespace) {
            return Err(Error::structure(format!("bad register label {label:?}")));
        }
        self.measured.push(Measurement { qubit, label });
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            g.validate(self.n_qubits)?;
        }
        for (k, m) in self.measured.iter().enumerate() {
            if m.qubit >= self.n_qubits || self.measured[..k].iter().any(|o| o.qubit == m.qubit) {
                return Err(Error::structure(format!("bad measurement of qubit {}", m.qubit)));
            }
        }
        Ok(())
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind().is_two_qubit()).count()
    }

    /// Depth counting only two-qubit gates, scheduled as soon as both operands
    /// are free. Single-qubit gates are ignored.
    pub fn cx_depth(&self) -> usize {
        let mut layer = vec![0usize; self.n_qubits];
        let mut depth = 0;
        for g in &self.gates {
            if let Some(c) = g.control() {
                let t = g.target();
                let d = layer[c].max(layer[t]) + 1;
                layer[c] = d;
                layer[t] = d;
                depth = depth.max(d);
            }
        }
        depth
    }

    /// Final state from `|0…0⟩`.
    pub fn statevector(&self) -> Result<StateVector> {
        let mut state = StateVector::zero(self.n_qubits)?;
        for g in &self.gates {
            state.apply(g)?;
        }
        Ok(state)
    }

    /// Line-oriented text form:
    ///
    /// ```text
    /// QUBITS 3
    /// H 0
    /// RY 1.0471975512 2
    /// CNOT 0 2
    /// MEASURE 0 c0
    /// ```
    ///
    /// Gate lines are `KIND angle? qubits…` with angles printed to ten
    /// decimals; two-qubit gates list the control first.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "QUBITS {}", self.n_qubits);
        for g in &self.gates {
            let _ = writeln!(out, "{g}");
        }
        for m in &self.measured {
            let _ = writeln!(out, "MEASURE {} {}", m.qubit, m.label);
        }
        out
    }

    /// Reads the format written by [`CircuitSpec::dump`]. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut circuit: Option<CircuitSpec> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let mut fields = line.split_whitespace();
            let head = fields.next().unwrap_or_default();
            match (head, circuit.as_mut()) {
                ("QUBITS", None) => {
                    let n = fields
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| perr("QUBITS needs a count".into()))?;
                    circuit = Some(CircuitSpec::new(n));
                }
                ("QUBITS", Some(_)) => return Err(perr("duplicate QUBITS header".into())),
                (_, None) => return Err(perr("missing QUBITS header".into())),
                ("MEASURE", Some(c)) => {
                    let q = fields
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| perr("MEASURE needs a qubit".into()))?;
                    let label = fields.next().ok_or_else(|| perr("MEASURE needs a label".into()))?;
                    c.measure(q, label).map_err(|e| perr(e.to_string()))?;
                }
                (_, Some(c)) => {
                    let g: Gate = line.parse().map_err(|e: Error| perr(e.to_string()))?;
                    c.push(g).map_err(|e| perr(e.to_string()))?;
                }
            }
        }
        circuit.ok_or(Error::Parse {
            line: 0,
            msg: "empty circuit text".into(),
        })
    }
}

/// Applies the gates to `|0…0⟩` and samples the measured qubits.
pub fn run_circuit(circuit: &CircuitSpec, n_shots: u64, seed: u64) -> Result<Vec<ShotOutcome>> {
    circuit.validate()?;
    let state = circuit.statevector()?;
    sample_shots(&state, &circuit.measured_qubits(), n_shots, seed)
}
