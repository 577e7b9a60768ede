use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    Ry,
    Rz,
    Cnot,
    Cz,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
        }
    }

    pub fn has_angle(self) -> bool {
        matches!(self, GateKind::Ry | GateKind::Rz)
    }

    pub fn is_two_qubit(self) -> bool {
        matches!(self, GateKind::Cnot | GateKind::Cz)
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(GateKind::H),
            "RY" => Ok(GateKind::Ry),
            "RZ" => Ok(GateKind::Rz),
            "CNOT" | "CX" => Ok(GateKind::Cnot),
            "CZ" => Ok(GateKind::Cz),
            other => Err(Error::structure(format!("unknown gate kind {other:?}"))),
        }
    }
}

/// One gate of the supported set. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H { target: usize },
    Ry { target: usize, theta: f64 },
    Rz { target: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    Cz { control: usize, target: usize },
}

impl Gate {
    pub fn h(target: usize) -> Self {
        Gate::H { target }
    }

    pub fn ry(target: usize, theta: f64) -> Self {
        Gate::Ry { target, theta }
    }

    pub fn rz(target: usize, theta: f64) -> Self {
        Gate::Rz { target, theta }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Gate::Cz { control, target }
    }

    /// Builds a gate from its loose parts, as read from a dump line.
    pub fn from_parts(kind: GateKind, angle: Option<f64>, qubits: &[usize]) -> Result<Self> {
        let want = if kind.is_two_qubit() { 2 } else { 1 };
        if qubits.len() != want {
            return Err(Error::structure(format!(
                "{} takes {want} qubit(s), got {}",
                kind.name(),
                qubits.len()
            )));
        }
        if kind.has_angle() != angle.is_some() {
            return Err(Error::structure(if kind.has_angle() {
                format!("{} requires an angle", kind.name())
            } else {
                format!("{} takes no angle", kind.name())
            }));
        }
        let gate = match kind {
            GateKind::H => Gate::h(qubits[0]),
            GateKind::Ry => Gate::ry(qubits[0], angle.unwrap_or_default()),
            GateKind::Rz => Gate::rz(qubits[0], angle.unwrap_or_default()),
            GateKind::Cnot => Gate::cnot(qubits[0], qubits[1]),
            GateKind::Cz => Gate::cz(qubits[0], qubits[1]),
        };
        if let (Some(c), t) = (gate.control(), gate.target()) {
            if c == t {
                return Err(Error::structure(format!("control and target are both qubit {t}")));
            }
        }
        Ok(gate)
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H { .. } => GateKind::H,
            Gate::Ry { .. } => GateKind::Ry,
            Gate::Rz { .. } => GateKind::Rz,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Cz { .. } => GateKind::Cz,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Ry { theta, .. } | Gate::Rz { theta, .. } => Some(theta),
            _ => None,
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Gate::H { target }
            | Gate::Ry { target, .. }
            | Gate::Rz { target, .. }
            | Gate::Cnot { target, .. }
            | Gate::Cz { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot { control, .. } | Gate::Cz { control, .. } => Some(control),
            _ => None,
        }
    }

    /// Qubits in dump order: control first for two-qubit gates.
    pub fn qubits(&self) -> Vec<usize> {
        match self.control() {
            Some(c) => vec![c, self.target()],
            None => vec![self.target()],
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(Error::structure(format!(
                    "{} references qubit {q} but the register has {n_qubits}",
                    self.kind().name()
                )));
            }
        }
        if self.control() == Some(self.target()) {
            return Err(Error::structure(format!(
                "control and target are both qubit {}",
                self.target()
            )));
        }
        if let Some(a) = self.angle() {
            if !a.is_finite() {
                return Err(Error::structure(format!("non-finite angle {a}")));
            }
        }
        Ok(())
    }
}

/// One dump line: `KIND angle? qubits…`, angle with ten decimals.
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind().name())?;
        if let Some(a) = self.angle() {
            write!(f, " {a:.10}")?;
        }
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut fields = line.split_whitespace();
        let kind: GateKind = fields
            .next()
            .ok_or_else(|| Error::structure("empty gate line"))?
            .parse()?;
        let rest: Vec<&str> = fields.collect();
        let (angle, qubit_fields) = if kind.has_angle() {
            // An RY/RZ line with only a qubit field is missing its angle.
            if rest.len() < 2 {
                return Err(Error::structure(format!("{} requires an angle", kind.name())));
            }
            let a: f64 = rest[0]
                .parse()
                .map_err(|_| Error::structure(format!("bad angle {:?}", rest[0])))?;
            (Some(a), &rest[1..])
        } else {
            (None, &rest[..])
        };
        let qubits = qubit_fields
            .iter()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::structure(format!("bad qubit index {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Gate::from_parts(kind, angle, &qubits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_line_format() {
        let g = Gate::ry(4, std::f64::consts::FRAC_PI_3);
        assert_eq!(g.to_string(), "RY 1.0471975512 4");
        assert_eq!(Gate::cnot(0, 3).to_string(), "CNOT 0 3");
        assert_eq!(Gate::h(2).to_string(), "H 2");
    }

    #[test]
    fn parse_round_trip() {
        for g in [Gate::h(1), Gate::rz(0, -0.25), Gate::cz(2, 1), Gate::cnot(1, 0)] {
            let back: Gate = g.to_string().parse().unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn missing_angle_is_structural() {
        assert!(matches!("RY 3".parse::<Gate>(), Err(Error::Structure(_))));
        assert!(matches!(
            Gate::from_parts(GateKind::Rz, None, &[0]),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn control_equal_target_rejected() {
        assert!("CNOT 2 2".parse::<Gate>().is_err());
        assert!(Gate::cnot(1, 1).validate(3).is_err());
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(Gate::h(3).validate(3).is_err());
        assert!(Gate::cnot(0, 5).validate(3).is_err());
        assert!(Gate::cnot(0, 2).validate(3).is_ok());
    }
}
