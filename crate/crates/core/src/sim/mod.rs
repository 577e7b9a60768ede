//! Dense statevector simulation.
//!
//! Qubit 0 is the most significant bit of a basis-state index, so the
//! amplitude vector of `|q0 q1 … q(n-1)⟩` is laid out in tensor-product order.

mod circuit;
mod gate;
mod sample;
mod state;

pub use circuit::{run_circuit, CircuitSpec, Measurement};
pub use gate::{Gate, GateKind};
pub(crate) use sample::outcomes_from_counts;
pub use sample::{sample_shots, ShotOutcome};
pub use state::{apply_gate, expectation_z, StateVector};

/// Largest register the dense simulator accepts (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;
