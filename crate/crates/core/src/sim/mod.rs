//! Exact statevector simulation.
//!
//! Rotations follow `R_P(θ) = exp(-iθP/2)`. Gate kernels act in place on
//! strided amplitude pairs; no dense operator is ever built.

mod circuit;
mod gate;
mod state;

pub use circuit::{inverse_circuit, run_circuit, Circuit};
pub(crate) use circuit::apply_range;
pub use gate::{apply_gate, unitarity_deviation, Angle, Gate, GateKind, Matrix4, UNITARY_TOL};
pub(crate) use state::discard_masks;
pub use state::{expectation_z, kraus_reset_branches, qubit_mask, State, MAX_QUBITS};
