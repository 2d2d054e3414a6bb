//! Variational circuit benchmarking: statevector simulation, spin-chain
//! ground states, QCNN and hardware-efficient ansatze, training and evaluation
//! for phase classification and state compression.

pub mod ansatz;
pub mod error;
pub mod metrics;
#[cfg(any(test, feature = "test-oracles"))]
pub mod oracle;
pub mod sim;
pub mod spin;
pub mod training;

pub use error::{Error, Result};
pub use num_complex::Complex64;
