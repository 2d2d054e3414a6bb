use thiserror::Error;

/// Errors raised by the simulation, model-building and training layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("gate acts twice on qubit {0}")]
    DuplicateTarget(usize),

    #[error("parameter slot {slot} unresolvable: {available} parameters supplied")]
    UnresolvedSlot { slot: usize, available: usize },

    #[error("parameter slot {0} is declared but never referenced by a gate")]
    UnusedSlot(usize),

    #[error("two-qubit literal is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter vector has length {found}, circuit expects {expected}")]
    ParamLength { expected: usize, found: usize },

    #[error("state has {0} amplitudes, not a power of two")]
    NotPowerOfTwo(usize),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("discard set is empty")]
    EmptyDiscard,

    #[error("invalid discard set: {0}")]
    InvalidDiscard(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("system of {num_sites} sites exceeds the ceiling of {ceiling}")]
    TooLarge { num_sites: usize, ceiling: usize },

    #[error("dense diagonalization limited to dimension {ceiling}, got {dimension}")]
    DenseCeiling { dimension: usize, ceiling: usize },

    #[error("Lanczos did not converge within {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("grid point h = {h} lies on the critical point {h_c}")]
    GridAtCritical { h: f64, h_c: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty parameter vector")]
    EmptyParams,

    #[error("invalid optimizer configuration: {0}")]
    InvalidOptimizer(String),

    #[error("non-finite cost {0} encountered")]
    NonFinite(f64),

    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the failure is numerical (solver/optimizer) rather than a bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::NonFinite(_))
    }
}
