//! Open TFI and XXZ chains: Hamiltonian assembly, ground states and labeled datasets.

mod dataset;
mod eigen;
mod hamiltonian;

pub use dataset::{
    default_grid, generate_dataset, generate_records, ground_state, phase_label, validate_grid,
    Dataset, DatasetMeta, Record, SolverChoice, Split, COMPRESSION_FIELDS, CRITICAL_EXCLUSION, DEFAULT_H_C,
    GLOBAL_PHASE_CONVENTION,
};
pub use eigen::{
    fix_sign, ground_state_dense, ground_state_lanczos, resolve_manifold, GroundState,
    LanczosConfig, Solver, DEGENERACY_TOL, DENSE_MAX_DIM, LANCZOS_MAX_DIM,
};
pub use hamiltonian::{
    build_hamiltonian, build_hamiltonian_with_ceiling, ModelKind, SparseHamiltonian,
    SpinModel, DEFAULT_MAX_SITES,
};
