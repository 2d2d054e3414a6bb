use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::{ground_state_dense, ground_state_lanczos, LanczosConfig, Solver, DENSE_MAX_DIM};
use super::hamiltonian::{build_hamiltonian, ModelKind, SpinModel};
use crate::error::{Error, Result};
use crate::sim::State;

/// Grid points closer than this to the critical point are rejected.
pub const CRITICAL_EXCLUSION: f64 = 1e-9;

/// Default critical point used for labeling, for both chain models.
pub const DEFAULT_H_C: f64 = 1.0;

/// Fields of the five compression input states, straddling `h = 1`.
pub const COMPRESSION_FIELDS: [f64; 5] = [0.2, 0.6, 0.9, 1.4, 1.8];

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub h: f64,
    /// Phase label, `sign(h - h_c)`.
    pub label: i8,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub model: ModelKind,
    pub num_sites: usize,
    pub h_c: f64,
    pub solver: Solver,
    pub seed: u64,
    /// Human-readable description of the field grid the records came from.
    pub grid: String,
    pub global_phase: String,
}

pub const GLOBAL_PHASE_CONVENTION: &str = "largest-magnitude amplitude positive";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub records: Vec<Record>,
}

impl Dataset {
    /// Validates every record against the metadata.
    pub fn new(meta: DatasetMeta, records: Vec<Record>) -> Result<Self> {
        let ds = Dataset { meta, records };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.records {
            if r.state.num_qubits() != self.meta.num_sites {
                return Err(Error::DimensionMismatch {
                    expected: self.meta.num_sites,
                    found: r.state.num_qubits(),
                });
            }
            if r.label != 1 && r.label != -1 {
                return Err(Error::Format(format!("label {} is not ±1", r.label)));
            }
            if !r.h.is_finite() {
                return Err(Error::Format(format!("field {} is not finite", r.h)));
            }
            if (r.state.norm_sqr() - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized(r.state.norm_sqr()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.records.iter().map(|r| &r.state)
    }

    /// Dataset restricted to the given record indices, in the order given.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            meta: self.meta.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }
}

pub fn phase_label(h: f64, h_c: f64) -> i8 {
    if h > h_c {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    /// Dense up to 12 sites, Lanczos beyond.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

impl SolverChoice {
    pub fn resolve(self, num_sites: usize) -> Solver {
        match self {
            SolverChoice::Dense => Solver::Dense,
            SolverChoice::Lanczos => Solver::Lanczos,
            SolverChoice::Auto if (1usize << num_sites) <= DENSE_MAX_DIM => Solver::Dense,
            SolverChoice::Auto => Solver::Lanczos,
        }
    }
}

/// Uniform grid of `count` points on `[lo, hi]` with any point within
/// [`CRITICAL_EXCLUSION`] of `h_c` dropped (an odd count centred on `h_c` loses one point).
pub fn default_grid(lo: f64, hi: f64, count: usize, h_c: f64) -> Vec<f64> {
    if count == 1 {
        return vec![lo].into_iter().filter(|h| (h - h_c).abs() >= CRITICAL_EXCLUSION).collect();
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .filter(|h| (h - h_c).abs() >= CRITICAL_EXCLUSION)
        .collect()
}

pub fn validate_grid(h_grid: &[f64], h_c: f64) -> Result<()> {
    if h_grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    for (k, &h) in h_grid.iter().enumerate() {
        if !h.is_finite() {
            return Err(Error::InvalidGrid(format!("grid value {h} is not finite")));
        }
        if (h - h_c).abs() < CRITICAL_EXCLUSION {
            return Err(Error::GridAtCritical { h, h_c });
        }
        if h_grid[..k].contains(&h) {
            return Err(Error::InvalidGrid(format!("grid value {h} repeated")));
        }
    }
    Ok(())
}

/// Ground state of one chain at field `h` with the selected solver.
pub fn ground_state(
    kind: ModelKind,
    num_sites: usize,
    h: f64,
    solver: Solver,
    lanczos: &LanczosConfig,
) -> Result<super::eigen::GroundState> {
    let ham = build_hamiltonian(&SpinModel::new(kind, num_sites, h))?;
    match solver {
        Solver::Dense => ground_state_dense(&ham),
        Solver::Lanczos => ground_state_lanczos(&ham, lanczos),
    }
}

/// All grid points labeled by phase, in grid order. Grid points are diagonalized in parallel.
pub fn generate_records(
    kind: ModelKind,
    num_sites: usize,
    h_grid: &[f64],
    h_c: f64,
    solver: Solver,
    lanczos: &LanczosConfig,
) -> Result<Vec<Record>> {
    validate_grid(h_grid, h_c)?;
    h_grid
        .par_iter()
        .map(|&h| {
            let gs = ground_state(kind, num_sites, h, solver, lanczos)?;
            Ok(Record { h, label: phase_label(h, h_c), state: gs.state })
        })
        .collect()
}

/// Labeled ground states split into train and test sets by a seeded shuffle.
///
/// The train set receives `round(train_fraction * |grid|)` records. Each
/// split keeps the records in grid order.
pub fn generate_dataset(
    kind: ModelKind,
    num_sites: usize,
    h_grid: &[f64],
    h_c: f64,
    split: Split,
    solver: SolverChoice,
) -> Result<(Dataset, Dataset)> {
    if !(0.0..=1.0).contains(&split.train_fraction) {
        return Err(Error::InvalidGrid(format!(
            "train fraction {} outside [0, 1]",
            split.train_fraction
        )));
    }
    let solver = solver.resolve(num_sites);
    let lanczos = LanczosConfig { seed: split.seed, ..LanczosConfig::default() };
    let records = generate_records(kind, num_sites, h_grid, h_c, solver, &lanczos)?;
    let n_train = (split.train_fraction * records.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(split.seed));
    let mut train_idx = order[..n_train].to_vec();
    let mut test_idx = order[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let (lo, hi) = h_grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &h| (a.min(h), b.max(h)));
    let meta = DatasetMeta {
        model: kind,
        num_sites,
        h_c,
        solver,
        seed: split.seed,
        grid: format!("{} points in [{lo}, {hi}]", h_grid.len()),
        global_phase: GLOBAL_PHASE_CONVENTION.to_string(),
    };
    let full = Dataset { meta, records };
    Ok((full.subset(&train_idx), full.subset(&test_idx)))
}
