//! Task costs, optimizers and the training loop.

mod gradient;
mod optim;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gradient::{expectation_gradient, param_shift_gradient};
pub use optim::{
    gradient_descent_minimize, nelder_mead_minimize, powell_minimize, spsa_minimize, Minimum, OptimizerConfig,
    OptimizerKind, SpsaSchedule,
};

use crate::error::{Error, Result};
use crate::sim::{apply_range, discard_masks, Circuit, State};
use crate::spin::Dataset;

/// Rotation angles in radians, one per circuit slot.
pub type ParamVector = Vec<f64>;

/// What a circuit is trained for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Phase classification read from `⟨Z_readout⟩`.
    Classify { readout: usize },
    /// Compression: drive the `discard` qubits to `|0⟩`.
    Autoencode { discard: Vec<usize> },
}

impl Task {
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        match self {
            Task::Classify { readout } if *readout >= num_qubits => {
                Err(Error::QubitOutOfRange { index: *readout, num_qubits })
            }
            Task::Classify { .. } => Ok(()),
            Task::Autoencode { discard } => discard_masks(num_qubits, discard).map(|_| ()),
        }
    }

    /// `m = ⟨Z_r⟩` for classification, `Σ_{q∈discard} ⟨Z_q⟩` for compression.
    pub(crate) fn observable(&self, state: &State) -> f64 {
        match self {
            Task::Classify { readout } => state.expectation_z(*readout).expect("readout validated"),
            Task::Autoencode { discard } => {
                discard.iter().map(|&q| state.expectation_z(q).expect("discard validated")).sum()
            }
        }
    }

    pub(crate) fn sample_cost(&self, observable: f64, label: i8) -> f64 {
        match self {
            Task::Classify { .. } => (label as f64 - observable).powi(2),
            Task::Autoencode { discard } => 0.5 * (discard.len() as f64 - observable),
        }
    }

    /// d(sample cost)/d(observable).
    pub(crate) fn cost_slope(&self, observable: f64, label: i8) -> f64 {
        match self {
            Task::Classify { .. } => -2.0 * (label as f64 - observable),
            Task::Autoencode { .. } => -0.5,
        }
    }
}

pub(crate) fn check_params(circuit: &Circuit, params: &[f64]) -> Result<()> {
    if params.len() != circuit.param_count() {
        return Err(Error::ParamLength { expected: circuit.param_count(), found: params.len() });
    }
    if let Some(&bad) = params.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    Ok(())
}

pub(crate) fn check_inputs(task: &Task, circuit: &Circuit, dataset: &Dataset, params: &[f64]) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(r) = dataset.records.iter().find(|r| r.state.num_qubits() != circuit.num_qubits()) {
        return Err(Error::DimensionMismatch { expected: circuit.num_qubits(), found: r.state.num_qubits() });
    }
    task.validate(circuit.num_qubits())?;
    check_params(circuit, params)
}

fn cost_unchecked(task: &Task, circuit: &Circuit, dataset: &Dataset, params: &[f64]) -> f64 {
    let angles = circuit.resolve_angles(params).expect("parameter length checked");
    let gates = circuit.gates();
    let terms: Vec<f64> = dataset
        .records
        .par_iter()
        .map(|r| {
            let mut s = r.state.clone();
            apply_range(gates, &angles, &mut s, 0..gates.len());
            task.sample_cost(task.observable(&s), r.label)
        })
        .collect();
    terms.iter().sum::<f64>() / dataset.len() as f64
}

/// Mean cost of `task` over the dataset.
pub fn task_cost(task: &Task, circuit: &Circuit, dataset: &Dataset, params: &[f64]) -> Result<f64> {
    check_inputs(task, circuit, dataset, params)?;
    Ok(cost_unchecked(task, circuit, dataset, params))
}

/// `(1/M) Σ (l_i − ⟨Z_r⟩_i)²` on `U(θ)|ψ_i⟩`.
pub fn classification_cost(circuit: &Circuit, readout: usize, dataset: &Dataset, params: &[f64]) -> Result<f64> {
    task_cost(&Task::Classify { readout }, circuit, dataset, params)
}

/// Mean of `½(n_d − Σ_{q∈discard} ⟨Z_q⟩)` on `U(φ)|ψ_i⟩`.
pub fn autoencoder_cost(encoder: &Circuit, discard: &[usize], dataset: &Dataset, params: &[f64]) -> Result<f64> {
    task_cost(&Task::Autoencode { discard: discard.to_vec() }, encoder, dataset, params)
}

/// Independent uniform draws from `[−π, π]`.
pub fn init_params(count: usize, seed: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Seed(u64),
    Params(ParamVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub optimizer: OptimizerKind,
    pub initial_params: ParamVector,
    pub final_params: ParamVector,
    pub final_cost: f64,
    pub cost_history: Vec<f64>,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Seconds spent inside the optimizer.
    pub wall_time_total: f64,
    /// `wall_time_total` divided by the training-set size.
    pub wall_time_per_sample: f64,
    pub train_size: usize,
}

impl TrainRecord {
    /// Equality ignoring the wall-clock fields.
    pub fn same_outcome(&self, other: &TrainRecord) -> bool {
        let strip = |r: &TrainRecord| TrainRecord { wall_time_total: 0.0, wall_time_per_sample: 0.0, ..r.clone() };
        strip(self) == strip(other)
    }
}

/// Minimizes the task cost from the given initialization.
pub fn train(task: &Task, circuit: &Circuit, dataset: &Dataset, config: &OptimizerConfig, init: &Init) -> Result<TrainRecord> {
    let x0 = match init {
        Init::Seed(seed) => init_params(circuit.param_count(), *seed),
        Init::Params(p) => p.clone(),
    };
    check_inputs(task, circuit, dataset, &x0)?;
    config.validate()?;
    let cost = |x: &[f64]| cost_unchecked(task, circuit, dataset, x);
    let start = Instant::now();
    let min = match config.kind {
        OptimizerKind::Powell => powell_minimize(cost, &x0, config)?,
        OptimizerKind::NelderMead => nelder_mead_minimize(cost, &x0, config)?,
        OptimizerKind::Spsa => spsa_minimize(cost, &x0, config)?,
        OptimizerKind::ParamShiftGD => {
            let grad = |x: &[f64]| gradient::gradient_unchecked(task, circuit, dataset, x);
            gradient_descent_minimize(cost, grad, &x0, config)?
        }
    };
    let wall_time_total = start.elapsed().as_secs_f64();
    Ok(TrainRecord {
        optimizer: config.kind,
        initial_params: x0,
        final_params: min.params,
        final_cost: min.cost,
        cost_history: min.cost_history,
        evaluations: min.evaluations,
        iterations: min.iterations,
        converged: min.converged,
        wall_time_total,
        wall_time_per_sample: wall_time_total / dataset.len() as f64,
        train_size: dataset.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Gate;
    use crate::spin::{DatasetMeta, ModelKind, Record, Solver};

    fn dataset(records: Vec<(State, i8)>) -> Dataset {
        let n = records[0].0.num_qubits();
        let meta = DatasetMeta {
            model: ModelKind::TFI,
            num_sites: n,
            h_c: 1.0,
            solver: Solver::Dense,
            seed: 0,
            grid: String::new(),
            global_phase: String::new(),
        };
        let records = records.into_iter().map(|(state, label)| Record { h: 0.0, label, state }).collect();
        Dataset::new(meta, records).unwrap()
    }

    #[test]
    fn classification_cost_examples() {
        let c = Circuit::new(1);
        let ds = dataset(vec![(State::basis(1, 0).unwrap(), 1), (State::basis(1, 1).unwrap(), -1)]);
        assert_eq!(classification_cost(&c, 0, &ds, &[]).unwrap(), 0.0);
        let plus = State::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2]).unwrap();
        let ds = dataset(vec![(plus, 1)]);
        assert!((classification_cost(&c, 0, &ds, &[]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn autoencoder_cost_examples() {
        let c = Circuit::new(3);
        let ones = dataset(vec![(State::basis(3, 0b110).unwrap(), 1)]);
        assert_eq!(autoencoder_cost(&c, &[0, 1], &ones, &[]).unwrap(), 2.0);
        let zeros = dataset(vec![(State::basis(3, 0b001).unwrap(), 1)]);
        assert_eq!(autoencoder_cost(&c, &[0, 1], &zeros, &[]).unwrap(), 0.0);
        let plus = State::from_real(&[0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let ds = dataset(vec![(plus, 1)]);
        assert!((autoencoder_cost(&c, &[0, 1], &ds, &[]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(autoencoder_cost(&c, &[], &ds, &[]), Err(Error::EmptyDiscard));
    }

    #[test]
    fn input_checks() {
        let mut c = Circuit::new(2);
        let a = c.new_param();
        c.push(Gate::RY { qubit: 0, angle: a }).unwrap();
        let ds = dataset(vec![(State::zero(2).unwrap(), 1)]);
        assert_eq!(classification_cost(&c, 0, &ds, &[]), Err(Error::ParamLength { expected: 1, found: 0 }));
        assert!(matches!(classification_cost(&c, 0, &ds, &[f64::NAN]), Err(Error::NonFinite(_))));
        assert!(classification_cost(&c, 2, &ds, &[0.0]).is_err());
        let empty = Dataset { meta: ds.meta.clone(), records: vec![] };
        assert_eq!(classification_cost(&c, 0, &empty, &[0.0]), Err(Error::EmptyDataset));
        let wide = dataset(vec![(State::zero(3).unwrap(), 1)]);
        assert!(matches!(classification_cost(&c, 0, &wide, &[0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn init_is_seeded_and_in_range() {
        let a = init_params(50, 4);
        assert_eq!(a, init_params(50, 4));
        assert_ne!(a, init_params(50, 5));
        assert!(a.iter().all(|v| v.abs() <= std::f64::consts::PI));
    }
}
