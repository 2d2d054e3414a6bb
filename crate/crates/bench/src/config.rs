//! TOML run configuration.

use std::path::{Path, PathBuf};

use qcnn_core::ansatz::{readout_qubit, AnsatzSpec, QcnnLayout};
use qcnn_core::metrics::CompressionSpec;
use qcnn_core::spin::{default_grid, validate_grid, ModelKind, SolverChoice, Split, DEFAULT_H_C};
use qcnn_core::training::{OptimizerConfig, Task};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, BenchResult};

/// Upper bound on generated grid sizes.
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classify,
    Autoencode,
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TaskKind::Classify => "classify",
            TaskKind::Autoencode => "autoencode",
        })
    }
}

/// Field grid: explicit `points`, or `count` evenly spaced values on `[lo, hi]`
/// with any value on the critical point dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { lo: 0.2, hi: 1.8, count: 64, points: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub model: ModelKind,
    /// Chain length; defaults to the ansatz register size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_sites: Option<usize>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_h_c")]
    pub h_c: f64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverChoice,
}

fn default_h_c() -> f64 {
    DEFAULT_H_C
}

fn default_train_fraction() -> f64 {
    0.75
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoencodeConfig {
    /// Explicit discard set. Takes precedence over `pool_layers`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discard: Option<Vec<usize>>,
    /// Discard the qubits pooled by this many QCNN layers. Defaults to the
    /// ansatz depth for QCNN families and 1 for HEA.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pool_layers: Option<usize>,
    pub postselection: bool,
}

impl Default for AutoencodeConfig {
    fn default() -> Self {
        AutoencodeConfig { discard: None, pool_layers: None, postselection: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Training-set sizes. Empty means the whole training split.
    pub sizes: Vec<usize>,
    /// Models to sweep. Empty means the top-level `model` only.
    pub models: Vec<AnsatzSpec>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    #[default]
    Test,
    Train,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub split: EvalSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub task: TaskKind,
    /// Run seed: parameter initialization and sweep subsampling derive from it.
    #[serde(default)]
    pub seed: u64,
    pub model: AnsatzSpec,
    pub data: DataConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub autoencode: AutoencodeConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn config_error(e: impl std::fmt::Display) -> BenchError {
    BenchError::Config(e.to_string())
}

impl BenchConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> BenchResult<Self> {
        let cfg: BenchConfig = toml::from_str(text).map_err(config_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> BenchResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn num_sites(&self) -> usize {
        self.data.num_sites.unwrap_or(self.model.num_qubits)
    }

    pub fn grid(&self) -> Vec<f64> {
        match &self.data.grid.points {
            Some(points) => points.clone(),
            None => default_grid(self.data.grid.lo, self.data.grid.hi, self.data.grid.count, self.data.h_c),
        }
    }

    pub fn split(&self) -> Split {
        Split { train_fraction: self.data.train_fraction, seed: self.data.seed }
    }

    /// Records that land in the training split.
    pub fn train_count(&self) -> usize {
        (self.data.train_fraction * self.grid().len() as f64).round() as usize
    }

    pub fn models(&self) -> Vec<AnsatzSpec> {
        if self.sweep.models.is_empty() {
            vec![self.model]
        } else {
            self.sweep.models.clone()
        }
    }

    pub fn sweep_sizes(&self) -> Vec<usize> {
        if self.sweep.sizes.is_empty() {
            vec![self.train_count()]
        } else {
            self.sweep.sizes.clone()
        }
    }

    pub fn compression_spec(&self, spec: &AnsatzSpec) -> BenchResult<CompressionSpec> {
        let n = spec.num_qubits;
        let comp = match (&self.autoencode.discard, self.autoencode.pool_layers) {
            (Some(d), _) => CompressionSpec::new(d.clone())?,
            (None, pool) => {
                let layers = pool.unwrap_or(if spec.family.is_qcnn() { spec.layers } else { 1 });
                if !n.is_power_of_two() || layers == 0 || layers > n.trailing_zeros() as usize {
                    return Err(BenchError::Config(format!(
                        "cannot pool {layers} layers of a {n}-qubit register; set autoencode.discard"
                    )));
                }
                CompressionSpec::from_layout(&QcnnLayout::new(n, layers), layers)?
            }
        };
        comp.validate(n)?;
        Ok(comp)
    }

    pub fn task_for(&self, spec: &AnsatzSpec) -> BenchResult<Task> {
        Ok(match self.task {
            TaskKind::Classify => Task::Classify { readout: readout_qubit(spec)? },
            TaskKind::Autoencode => Task::Autoencode { discard: self.compression_spec(spec)?.discard().to_vec() },
        })
    }

    pub fn validate(&self) -> BenchResult<()> {
        let n = self.num_sites();
        if !(0.0..=1.0).contains(&self.data.train_fraction) {
            return Err(BenchError::Config(format!(
                "data.train_fraction {} outside [0, 1]",
                self.data.train_fraction
            )));
        }
        let g = &self.data.grid;
        if !(self.data.h_c.is_finite() && g.lo.is_finite() && g.hi.is_finite()) {
            return Err(BenchError::Config("data.h_c, data.grid.lo and data.grid.hi must be finite".into()));
        }
        if self.data.grid.points.is_none() && !(1..=MAX_GRID_POINTS).contains(&self.data.grid.count) {
            return Err(BenchError::Config(format!(
                "data.grid.count {} not in 1..={MAX_GRID_POINTS}",
                self.data.grid.count
            )));
        }
        validate_grid(&self.grid(), self.data.h_c)?;
        self.optimizer.validate()?;
        for spec in self.models().iter().chain(std::iter::once(&self.model)) {
            spec.validate()?;
            if spec.num_qubits != n {
                return Err(BenchError::Config(format!(
                    "{} ansatz has {} qubits but the data chain has {n} sites",
                    spec.family, spec.num_qubits
                )));
            }
            self.task_for(spec)?;
        }
        let available = self.train_count();
        for &size in &self.sweep.sizes {
            if size == 0 || size > available {
                return Err(BenchError::Config(format!(
                    "sweep size {size} not in 1..={available} (training records available)"
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputConfig::default();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
