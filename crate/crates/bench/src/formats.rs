//! On-disk formats: line-delimited dataset files, model and report JSON, results CSV.

use std::path::Path;

use qcnn_core::ansatz::{param_count, AnsatzSpec};
use qcnn_core::metrics::{ClassificationReport, CompressionReport, CompressionSpec};
use qcnn_core::sim::{State, MAX_QUBITS};
use qcnn_core::spin::{Dataset, DatasetMeta, ModelKind, Record, Solver};
use qcnn_core::training::{OptimizerKind, ParamVector, Task};
use qcnn_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, BenchResult};

pub const FORMAT_VERSION: u32 = 1;
pub const BIT_ORDER: &str = "q0-most-significant";

fn malformed(what: impl std::fmt::Display) -> BenchError {
    BenchError::Config(format!("malformed file: {what}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetHeader {
    format_version: u32,
    model: ModelKind,
    #[serde(rename = "N")]
    num_sites: usize,
    h_c: f64,
    bit_order: String,
    solver: Solver,
    seed: u64,
    grid: String,
    global_phase: String,
    records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    h: f64,
    label: i8,
    re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<f64>>,
}

/// One header line, then one line per record.
pub fn dataset_to_string(ds: &Dataset) -> String {
    let header = DatasetHeader {
        format_version: FORMAT_VERSION,
        model: ds.meta.model,
        num_sites: ds.meta.num_sites,
        h_c: ds.meta.h_c,
        bit_order: BIT_ORDER.to_string(),
        solver: ds.meta.solver,
        seed: ds.meta.seed,
        grid: ds.meta.grid.clone(),
        global_phase: ds.meta.global_phase.clone(),
        records: ds.len(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for r in &ds.records {
        let amps = r.state.amplitudes();
        let im: Vec<f64> = amps.iter().map(|a| a.im).collect();
        let line = RecordLine {
            h: r.h,
            label: r.label,
            re: amps.iter().map(|a| a.re).collect(),
            im: if im.iter().all(|&x| x == 0.0) { None } else { Some(im) },
        };
        out.push_str(&serde_json::to_string(&line).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_dataset(text: &str) -> BenchResult<Dataset> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: DatasetHeader = serde_json::from_str(lines.next().ok_or_else(|| malformed("empty dataset file"))?)
        .map_err(|e| malformed(format!("header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(malformed(format!("unsupported format_version {}", header.format_version)));
    }
    if header.bit_order != BIT_ORDER {
        return Err(malformed(format!("unsupported bit_order {:?}", header.bit_order)));
    }
    if header.num_sites == 0 || header.num_sites > MAX_QUBITS {
        return Err(malformed(format!("N = {} out of range", header.num_sites)));
    }
    let dim = 1usize << header.num_sites;
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        let rec: RecordLine = serde_json::from_str(line).map_err(|e| malformed(format!("record {k}: {e}")))?;
        if rec.re.len() != dim || rec.im.as_ref().is_some_and(|im| im.len() != dim) {
            return Err(malformed(format!("record {k}: expected {dim} amplitudes")));
        }
        let amps: Vec<Complex64> = match &rec.im {
            Some(im) => rec.re.iter().zip(im).map(|(&re, &im)| Complex64::new(re, im)).collect(),
            None => rec.re.iter().map(|&re| Complex64::new(re, 0.0)).collect(),
        };
        let state = State::from_amplitudes(amps).map_err(|e| malformed(format!("record {k}: {e}")))?;
        records.push(Record { h: rec.h, label: rec.label, state });
    }
    if records.len() != header.records {
        return Err(malformed(format!("header announces {} records, found {}", header.records, records.len())));
    }
    let meta = DatasetMeta {
        model: header.model,
        num_sites: header.num_sites,
        h_c: header.h_c,
        solver: header.solver,
        seed: header.seed,
        grid: header.grid,
        global_phase: header.global_phase,
    };
    Dataset::new(meta, records).map_err(malformed)
}

pub fn read_dataset(path: &Path) -> BenchResult<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_dataset(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> BenchResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> BenchResult<()> {
    write_text(path, &dataset_to_string(ds))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompressionMeta {
    pub discard: Vec<usize>,
    pub n_d: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    pub model: ModelKind,
    #[serde(rename = "N")]
    pub num_sites: usize,
    pub h_c: f64,
    pub seed: u64,
}

/// Trained circuit parameters with everything needed to rebuild the circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub spec: AnsatzSpec,
    pub task: Task,
    pub n_params: usize,
    pub params: ParamVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compression: Option<CompressionMeta>,
    pub dataset: DatasetRef,
    pub optimizer: OptimizerKind,
    pub init_seed: u64,
    pub config_hash: String,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn compression_spec(&self) -> BenchResult<Option<CompressionSpec>> {
        match &self.task {
            Task::Autoencode { discard } => Ok(Some(CompressionSpec::new(discard.clone())?)),
            Task::Classify { .. } => Ok(None),
        }
    }

    pub fn validate(&self) -> BenchResult<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(malformed(format!("unsupported format_version {}", self.format_version)));
        }
        let expected = param_count(&self.spec)?;
        if self.n_params != expected || self.params.len() != expected {
            return Err(malformed(format!(
                "{} ansatz has {expected} parameters, model file declares {} and stores {}",
                self.spec.family,
                self.n_params,
                self.params.len()
            )));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(malformed("non-finite parameter"));
        }
        self.task.validate(self.spec.num_qubits)?;
        if let (Task::Autoencode { discard }, Some(meta)) = (&self.task, &self.compression) {
            if *discard != meta.discard || meta.n_d != discard.len() {
                return Err(malformed("compression metadata disagrees with the task"));
            }
        }
        if self.dataset.num_sites != self.spec.num_qubits {
            return Err(malformed("dataset chain length differs from the ansatz register"));
        }
        Ok(())
    }
}

pub fn parse_model(text: &str) -> BenchResult<ModelFile> {
    let model: ModelFile = serde_json::from_str(text).map_err(malformed)?;
    model.validate()?;
    Ok(model)
}

pub fn read_model(path: &Path) -> BenchResult<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_model(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Classification(ClassificationReport),
    Compression(CompressionReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub format_version: u32,
    pub model: String,
    pub n_params: usize,
    pub split: String,
    pub records: usize,
    pub report: Report,
}

impl ReportFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub const CSV_COLUMNS: [&str; 14] = [
    "model",
    "family",
    "N",
    "layers",
    "n_params",
    "train_size",
    "metric_name",
    "metric_value",
    "auc",
    "time_total_s",
    "time_per_sample_s",
    "optimizer",
    "seed",
    "status",
];

/// Columns that carry wall-clock measurements.
pub const TIMING_COLUMNS: [&str; 2] = ["time_total_s", "time_per_sample_s"];

/// Choices baked into a result that are not visible in the CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMeta {
    pub task: String,
    pub surrogate_cost: String,
    pub h_c: f64,
    pub template: String,
    pub weight_sharing: bool,
    pub init_seed: u64,
    pub subset_seed: u64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model: String,
    pub family: String,
    #[serde(rename = "N")]
    pub num_qubits: usize,
    pub layers: usize,
    pub n_params: usize,
    pub train_size: usize,
    pub metric_name: String,
    pub metric_value: Option<f64>,
    pub auc: Option<f64>,
    pub time_total_s: f64,
    pub time_per_sample_s: f64,
    pub optimizer: String,
    pub seed: u64,
    pub status: String,
    pub meta: RowMeta,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ResultRow {
    pub fn csv_fields(&self) -> [String; 14] {
        [
            self.model.clone(),
            self.family.clone(),
            self.num_qubits.to_string(),
            self.layers.to_string(),
            self.n_params.to_string(),
            self.train_size.to_string(),
            self.metric_name.clone(),
            opt(self.metric_value),
            opt(self.auc),
            self.time_total_s.to_string(),
            self.time_per_sample_s.to_string(),
            self.optimizer.clone(),
            self.seed.to_string(),
            self.status.clone(),
        ]
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record(r.csv_fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Parses a results CSV into header and records, checking the column set.
pub fn parse_results_csv(text: &str) -> BenchResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(malformed)?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(malformed(format!("unexpected CSV columns {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(malformed)?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// The CSV with the timing columns removed, for run-to-run comparison.
pub fn strip_timing(text: &str) -> BenchResult<String> {
    let (header, rows) = parse_results_csv(text)?;
    let keep: Vec<usize> = (0..header.len()).filter(|&i| !TIMING_COLUMNS.contains(&header[i].as_str())).collect();
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&rows) {
        out.push_str(&keep.iter().map(|&i| row[i].as_str()).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    Ok(out)
}
