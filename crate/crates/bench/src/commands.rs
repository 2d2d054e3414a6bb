//! The four subcommands, callable without the CLI layer.

use std::path::{Path, PathBuf};

use qcnn_core::ansatz::{build, AnsatzSpec, HeaTemplate};
use qcnn_core::metrics::{evaluate_autoencoder, evaluate_classifier, CompressionSpec};
use qcnn_core::spin::{generate_dataset, Dataset};
use qcnn_core::training::{train, Init, OptimizerConfig, Task, TrainRecord};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{BenchConfig, EvalSplit, TaskKind};
use crate::error::{BenchError, BenchResult};
use crate::formats::{
    read_dataset, read_model, rows_to_csv, write_dataset, write_text, CompressionMeta, DatasetRef, ModelFile,
    Report, ReportFile, ResultRow, RowMeta, CSV_COLUMNS, FORMAT_VERSION, TIMING_COLUMNS,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

pub fn train_path(dir: &Path) -> PathBuf {
    dir.join("train.jsonl")
}

pub fn test_path(dir: &Path) -> PathBuf {
    dir.join("test.jsonl")
}

pub fn model_path(dir: &Path) -> PathBuf {
    dir.join("model.json")
}

pub fn record_path(dir: &Path) -> PathBuf {
    dir.join("train_record.json")
}

pub fn report_path(dir: &Path) -> PathBuf {
    dir.join("report.json")
}

pub fn results_path(dir: &Path, format: OutputFormat) -> PathBuf {
    match format {
        OutputFormat::Csv => dir.join("results.csv"),
        OutputFormat::Json => dir.join("results.json"),
    }
}

pub fn results_meta_path(dir: &Path) -> PathBuf {
    dir.join("results.meta.json")
}

fn template_name(t: HeaTemplate) -> &'static str {
    match t {
        HeaTemplate::SingleColumn => "single_column",
        HeaTemplate::DoubleColumn => "double_column",
    }
}

/// Row label, unique per distinct spec in a sweep.
pub fn model_label(spec: &AnsatzSpec) -> String {
    if spec.family.is_qcnn() {
        let sharing = if spec.weight_sharing { "" } else { "-unshared" };
        format!("{}-l{}{sharing}", spec.family, spec.layers)
    } else {
        format!("{}-{}-l{}", spec.family, template_name(spec.hea_template), spec.layers)
    }
}

fn surrogate_cost(task: TaskKind) -> &'static str {
    match task {
        TaskKind::Classify => "mean (l - <Z_readout>)^2",
        TaskKind::Autoencode => "mean 0.5*(n_d - sum_q <Z_q>) over discarded qubits",
    }
}

/// Independent seed from the run seed and a stream index.
pub fn derive_seed(run_seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// `size` training indices drawn without replacement, in dataset order.
pub fn subsample(len: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(size);
    idx.sort_unstable();
    idx
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSummary {
    pub train: Dataset,
    pub test: Dataset,
}

pub fn generate(cfg: &BenchConfig) -> BenchResult<GenSummary> {
    let (train, test) =
        generate_dataset(cfg.data.model, cfg.num_sites(), &cfg.grid(), cfg.data.h_c, cfg.split(), cfg.data.solver)?;
    Ok(GenSummary { train, test })
}

pub fn cmd_gen_data(cfg: &BenchConfig) -> BenchResult<GenSummary> {
    let out = generate(cfg)?;
    write_dataset(&train_path(&cfg.output.dir), &out.train)?;
    write_dataset(&test_path(&cfg.output.dir), &out.test)?;
    Ok(out)
}

fn check_dataset(ds: &Dataset, spec: &AnsatzSpec) -> BenchResult<()> {
    if ds.meta.num_sites != spec.num_qubits {
        return Err(BenchError::Config(format!(
            "dataset has {} sites but the {} ansatz has {} qubits",
            ds.meta.num_sites, spec.family, spec.num_qubits
        )));
    }
    if ds.is_empty() {
        return Err(BenchError::Config("dataset has no records".into()));
    }
    Ok(())
}

fn model_file(cfg: &BenchConfig, spec: &AnsatzSpec, task: &Task, ds: &Dataset, rec: &TrainRecord, init_seed: u64) -> ModelFile {
    let compression = match task {
        Task::Autoencode { discard } => Some(CompressionMeta { discard: discard.clone(), n_d: discard.len() }),
        Task::Classify { .. } => None,
    };
    ModelFile {
        format_version: FORMAT_VERSION,
        spec: *spec,
        task: task.clone(),
        n_params: rec.final_params.len(),
        params: rec.final_params.clone(),
        compression,
        dataset: DatasetRef {
            model: ds.meta.model,
            num_sites: ds.meta.num_sites,
            h_c: ds.meta.h_c,
            seed: ds.meta.seed,
        },
        optimizer: rec.optimizer,
        init_seed,
        config_hash: cfg.hash(),
    }
}

fn train_one(spec: &AnsatzSpec, task: &Task, ds: &Dataset, optimizer: &OptimizerConfig, init_seed: u64) -> BenchResult<TrainRecord> {
    let ansatz = build(spec)?;
    Ok(train(task, &ansatz.circuit, ds, optimizer, &Init::Seed(init_seed))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub model: ModelFile,
    pub record: TrainRecord,
}

/// Trains the top-level model on the training file. A run that hits the
/// iteration limit still writes its files with `converged = false`.
pub fn cmd_train(cfg: &BenchConfig) -> BenchResult<TrainSummary> {
    let ds = read_dataset(&train_path(&cfg.output.dir))?;
    let spec = cfg.model;
    check_dataset(&ds, &spec)?;
    let task = cfg.task_for(&spec)?;
    let record = train_one(&spec, &task, &ds, &cfg.optimizer, cfg.seed)?;
    let model = model_file(cfg, &spec, &task, &ds, &record, cfg.seed);
    write_text(&model_path(&cfg.output.dir), &model.to_json())?;
    write_text(&record_path(&cfg.output.dir), &pretty(&record))?;
    Ok(TrainSummary { model, record })
}

fn evaluate(
    spec: &AnsatzSpec,
    task: &Task,
    params: &[f64],
    ds: &Dataset,
    final_cost: Option<f64>,
    postselection: bool,
) -> BenchResult<Report> {
    let ansatz = build(spec)?;
    Ok(match task {
        Task::Classify { readout } => Report::Classification(evaluate_classifier(&ansatz.circuit, *readout, params, ds)?),
        Task::Autoencode { discard } => {
            let comp = CompressionSpec::new(discard.clone())?;
            Report::Compression(evaluate_autoencoder(&ansatz.circuit, params, &comp, ds, final_cost, postselection)?)
        }
    })
}

fn split_name(split: EvalSplit) -> &'static str {
    match split {
        EvalSplit::Test => "test",
        EvalSplit::Train => "train",
    }
}

/// Evaluates a model file on the configured split. The model's task must
/// match the configured task.
pub fn cmd_eval(cfg: &BenchConfig, model: &Path) -> BenchResult<ReportFile> {
    let m = read_model(model)?;
    let model_kind = match m.task {
        Task::Classify { .. } => TaskKind::Classify,
        Task::Autoencode { .. } => TaskKind::Autoencode,
    };
    if model_kind != cfg.task {
        return Err(BenchError::Config(format!(
            "model {} was trained for {model_kind}, config asks for {}",
            model.display(),
            cfg.task
        )));
    }
    let path = match cfg.eval.split {
        EvalSplit::Test => test_path(&cfg.output.dir),
        EvalSplit::Train => train_path(&cfg.output.dir),
    };
    let ds = read_dataset(&path)?;
    check_dataset(&ds, &m.spec)?;
    let final_cost = std::fs::read_to_string(record_path(model.parent().unwrap_or(Path::new("."))))
        .ok()
        .and_then(|t| serde_json::from_str::<TrainRecord>(&t).ok())
        .filter(|r| r.final_params == m.params)
        .map(|r| r.final_cost);
    let report = evaluate(&m.spec, &m.task, &m.params, &ds, final_cost, cfg.autoencode.postselection)?;
    let file = ReportFile {
        format_version: FORMAT_VERSION,
        model: model_label(&m.spec),
        n_params: m.n_params,
        split: split_name(cfg.eval.split).into(),
        records: ds.len(),
        report,
    };
    write_text(&report_path(&cfg.output.dir), &file.to_json())?;
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellMeta {
    pub model: String,
    pub train_size: usize,
    pub init_seed: u64,
    pub subset_seed: u64,
    pub artifacts: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchMeta {
    pub format_version: u32,
    pub config_hash: String,
    pub run_seed: u64,
    pub task: TaskKind,
    pub columns: Vec<String>,
    pub timing_columns: Vec<String>,
    pub timing: String,
    pub surrogate_cost: String,
    pub h_c: f64,
    pub data_model: String,
    pub num_sites: usize,
    pub train_records: usize,
    pub test_records: usize,
    pub split_seed: u64,
    pub optimizer: OptimizerConfig,
    pub cells: Vec<CellMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub rows: Vec<ResultRow>,
    pub meta: BenchMeta,
    pub results: PathBuf,
}

struct Cell<'a> {
    index: usize,
    spec: &'a AnsatzSpec,
    size: usize,
}

fn run_cell(
    cfg: &BenchConfig,
    cell: &Cell,
    data: &GenSummary,
    init_seed: u64,
    subset_seed: u64,
    dir: &Path,
) -> ResultRow {
    let spec = cell.spec;
    let task = cfg.task_for(spec).expect("validated");
    let metric_name = match cfg.task {
        TaskKind::Classify => "test_accuracy",
        TaskKind::Autoencode => "mean_fidelity",
    };
    let subset = data.train.subset(&subsample(data.train.len(), cell.size, subset_seed));
    let mut row = ResultRow {
        model: model_label(spec),
        family: spec.family.to_string(),
        num_qubits: spec.num_qubits,
        layers: spec.layers,
        n_params: qcnn_core::ansatz::param_count(spec).expect("validated"),
        train_size: cell.size,
        metric_name: metric_name.into(),
        metric_value: None,
        auc: None,
        time_total_s: 0.0,
        time_per_sample_s: 0.0,
        optimizer: cfg.optimizer.kind.to_string(),
        seed: cfg.seed,
        status: String::new(),
        meta: RowMeta {
            task: cfg.task.to_string(),
            surrogate_cost: surrogate_cost(cfg.task).into(),
            h_c: cfg.data.h_c,
            template: if spec.family.is_qcnn() { "qcnn".into() } else { template_name(spec.hea_template).into() },
            weight_sharing: spec.weight_sharing,
            init_seed,
            subset_seed,
            iterations: 0,
            evaluations: 0,
            converged: false,
            final_cost: None,
        },
    };
    let outcome = (|| -> BenchResult<()> {
        let rec = train_one(spec, &task, &subset, &cfg.optimizer, init_seed)?;
        row.time_total_s = rec.wall_time_total;
        row.time_per_sample_s = rec.wall_time_per_sample;
        row.meta.iterations = rec.iterations;
        row.meta.evaluations = rec.evaluations;
        row.meta.converged = rec.converged;
        row.meta.final_cost = Some(rec.final_cost);
        let report =
            evaluate(spec, &task, &rec.final_params, &data.test, Some(rec.final_cost), cfg.autoencode.postselection)?;
        match &report {
            Report::Classification(r) => {
                row.metric_value = Some(r.accuracy);
                row.auc = r.auc;
            }
            Report::Compression(r) => row.metric_value = Some(r.mean_fidelity),
        }
        let model = model_file(cfg, spec, &task, &subset, &rec, init_seed);
        let report = ReportFile {
            format_version: FORMAT_VERSION,
            model: row.model.clone(),
            n_params: row.n_params,
            split: "test".into(),
            records: data.test.len(),
            report,
        };
        write_text(&model_path(dir), &model.to_json())?;
        write_text(&record_path(dir), &pretty(&rec))?;
        write_text(&report_path(dir), &report.to_json())?;
        Ok(())
    })();
    row.status = match outcome {
        Ok(()) if row.meta.converged => "converged".into(),
        Ok(()) => "iteration_limit".into(),
        Err(e) => format!("failed: {e}"),
    };
    row
}

/// Trains and evaluates every (model, training-set size) cell. Cell failures
/// are recorded in the status column and the sweep carries on.
pub fn cmd_benchmark(cfg: &BenchConfig, format: OutputFormat) -> BenchResult<BenchSummary> {
    if lacks_test_split(cfg) {
        return Err(BenchError::Config("benchmark needs a non-empty test split (data.train_fraction < 1)".into()));
    }
    let data = cmd_gen_data(cfg)?;
    let models = cfg.models();
    let mut cells: Vec<Cell> = Vec::new();
    for (index, spec) in models.iter().enumerate() {
        for &size in &cfg.sweep_sizes() {
            cells.push(Cell { index, spec, size });
        }
    }
    cells.sort_by(|a, b| (model_label(a.spec), a.size, a.index).cmp(&(model_label(b.spec), b.size, b.index)));

    let mut rows = Vec::with_capacity(cells.len());
    let mut metas = Vec::with_capacity(cells.len());
    for cell in &cells {
        let init_seed = derive_seed(cfg.seed, ((cell.index as u64 + 1) << 32) | cell.size as u64);
        let subset_seed = derive_seed(cfg.seed, cell.size as u64);
        let rel = PathBuf::from("runs").join(format!("{:02}-{}-n{}", cell.index, model_label(cell.spec), cell.size));
        rows.push(run_cell(cfg, cell, &data, init_seed, subset_seed, &cfg.output.dir.join(&rel)));
        metas.push(CellMeta {
            model: model_label(cell.spec),
            train_size: cell.size,
            init_seed,
            subset_seed,
            artifacts: rel,
        });
    }

    let meta = BenchMeta {
        format_version: FORMAT_VERSION,
        config_hash: cfg.hash(),
        run_seed: cfg.seed,
        task: cfg.task,
        columns: CSV_COLUMNS.iter().map(|c| c.to_string()).collect(),
        timing_columns: TIMING_COLUMNS.iter().map(|c| c.to_string()).collect(),
        timing: "wall clock around the optimizer call; per sample = total / train_size".into(),
        surrogate_cost: surrogate_cost(cfg.task).into(),
        h_c: cfg.data.h_c,
        data_model: cfg.data.model.to_string(),
        num_sites: cfg.num_sites(),
        train_records: data.train.len(),
        test_records: data.test.len(),
        split_seed: cfg.data.seed,
        optimizer: cfg.optimizer,
        cells: metas,
    };
    let results = results_path(&cfg.output.dir, format);
    match format {
        OutputFormat::Csv => write_text(&results, &rows_to_csv(&rows))?,
        OutputFormat::Json => write_text(&results, &pretty(&rows))?,
    }
    write_text(&results_meta_path(&cfg.output.dir), &pretty(&meta))?;
    Ok(BenchSummary { rows, meta, results })
}

fn lacks_test_split(cfg: &BenchConfig) -> bool {
    cfg.train_count() >= cfg.grid().len()
}
