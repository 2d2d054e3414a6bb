use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qcnn_bench::formats::Report;
use qcnn_bench::{commands, with_threads, BenchConfig, BenchResult, OutputFormat};

#[derive(Parser)]
#[command(name = "qcnn-bench", version, about = "QCNN and hardware-efficient ansatz benchmarks on spin-chain ground states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the run seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (1 for fully sequential runs).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize the grid and write train/test dataset files.
    GenData(Common),
    /// Train the configured model on the training file.
    Train(Common),
    /// Evaluate a model file on the configured split.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Model file; defaults to model.json in the output directory.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Sweep models and training-set sizes into a results table.
    Benchmark {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
}

fn load(common: &Common) -> BenchResult<BenchConfig> {
    let mut cfg = BenchConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn run(command: Command) -> BenchResult<()> {
    match command {
        Command::GenData(common) => {
            let cfg = load(&common)?;
            let out = with_threads(common.threads, || commands::cmd_gen_data(&cfg))??;
            println!("train: {} records -> {}", out.train.len(), commands::train_path(&cfg.output.dir).display());
            println!("test: {} records -> {}", out.test.len(), commands::test_path(&cfg.output.dir).display());
        }
        Command::Train(common) => {
            let cfg = load(&common)?;
            let s = with_threads(common.threads, || commands::cmd_train(&cfg))??;
            println!(
                "{}: {} parameters, cost {:.6}, {} iterations, converged {}, {:.3} s ({:.4} s/sample)",
                commands::model_label(&s.model.spec),
                s.model.n_params,
                s.record.final_cost,
                s.record.iterations,
                s.record.converged,
                s.record.wall_time_total,
                s.record.wall_time_per_sample
            );
            println!("model -> {}", commands::model_path(&cfg.output.dir).display());
        }
        Command::Eval { common, model } => {
            let cfg = load(&common)?;
            let model = model.unwrap_or_else(|| commands::model_path(&cfg.output.dir));
            let r = with_threads(common.threads, || commands::cmd_eval(&cfg, &model))??;
            match &r.report {
                Report::Classification(c) => {
                    let auc = c.auc.map_or("n/a".to_string(), |a| format!("{a:.4}"));
                    println!("{} on {} {} records: accuracy {:.4}, auc {auc}", r.model, r.records, r.split, c.accuracy);
                }
                Report::Compression(c) => {
                    println!("{} on {} {} records: mean fidelity {:.6}", r.model, r.records, r.split, c.mean_fidelity);
                }
            }
            println!("report -> {}", commands::report_path(&cfg.output.dir).display());
        }
        Command::Benchmark { common, format } => {
            let cfg = load(&common)?;
            let s = with_threads(common.threads, || commands::cmd_benchmark(&cfg, format))??;
            for r in &s.rows {
                println!(
                    "{:<28} n={:<4} {}={} {:.4} s/sample [{}]",
                    r.model,
                    r.train_size,
                    r.metric_name,
                    r.metric_value.map_or("-".into(), |v| format!("{v:.4}")),
                    r.time_per_sample_s,
                    r.status
                );
            }
            println!("results -> {}", s.results.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
