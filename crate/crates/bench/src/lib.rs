//! Configuration, file formats and subcommands of the `qcnn-bench` driver.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use commands::{cmd_benchmark, cmd_eval, cmd_gen_data, cmd_train, OutputFormat};
pub use config::BenchConfig;
pub use error::{BenchError, BenchResult};

/// Runs `f` on a dedicated rayon pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> BenchResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(BenchError::Config("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| BenchError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
