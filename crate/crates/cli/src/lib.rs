//! Command-line driver: symbol expressions, subcommands and deterministic output.

pub mod commands;
pub mod expr;
pub mod output;

pub use commands::{execute, run_args, Cli, CliError, Outcome};

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "MOYAL_LAB_THREADS";

/// Size the global worker pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("{THREADS_ENV}={v} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}
