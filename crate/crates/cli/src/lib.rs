//! Command-line pipeline: self-declaration extraction, distant labeling,
//! Naive Bayes training, prediction, prevalence estimation and evaluation.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use args::Cli;
pub use config::RunConfig;
pub use error::{CliError, CliResult, Failure};

/// Resolves the effective configuration: file, then flags.
pub fn effective_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one parsed command on its own thread pool.
pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = effective_config(cli)?;
    if cli.threads == Some(0) {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::usage(format!("cannot start worker threads: {e}")))?;
    pool.install(|| commands::dispatch(&cli.command, &cfg))
}
