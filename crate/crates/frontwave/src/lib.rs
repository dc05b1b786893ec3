//! Command-line front end for the traveling-wave solver: configuration,
//! run orchestration, artifact export, sweeps and convergence studies.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;

pub use error::{CliError, Exit};

/// Environment variable selecting the log level (`error`, `info`, `debug`).
pub const LOG_ENV: &str = "FRONTWAVE_LOG";

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "error");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}
