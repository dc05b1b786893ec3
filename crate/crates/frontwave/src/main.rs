use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use frontwave::{commands, init_logging, Exit};

/// Traveling combustion fronts in striated periodic media.
#[derive(Debug, Parser)]
#[command(name = "frontwave", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a traveling wave and write its artifacts.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the diagnostics on a solve output directory.
    Diagnose {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Solve along one configuration axis, e.g. `kinetics.b=0.5,1,2,4`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Grid refinement study with empirical convergence orders.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(Exit::Usage.code()),
            };
        }
    };
    init_logging();
    let result = match cli.command {
        Command::Solve { config, out } => commands::solve(&config, &out),
        Command::Diagnose { input } => commands::diagnose(&input),
        Command::Sweep {
            config,
            axis,
            out,
            jobs,
        } => commands::sweep(&config, &axis, &out, jobs).map(|(exit, _)| exit),
        Command::Convergence {
            config,
            levels,
            out,
        } => commands::convergence(&config, levels, &out),
    };
    let exit = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit()
    });
    ExitCode::from(exit.code())
}
