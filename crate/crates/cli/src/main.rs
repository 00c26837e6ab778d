//! `qgs`: run the vorticity solver, drive the stochastic particle flows and
//! check the algebraic invariants from the command line.

mod config;
mod error;
mod run;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use error::{CliError, CliResult};
use verify::Suite;

#[derive(Parser)]
#[command(name = "qgs", version, about = "Stochastic quasi-geostrophic experiments on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Overrides the ensemble and random-init seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the vorticity equation; writes diagnostics and snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the particle flow; writes paths and the drift report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named invariant suite; exit 1 if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("QGS_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("QGS_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, common } => {
            let cfg = Config::load(&config)?.resolve(common.seed, common.out.as_deref(), false)?;
            run::cmd_run(&cfg, common.quiet)
        }
        Command::Simulate { config, common } => {
            let cfg = Config::load(&config)?.resolve(common.seed, common.out.as_deref(), true)?;
            simulate::cmd_simulate(&cfg, common.quiet)
        }
        Command::Verify { suite, common } => {
            verify::cmd_verify(suite, common.seed.unwrap_or(7), common.out.as_deref(), common.quiet)
        }
    }
}

fn main() -> ExitCode {
    // clap reports usage errors itself with exit status 2
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
