//! `nlds`: eigenvalue brackets and threshold dynamics for nonlocal
//! dispersal systems, driven by scenario config files.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure,
//! 4 prediction/observation coherence failure.

mod commands;
mod config;
mod report;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::commands::CoherenceFailure;
use crate::config::Config;
use crate::report::Reporter;

#[derive(Parser)]
#[command(
    name = "nlds",
    version,
    about = "Generalized principal eigenvalue brackets and threshold dynamics \
             for cooperative nonlocal dispersal systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario config file.
    #[arg(long, global = true, default_value = "scenario.cfg")]
    config: PathBuf,

    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for per-node parallel work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Principal eigenpair, essential spectrum and existence tests.
    Eig,
    /// Control-operator squeeze of the generalized principal eigenvalue.
    Squeeze,
    /// Time integration with a squeeze-coherence verdict.
    Simulate,
    /// Monotone equilibrium iteration and the positivity/uniqueness probes.
    Equilibrium,
    /// Squeeze across a parameter range.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("nlds: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("nlds: {err:#}");
            ExitCode::from(classify_error(&err))
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = Config::from_file(&cli.config)?;
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(cfg.get_str_or("output", "dir", "out")));
    let reporter = Reporter::new(&out_dir, &cfg.canonical_text(), cli.seed)?;
    match cli.command {
        Command::Eig => commands::cmd_eig(&cfg, &reporter),
        Command::Squeeze => commands::cmd_squeeze(&cfg, &reporter),
        Command::Simulate => commands::cmd_simulate(&cfg, &reporter, cli.seed),
        Command::Equilibrium => commands::cmd_equilibrium(&cfg, &reporter, cli.seed),
        Command::Sweep => commands::cmd_sweep(&cfg, &reporter),
    }
}

/// Config problems exit 2, coherence failures 4, numerics 3.
fn classify_error(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<CoherenceFailure>().is_some() {
        return 4;
    }
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<nlds_core::CoreError>() {
            return match core {
                nlds_core::CoreError::EigensolverFailure(_)
                | nlds_core::CoreError::IntegrationFailure(_)
                | nlds_core::CoreError::IterationFailure(_) => 3,
                _ => 2,
            };
        }
    }
    2
}
