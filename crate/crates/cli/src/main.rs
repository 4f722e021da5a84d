//! `tca`: batch runner for twisted crossed product experiments.
//!
//! Exit codes: 0 on PASS, 1 on FAIL, 2 on input errors.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::Kind;

#[derive(Parser)]
#[command(name = "tca", version, about = "Twisted crossed product experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the twisted-system axioms (action and cocycle identities).
    Verify(RunArgs),
    /// Check the Banach *-algebra laws and the Γ morphism properties.
    Laws(RunArgs),
    /// Gelfand-formula symmetry probe for h = f^⋄ ⋄ f.
    Spectrum(RunArgs),
    /// Off-diagonal decay of the inverse of an integrated form.
    Wiener(RunArgs),
    /// Growth conditions of a weight.
    Grs(RunArgs),
    /// Print the built-in systems and the string grammars of config fields.
    List {
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for `<kind>.json` and `<kind>.csv`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TCA_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .with_context(|| format!("TCA_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    Ok(())
}

fn execute(kind: Kind, args: &RunArgs) -> Result<bool> {
    let loaded = config::load(&args.config, kind, args.seed)?;
    let report = run::run(kind, &loaded)?;
    output::write(&args.out, &report)?;
    output::summarize(&report);
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let (kind, args) = match &cli.command {
        Command::List { json } => {
            return match output::print_catalog(*json) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            };
        }
        Command::Verify(a) => (Kind::Verify, a),
        Command::Laws(a) => (Kind::Laws, a),
        Command::Spectrum(a) => (Kind::Spectrum, a),
        Command::Wiener(a) => (Kind::Wiener, a),
        Command::Grs(a) => (Kind::Grs, a),
    };
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
