//! symbreak: explore symmetry-breaking critical points of symmetric tensor
//! decomposition losses.
//!
//! Subcommands: survey (multi-start descent driven by a TOML config),
//! verify-fixtures (re-verify the bundled spurious minima), fpspace
//! (symbolic restriction and exact solve), isotropy (group detection on a
//! stored matrix), groebner (raw basis computation), print-config.
//!
//! Exit codes: 0 full pass, 1 verification failure, 2 operational error.

mod commands;
mod config;
mod svg;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{fpspace, groebner, isotropy, survey, verify};

#[derive(Parser, Debug)]
#[command(
    name = "symbreak",
    version,
    about = "Symmetry-breaking critical points of symmetric tensor decompositions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run a multi-start gradient descent survey from a TOML config.
    Survey(survey::SurveyArgs),
    /// Verify the bundled spurious-minimum fixture tables.
    VerifyFixtures(verify::VerifyArgs),
    /// Restrict the loss to a fixed-point family and solve it exactly.
    Fpspace(fpspace::FpspaceArgs),
    /// Detect the isotropy group of a matrix stored as CSV.
    Isotropy(isotropy::IsotropyArgs),
    /// Compute a reduced lex Groebner basis from a polynomial system file.
    Groebner(groebner::GroebnerArgs),
    /// Print the default survey configuration as TOML.
    PrintConfig,
}

/// SYMBREAK_THREADS caps the worker pool; unset means rayon's default.
fn init_threads() -> Result<()> {
    match std::env::var("SYMBREAK_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .context("SYMBREAK_THREADS must be a positive integer")?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("installing the global thread pool")?;
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn run(cli: Cli) -> Result<i32> {
    init_threads()?;
    match cli.cmd {
        Cmd::Survey(args) => survey::run(&args),
        Cmd::VerifyFixtures(args) => verify::run(&args),
        Cmd::Fpspace(args) => fpspace::run(&args),
        Cmd::Isotropy(args) => isotropy::run(&args),
        Cmd::Groebner(args) => groebner::run(&args),
        Cmd::PrintConfig => {
            print!("{}", config::ExperimentConfig::default().to_toml());
            Ok(0)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
