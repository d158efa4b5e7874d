//! `thr` — design tooling for two-order Helmholtz resonators: forward
//! spectra, dataset generation, surrogate training, inverse design, the
//! genetic optimizer, duct-network evaluation and self-checks.
//!
//! Every command is a pure function of its inputs, flags and seed:
//! re-running a command reproduces its output files byte for byte.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

use clap::Parser;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "thr",
    version,
    about = "Lumped-parameter modeling and data-driven inverse design of two-order Helmholtz resonators"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: config::GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Transmission-loss spectrum and resonances of one resonator.
    Stl(commands::stl::StlArgs),
    /// Generate the training corpus.
    GenData(commands::gen_data::GenDataArgs),
    /// Train the spectrum → parameters surrogate.
    Train(commands::train::TrainArgs),
    /// Inverse-design a resonator for two target resonances.
    Design(commands::design::DesignArgs),
    /// Genetic optimization of the transmission loss at two targets.
    Optimize(commands::optimize::OptimizeArgs),
    /// Evaluate a duct network of segments and side branches.
    Tmm(commands::tmm::TmmArgs),
    /// Run the self-check suites.
    Check(commands::check::CheckArgs),
}

/// Entry point returning the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = config::resolve(&cli.global).and_then(|resolved| match cli.command {
        Command::Stl(args) => commands::stl::run(&resolved, args),
        Command::GenData(args) => commands::gen_data::run(&resolved, args),
        Command::Train(args) => commands::train::run(&resolved, args),
        Command::Design(args) => commands::design::run(&resolved, args),
        Command::Optimize(args) => commands::optimize::run(&resolved, args),
        Command::Tmm(args) => commands::tmm::run(&resolved, args),
        Command::Check(args) => commands::check::run(&resolved, args),
    });
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Common report preamble embedded in every JSON report.
#[derive(Debug, serde::Serialize)]
pub struct ReportHeader {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub constants: thr_core::constants::PhysicalConstants,
}

impl ReportHeader {
    pub fn new(command: &'static str, resolved: &config::Resolved, seed: u64) -> Self {
        Self {
            tool: "thr",
            version: TOOL_VERSION,
            command,
            seed,
            constants: resolved.constants,
        }
    }
}
