//! Command-line front end. Every invocation parses its input files, runs one
//! operation from the core library, and emits a single JSON report that
//! embeds the parsed input together with its hash, so re-running a command
//! on its own echoed input is byte-identical.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "hnstrat",
    version,
    about = "Semistability verdicts, filtrations, weights, and stratum certificates for formal complexes of sheaves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report to this file; stdout otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Rendering on stdout: the full report or a line-per-entry summary.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
pub enum Command {
    /// Semistability verdict against the structural test family.
    ///
    /// Exit code 0 when semistable, 1 when destabilized, 2 on errors.
    CheckSs {
        /// Complex invariants (JSON).
        complex: PathBuf,
        /// Stability parameters: family form or explicit triple (JSON).
        #[arg(long)]
        params: PathBuf,
        /// Override the family's epsilon, e.g. "1/10".
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Refined filtration with its type, chain, and epsilon threshold.
    ///
    /// Requires epsilon below the threshold; exit code 1 otherwise, with the
    /// bound printed.
    Hn {
        complex: PathBuf,
        /// Required unless --force-sigma0 is given.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<String>,
        /// Report the degenerate-limit filtration only, at any epsilon.
        #[arg(long)]
        force_sigma0: bool,
    },
    /// Epsilon threshold and the pairwise constraints producing it.
    Epsilon0 {
        complex: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Stratum certificate: index weights, squared norm, distinguished
    /// subgroup, character exponents.
    Beta {
        complex: PathBuf,
        #[arg(long)]
        params: PathBuf,
        /// Evaluation argument for Hilbert polynomials.
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Weight of a given one-parameter subgroup at the evaluation argument.
    Mu {
        complex: PathBuf,
        /// One-parameter subgroup: weights, blocks, quotient ranks (JSON).
        one_ps: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Linearization exponents at the evaluation argument, parameters taken
    /// exactly as given.
    Linearize {
        complex: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: u64,
    },
    /// Brute-force sweep over finite-field complexes, cross-checked against
    /// the structural routines. Exit code 0 only with zero discrepancies.
    Oracle {
        /// Sweep description (JSON).
        sweep: PathBuf,
        /// Enumeration budget; beats the sweep file and HNSTRAT_BUDGET.
        #[arg(long)]
        budget: Option<u128>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
