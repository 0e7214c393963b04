//! `stablebranch` command-line tool.

mod commands;
mod grid;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Branching stable motions with a localized catalyst.
#[derive(Debug, Parser)]
#[command(name = "stablebranch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; tables go to stdout when omitted.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides `sim.base_seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for ensembles (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Fail with exit code 3 unless the principal eigenvalue is negative.
    #[arg(long, global = true)]
    require_negative: bool,
}

#[derive(Debug, Args)]
struct RadialArgs {
    /// Dimension (taken from the config when omitted).
    #[arg(long)]
    dim: Option<usize>,
    /// Stability index (taken from the config when omitted).
    #[arg(long)]
    alpha: Option<f64>,
    /// Radii: `r1,r2,...`, `lin:START:STOP:N` or `log:START:STOP:N`.
    #[arg(long, default_value = "log:0.01:100:41")]
    grid: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the radial density g(r) with its tail asymptote.
    Density(RadialArgs),
    /// Tabulate the resolvent density w_β(r) with its asymptotes.
    Resolvent {
        #[command(flatten)]
        radial: RadialArgs,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Spectral summary (eigenvalue, ground state, limit constants) as JSON.
    Spectrum,
    /// Run an ensemble and write runs.csv and summary.json.
    Simulate,
    /// Check the limit laws against two ensembles from independent seeds.
    Verify {
        /// Runs table whose maxima are tested.
        #[arg(long, value_name = "PATH")]
        runs: PathBuf,
        /// Runs table supplying the martingale values for the prediction.
        #[arg(long, value_name = "PATH")]
        mixture: PathBuf,
    },
    /// Spectrum, both ensembles and the verification report in one go.
    Reproduce,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
