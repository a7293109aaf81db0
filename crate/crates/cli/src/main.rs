//! `stekloff`: command-line front end of the Stekloff eigenvalue laboratory.
//!
//! Exit codes: 0 success, 1 I/O, 2 domain or validity error, 3 oracle
//! disagreement, 4 invariant violation, 64 usage.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "stekloff", version, about = "Electromagnetic Stekloff eigenvalue laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form TE/TM spectrum of the unit ball.
    BallSpectrum(Flags),
    /// Full verification of random (or given) block models, one JSON report each.
    ModelVerify(Flags),
    /// Tau-curves and their fixed points on one side of a model.
    TauCurves(Flags),
    /// Radial Galerkin spectra of the modified boundary problems.
    Modified(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Angular frequency.
    #[arg(long)]
    omega: Option<f64>,
    /// Largest harmonic degree.
    #[arg(long, allow_negative_numbers = true)]
    n_max: Option<i64>,
    /// Block dimensions `V,W1,W2`.
    #[arg(long)]
    dims: Option<String>,
    /// Seeds: `N` (0..N), `a..b`, or `a,b,c`.
    #[arg(long)]
    seeds: Option<String>,
    /// Search window `a,b`.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Number of curve sample points.
    #[arg(long)]
    grid: Option<usize>,
    /// Radial basis size.
    #[arg(long)]
    basis: Option<usize>,
    /// Table format: `csv` or `json`.
    #[arg(long)]
    format: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model JSON file, `example-golden` or `example-empty`.
    #[arg(long)]
    model: Option<String>,
    /// Schur side: `w1` or `v`.
    #[arg(long)]
    side: Option<String>,
    /// `scalar-lb`, `s-projection` or `both`.
    #[arg(long)]
    problem: Option<String>,
}

impl Flags {
    fn to_config(&self) -> Result<RunConfig, CliError> {
        Ok(RunConfig {
            omega: self.omega,
            n_max: self.n_max,
            dims: self.dims.as_deref().map(config::parse_dims).transpose()?,
            seeds: self.seeds.as_deref().map(config::parse_seeds).transpose()?,
            window: self.window.as_deref().map(config::parse_window).transpose()?,
            grid: self.grid,
            basis: self.basis,
            format: self.format.as_deref().map(config::parse_format).transpose()?,
            out: self.out.clone(),
            model: self.model.clone(),
            side: self.side.as_deref().map(config::parse_side).transpose()?,
            problem: self.problem.as_deref().map(config::parse_problem).transpose()?,
        })
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let flags = self.to_config()?;
        let base = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        Ok(base.merged(flags))
    }
}

fn run(cli: Cli) -> Result<commands::Written, CliError> {
    match cli.command {
        Command::BallSpectrum(f) => commands::ball_spectrum(&f.resolve()?),
        Command::ModelVerify(f) => commands::model_verify(&f.resolve()?),
        Command::TauCurves(f) => commands::tau_curves(&f.resolve()?),
        Command::Modified(f) => commands::modified(&f.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("stekloff: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
