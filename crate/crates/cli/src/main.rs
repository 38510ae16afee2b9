//! `fracb`: solve, verify and explore the fractional non-local problem.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 numerical or runtime failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "fracb",
    version,
    about = "Series solutions of a time-fractional problem with non-local conditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve from a JSON config; writes <prefix>.solution.json and <prefix>.series.csv.
    Solve { config: PathBuf },
    /// Solve and run the verification suite; writes <prefix>.report.json and <prefix>.report.txt.
    Verify { config: PathBuf },
    /// Fractional against classical mode denominators; CSV `alpha,x,D`.
    Resonance(ResonanceArgs),
    /// Evaluate E_{rho,mu}(z), optionally against the high-precision oracle.
    #[command(allow_negative_numbers = true)]
    Ml(MlArgs),
    /// Mittag-Leffler bound sweep and empirical C0.
    Bounds(BoundsArgs),
}

#[derive(Args)]
pub struct ResonanceArgs {
    #[arg(long)]
    pub nu: f64,
    #[arg(long = "T")]
    pub horizon: f64,
    /// Comma-separated orders in (1, 2].
    #[arg(long, value_delimiter = ',', default_values_t = [1.5, 1.9, 1.99, 1.999, 2.0])]
    pub alpha_list: Vec<f64>,
    /// Uniform x points over (0, νT].
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub points: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct MlArgs {
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub z: f64,
    /// Also evaluate the oracle with this many significant digits.
    #[arg(long)]
    pub oracle: Option<u32>,
}

#[derive(Args)]
pub struct BoundsArgs {
    /// Comma-separated orders in (1, 2).
    #[arg(long, value_delimiter = ',', default_values_t = [1.1, 1.3, 1.5, 1.7, 1.9])]
    pub alpha_list: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e6)]
    pub t_max: f64,
    #[arg(long, default_value_t = 49, value_parser = clap::value_parser!(u64).range(2..))]
    pub points: u64,
    /// Orders probed near 2 and recorded without being asserted.
    #[arg(long, value_delimiter = ',', default_values_t = [1.999])]
    pub probe: Vec<f64>,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Failures that end a command with a non-zero exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("FRACB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::Config(format!(
            "FRACB_THREADS: expected a non-negative integer, got {raw:?}"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Numeric(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Solve { config } => commands::solve(&config),
        Command::Verify { config } => commands::verify(&config),
        Command::Resonance(args) => commands::resonance(&args),
        Command::Ml(args) => commands::ml(&args),
        Command::Bounds(args) => commands::bounds(&args),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("fracb: configuration error: {m}"),
                Failure::Numeric(m) => eprintln!("fracb: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
