//! `qphase`: state generation, canonical statistics and feedback simulations
//! as CSV.
//!
//! Exit status 0 on success, 2 for an invalid configuration, 3 when the
//! numerics hit a degenerate distribution or an undefined mean phase.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CommonArgs, ExperimentConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<qphase::Error> for CliError {
    fn from(e: qphase::Error) -> Self {
        use qphase::Error as E;
        match e {
            E::DegenerateDistribution | E::ZeroMoment { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qphase",
    version,
    about = "Interferometric phase estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an input state as JSON.
    State(CommonArgs),
    /// Canonical-measurement variances, or the distribution itself with --dist.
    Canonical(CanonicalArgs),
    /// Monte Carlo variance of a feedback policy, one row per photon number.
    Simulate(CommonArgs),
    /// Exact variance by summing over every measurement record.
    Enumerate(CommonArgs),
    /// Canonical curves and simulated markers for the variance-vs-N figure.
    SweepFig3(CommonArgs),
}

#[derive(Args, Debug)]
struct CanonicalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Emit `phi,density` on a 4096-point grid instead of variances.
    #[arg(long)]
    dist: bool,
    /// Multiply the density by sin^2 phi (with --dist).
    #[arg(long)]
    multiply_sin2: bool,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QPHASE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "QPHASE_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (common, extra, cmd): (
        &CommonArgs,
        ExperimentConfig,
        fn(&ExperimentConfig) -> Result<(), CliError>,
    ) = match &cli.command {
        Command::State(a) => (a, ExperimentConfig::default(), commands::state),
        Command::Canonical(a) => {
            let extra = ExperimentConfig {
                dist: a.dist.then_some(true),
                multiply_sin2: a.multiply_sin2.then_some(true),
                ..Default::default()
            };
            (&a.common, extra, commands::canonical)
        }
        Command::Simulate(a) => (a, ExperimentConfig::default(), commands::simulate),
        Command::Enumerate(a) => (a, ExperimentConfig::default(), commands::enumerate),
        Command::SweepFig3(a) => (a, ExperimentConfig::default(), commands::sweep_fig3),
    };
    let cfg = common.resolve(extra)?;
    if common.print_config {
        let text =
            serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
        return output::write_text(None, &(text + "\n"));
    }
    cmd(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // a closed downstream pipe (`| head`) is not a failure
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qphase: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
