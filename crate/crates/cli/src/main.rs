//! `bathent` command-line front end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bathent::entanglement::TOL_ENT;
use commands::Exit;
use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "bathent", version, about = "Entanglement of two bosonic modes in a common bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Run even if the bath is not completely positive.
    #[arg(long)]
    allow_non_cp: bool,
    /// Verdict tolerance (oracle-compare: moment deviation bound).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check complete positivity of the bath.
    CheckCp {
        #[command(flatten)]
        common: Common,
    },
    /// Propagate the covariance and write the trajectory as CSV.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        output: PathBuf,
    },
    /// Evaluate the initial-time entanglement generation witness.
    Witness {
        #[command(flatten)]
        common: Common,
    },
    /// Compute the steady state and its PPT verdict.
    Steady {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one collective-bath parameter and write CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of lambda_abs, eta, sigma, omega.
        #[arg(long)]
        param: String,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare the Gaussian flow against the truncated Fock-space reference.
    OracleCompare {
        #[command(flatten)]
        common: Common,
        /// Fock cutoff per mode (overrides the config).
        #[arg(long)]
        cutoff: Option<usize>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::CheckCp { common }
            | Command::Evolve { common, .. }
            | Command::Witness { common }
            | Command::Steady { common }
            | Command::Sweep { common, .. }
            | Command::OracleCompare { common, .. } => common,
        }
    }
}

fn run(cli: Cli) -> commands::Outcome {
    let common = cli.command.common();
    if let Some(tol) = common.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err((Exit::Usage, "--tol must be a non-negative number".into()));
        }
    }
    let cfg = RunConfig::load(&common.config).map_err(|e| {
        let code = match e {
            ConfigError::NoEquilibrium(_) => Exit::Unstable,
            ConfigError::Invalid(_) => Exit::Usage,
        };
        (code, e.to_string())
    })?;
    let allow = common.allow_non_cp;
    let tol = common.tol.unwrap_or(TOL_ENT);
    match &cli.command {
        Command::CheckCp { .. } => commands::check_cp_cmd(&cfg),
        Command::Evolve { output, .. } => commands::evolve_cmd(&cfg, output, allow, tol),
        Command::Witness { .. } => commands::witness_cmd(&cfg, allow, tol),
        Command::Steady { .. } => commands::steady_cmd(&cfg, allow, tol),
        Command::Sweep { param, range, output, .. } => commands::sweep_cmd(&cfg, param, range, output),
        Command::OracleCompare { cutoff, .. } => {
            commands::oracle_compare_cmd(&cfg, *cutoff, allow, common.tol)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Exit::Usage as u8 } else { 0 });
        }
    };
    println!("# bathent {}", env!("CARGO_PKG_VERSION"));
    let code = match run(cli) {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    };
    ExitCode::from(code as u8)
}
