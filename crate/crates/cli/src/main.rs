//! `cstab`: solve, analyze and tabulate the fourth-order compact scheme for
//! `u_v + a(z) u_z - b(z) u_zz = 0`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 stability not certified.

mod commands;
mod error;
mod options;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Artifact, ConvergenceArgs, Ladder, SweepArgs};
use error::{CliError, EXIT_CONFIG, EXIT_NOT_CERTIFIED};
use options::{Format, Options};

#[derive(Parser)]
#[command(
    name = "cstab",
    version,
    about = "Fourth-order compact scheme for 1D convection-diffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand)]
enum Command {
    /// March the scheme and print the profile at one time level (CSV z,u)
    Solve {
        /// Time level to print; defaults to the last
        #[arg(long)]
        level: Option<usize>,
    },
    /// Roots of the characteristic polynomial and the stability verdict
    Stability {
        /// Cross-check the roots against eigenvalues of the dense X⁻¹Y
        #[arg(long)]
        oracle: bool,
    },
    /// Norm bounds and the condition number of I + θW
    Condition,
    /// Reproduce the demonstration tables
    Tables,
    /// Observed orders over a refinement ladder
    Convergence {
        #[arg(long, value_enum, default_value = "space")]
        ladder: Ladder,
        /// Exact solution at time T as a function of z; without it a
        /// built-in manufactured problem is used
        #[arg(long = "exact-expr")]
        exact_expr: Option<String>,
        /// Number of refinement levels
        #[arg(long, default_value_t = 4)]
        rungs: usize,
        /// δv / δz² held along the space ladder
        #[arg(long = "mesh-ratio", default_value_t = 0.25)]
        mesh_ratio: f64,
    },
    /// Stability certificate for constant coefficients over a sweep
    ConstantCheck {
        #[arg(long = "c-values", value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
        c_values: Vec<f64>,
        #[arg(long = "d-values", value_delimiter = ',', default_values_t = [0.01, 0.1, 1.0, 10.0, 100.0])]
        d_values: Vec<f64>,
        #[arg(long = "n-values", value_delimiter = ',', default_values_t = [4, 16, 64])]
        n_values: Vec<usize>,
    },
}

impl Command {
    fn default_format(&self) -> Format {
        match self {
            Command::Solve { .. } | Command::Tables => Format::Csv,
            _ => Format::Text,
        }
    }
}

fn run(cli: Cli) -> Result<Artifact, CliError> {
    let options = cli.options.with_config()?;
    let format = options
        .format
        .unwrap_or_else(|| cli.command.default_format());
    let artifact = match cli.command {
        Command::Solve { level } => commands::solve(&options, level, format)?,
        Command::Stability { oracle } => commands::stability(&options, oracle, format)?,
        Command::Condition => commands::condition(&options, format)?,
        Command::Tables => commands::tables(&options, format)?,
        Command::Convergence {
            ladder,
            exact_expr,
            rungs,
            mesh_ratio,
        } => commands::convergence(
            &options,
            &ConvergenceArgs {
                ladder,
                exact_expr,
                rungs,
                mesh_ratio,
            },
            format,
        )?,
        Command::ConstantCheck {
            c_values,
            d_values,
            n_values,
        } => commands::constant_check(
            &SweepArgs {
                c_values,
                d_values,
                n_values,
            },
            format,
        )?,
    };
    match &options.output {
        Some(path) => std::fs::write(path, &artifact.body)?,
        None => match std::io::stdout().write_all(artifact.body.as_bytes()) {
            // A closed pipe (`cstab ... | head`) is not an error.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(artifact)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(artifact) if artifact.certified => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(EXIT_NOT_CERTIFIED as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
