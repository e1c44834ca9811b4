use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use powershift::CtSolverConfig;
use powershift_cli::{cmd_bench, cmd_compare, cmd_ref, cmd_run, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Two-speed powershift transmission simulator.
///
/// Exit codes: 0 ok, 1 usage or validation error, 2 I/O error, 3 solver
/// failure. The environment variable POWERSHIFT_SEED is reserved; the model
/// is deterministic and currently ignores it.
#[derive(Parser)]
#[command(name = "powershift", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fixed-step simulation and write its CSV trace
    Run {
        /// Scenario file
        scenario: PathBuf,
        /// Output CSV path
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Integrate the adaptive continuous-time reference and write its trace
    Ref {
        scenario: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Relative local-error tolerance
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
        /// Absolute local-error tolerance (rad/s)
        #[arg(long, default_value_t = 1e-9)]
        abs_tol: f64,
        /// Maximum step size (s)
        #[arg(long, default_value_t = 1e-3)]
        max_step: f64,
        /// Event localization tolerance (s)
        #[arg(long, default_value_t = 1e-9)]
        event_tol: f64,
    },
    /// Sweep fixed step sizes against the reference and report sup errors
    Compare {
        scenario: PathBuf,
        /// Comma-separated step sizes, e.g. 0.05,0.02,0.0025
        #[arg(long, value_delimiter = ',', required = true)]
        ts: Vec<f64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Measure per-step execution time of the fixed-step simulation
    Bench {
        scenario: PathBuf,
        /// Number of timed executions (a warm-up run is excluded)
        #[arg(long, default_value_t = 20)]
        executions: usize,
        /// Optional CSV of per-execution mean step times
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, out } => cmd_run(&scenario, &out),
        Command::Ref {
            scenario,
            out,
            rel_tol,
            abs_tol,
            max_step,
            event_tol,
        } => {
            let cfg = CtSolverConfig {
                rel_tol,
                abs_tol,
                max_step,
                event_tol,
            };
            cmd_ref(&scenario, &out, &cfg)
        }
        Command::Compare { scenario, ts, out } => cmd_compare(&scenario, &ts, &out),
        Command::Bench {
            scenario,
            executions,
            out,
        } => cmd_bench(&scenario, executions, out.as_deref()).map(|_| ()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
