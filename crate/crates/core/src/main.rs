use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gchlab::harness::{run_command, Command, RunConfig};
use gchlab::GchError;

/// Numerical experiments for the generalized Camassa-Holm equation.
#[derive(Debug, Parser)]
#[command(name = "gchlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Eulerian pseudospectral run of the momentum form.
    Simulate(RunArgs),
    /// Frozen-coefficient iteration with the a priori bound fit.
    Iterate(RunArgs),
    /// Particle (characteristic) solver with breaking monitor.
    Lagrange(RunArgs),
    /// Critical Besov norm of the configured initial data.
    Norms(RunArgs),
    /// The experiment named by `run.experiment`.
    Experiment(RunArgs),
    /// Three-solver cross-check.
    Crosscheck(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `run.output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `run.seed`).
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=gchlab::harness::config::MAX_SEED))]
    seed: Option<u64>,
    /// Print nothing but errors.
    #[arg(long)]
    quiet: bool,
}

const EXIT_USAGE: u8 = 1;
const EXIT_VERDICT: u8 = 2;

fn is_config_error(e: &GchError) -> bool {
    matches!(
        e,
        GchError::Config(_)
            | GchError::InvalidGrid(_)
            | GchError::InvalidParameter(_)
            | GchError::Unresolvable(_)
            | GchError::GridMismatch { .. }
            | GchError::BlockOutOfRange { .. }
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (cmd, args) = match cli.command {
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Iterate(a) => (Command::Iterate, a),
        Sub::Lagrange(a) => (Command::Lagrange, a),
        Sub::Norms(a) => (Command::Norms, a),
        Sub::Experiment(a) => (Command::Experiment, a),
        Sub::Crosscheck(a) => (Command::Crosscheck, a),
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if args.quiet {
        "error"
    } else {
        "warn"
    }))
    .init();

    let mut cfg = match RunConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("gchlab: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    let dir = args
        .out
        .or_else(|| cfg.run.output_dir.clone())
        .unwrap_or_else(|| {
            let name = match cmd {
                Command::Experiment => cfg.run.experiment.clone().unwrap_or_default(),
                other => format!("{other:?}").to_lowercase(),
            };
            PathBuf::from("gchlab-out").join(name)
        });

    match run_command(cmd, &cfg, &dir) {
        Ok(report) => {
            if cmd == Command::Norms {
                println!("besov_norm_m0 = {}", report.fitted["besov_norm_m0"]);
            }
            if !args.quiet {
                print!("{}", report.summary());
                println!("  output: {}", dir.display());
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERDICT)
            }
        }
        Err(e) => {
            eprintln!("gchlab: {e}");
            ExitCode::from(if is_config_error(&e) || matches!(e, GchError::Io(_)) {
                EXIT_USAGE
            } else {
                EXIT_VERDICT
            })
        }
    }
}
