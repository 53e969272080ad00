use std::path::PathBuf;
use std::process::ExitCode;

use bilayer_lab::check::run_oracle_suite;
use bilayer_lab::config::ExperimentKind;
use bilayer_lab::run_experiment;
use clap::{Args, Parser, Subcommand};

/// Batch experiments for the bilayer energy laboratory.
///
/// Exit status: 0 on success, 1 for configuration or I/O errors, 2 when a numerical
/// invariant or a `--check` oracle fails.
#[derive(Debug, Parser)]
#[command(name = "bilayer-lab", version)]
struct Cli {
    /// Run the built-in oracle suite (before the experiment, if one is given).
    #[arg(long, global = true)]
    check: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// G of the recovery pair against W along a ladder of epsilon.
    Convergence(RunArgs),
    /// Rasterized rings against the exact ring transport cost.
    Grid(RunArgs),
    /// Disc and strip energies over a ladder of masses.
    Scaling(RunArgs),
    /// Exact ring energy against its large-radius development.
    Ring(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// CSV file to write.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if cli.check {
        let results = run_oracle_suite();
        for r in &results {
            println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        }
        if results.iter().any(|r| !r.passed) {
            return ExitCode::from(2);
        }
    }
    let Some(command) = cli.command else {
        if cli.check {
            return ExitCode::SUCCESS;
        }
        eprintln!("nothing to do: give a subcommand or --check (see --help)");
        return ExitCode::from(1);
    };
    let (kind, args) = match command {
        Command::Convergence(a) => (ExperimentKind::Convergence, a),
        Command::Grid(a) => (ExperimentKind::GridValidation, a),
        Command::Scaling(a) => (ExperimentKind::Scaling, a),
        Command::Ring(a) => (ExperimentKind::RingSweep, a),
    };
    match run_experiment(kind, &args.config, &args.out) {
        Ok(summary) => {
            for line in summary {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
