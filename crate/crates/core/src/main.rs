use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fieldmaps::io::commands::error_report;
use fieldmaps::io::{load_instance, run_command, to_canonical_json, Command, CommandOptions};

/// Certified norms, calculus and fixed-point solves for polynomial field maps.
#[derive(Debug, Parser)]
#[command(name = "fieldmaps", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// instance file (JSON)
    instance: PathBuf,
    #[arg(long)]
    degree_cap: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// comma separated terminal points for `steiner`
    #[arg(long, value_delimiter = ',')]
    terminals: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// add wall-clock time to the report
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = CommandOptions {
        degree_cap: cli.degree_cap,
        tol: cli.tol,
        max_iter: cli.max_iter,
        seed: cli.seed,
        terminals: cli.terminals,
        trials: cli.trials,
        timing: cli.timing,
    };
    let outcome = load_instance(&cli.instance).and_then(|inst| run_command(cli.command, &inst, &opts));
    match outcome {
        Ok(o) => {
            print!("{}", to_canonical_json(&o.report));
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            print!("{}", to_canonical_json(&error_report(&e)));
            ExitCode::from(2)
        }
    }
}
