use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use opspace_lab::runner::{parse_matrix, run, Command, RunConfig, VSpec, EXIT_USAGE};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    VerifyLemmas,
    CheckConditions,
    FindUnit,
    Classify,
    Report,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::VerifyLemmas => Command::VerifyLemmas,
            Cmd::CheckConditions => Command::CheckConditions,
            Cmd::FindUnit => Command::FindUnit,
            Cmd::Classify => Command::Classify,
            Cmd::Report => Command::Report,
        }
    }
}

/// Verify unit and product conditions on finite-dimensional operator spaces.
#[derive(Debug, Parser)]
#[command(name = "opspace-lab", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Space definition (JSON).
    #[arg(long)]
    space: Option<PathBuf>,
    /// Distinguished element: "search", or a JSON matrix of [re, im] pairs or reals.
    #[arg(long, default_value = "search")]
    v: String,
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, env = "OPSPACE_LAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Recompute the witnesses in a saved report.
    #[arg(long)]
    replay: Option<PathBuf>,
}

fn config(args: Args) -> Result<RunConfig, String> {
    let v = if args.v.trim() == "search" {
        VSpec::Search
    } else {
        VSpec::Inline(parse_matrix(&args.v).map_err(|e| format!("--v: {e}"))?)
    };
    let mut cfg = RunConfig::new(args.command.into());
    cfg.space_file = args.space;
    cfg.v = v;
    cfg.n_max = args.n_max;
    cfg.trials = args.trials;
    cfg.restarts = args.restarts;
    cfg.steps = args.steps;
    cfg.seed = args.seed;
    cfg.tol = args.tol;
    cfg.output = args.output;
    cfg.replay = args.replay;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE as u8) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match config(args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let outcome = run(&cfg);
    for line in &outcome.diagnostics {
        eprintln!("{line}");
    }
    if let Some(json) = &outcome.stdout {
        print!("{json}");
    }
    ExitCode::from(outcome.exit_code as u8)
}
