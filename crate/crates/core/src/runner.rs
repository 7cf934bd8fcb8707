//! Batch pipeline behind the command-line front end.
//!
//! [`run`] never panics on bad input: usage and parse problems map to exit
//! code 64 with a diagnostic, check outcomes map to 0 (pass), 1 (fail) or
//! 2 (inconclusive). Output is pretty-printed JSON with no timestamps, so a
//! fixed seed gives byte-identical output.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cmatrix::{ComplexMatrix, DEFAULT_TOL};
use crate::discover::{adjoint_intersection, find_unit, tro_closure, ClosureReport, UnitCandidate};
use crate::error::{LabError, Result};
use crate::opspace::OperatorSpace;
use crate::verify::{replay, Budget, ReplayEntry, Status, VerificationReport, VerifyOptions};

pub const EXIT_USAGE: i32 = 64;
/// Largest replay deviation accepted.
pub const REPLAY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyLemmas,
    CheckConditions,
    FindUnit,
    Classify,
    Report,
}

/// The distinguished element: given inline or searched for.
#[derive(Debug, Clone, PartialEq)]
pub enum VSpec {
    Search,
    Inline(ComplexMatrix),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub space_file: Option<PathBuf>,
    pub v: VSpec,
    pub n_max: usize,
    pub trials: usize,
    pub restarts: usize,
    pub steps: usize,
    pub seed: u64,
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub replay: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let budget = Budget::default();
        Self {
            command,
            space_file: None,
            v: VSpec::Search,
            n_max: 3,
            trials: 1000,
            restarts: budget.restarts,
            steps: budget.steps,
            seed: 0,
            tol: DEFAULT_TOL,
            output: None,
            replay: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_max == 0 || self.trials == 0 || self.restarts == 0 {
            return Err(LabError::Unsupported("n-max, trials and restarts must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(LabError::Unsupported(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Exit code, JSON text and diagnostics of a run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    /// JSON written to stdout when no output path is configured.
    pub stdout: Option<String>,
    pub diagnostics: Vec<String>,
}

impl RunOutcome {
    fn usage(err: LabError) -> Self {
        Self {
            exit_code: EXIT_USAGE,
            stdout: None,
            diagnostics: vec![format!("error: {err}")],
        }
    }
}

/// Parses an inline matrix: rows of `[re, im]` pairs, or rows of real numbers.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    match serde_json::from_str::<ComplexMatrix>(text) {
        Ok(m) => Ok(m),
        Err(complex_err) => match serde_json::from_str::<Vec<Vec<f64>>>(text) {
            Ok(rows) => {
                let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
                ComplexMatrix::from_real_rows(&refs)
            }
            Err(_) => Err(complex_err.into()),
        },
    }
}

pub fn load_space(path: &std::path::Path) -> Result<OperatorSpace> {
    let text = std::fs::read_to_string(path)?;
    OperatorSpace::from_json(&text)
}

/// Output of `find-unit`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitReport {
    pub unit: UnitCandidate,
    pub trace: Vec<f64>,
    pub status: Status,
}

/// Output of `classify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub closure: ClosureReport,
    /// Dimension of `A ∩ A*`, for square ambients.
    pub adjoint_intersection_dim: Option<usize>,
    pub report: VerificationReport,
}

/// Output of `--replay`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayReport {
    pub entries: Vec<ReplayEntry>,
    pub max_deviation: f64,
    pub status: Status,
}

fn resolve_unit(space: &OperatorSpace, cfg: &RunConfig) -> Result<(UnitCandidate, Vec<f64>)> {
    match &cfg.v {
        VSpec::Inline(m) => {
            if m.shape() != space.shape() {
                return Err(LabError::Shape {
                    op: "v",
                    left_rows: space.rows(),
                    left_cols: space.cols(),
                    right_rows: m.rows(),
                    right_cols: m.cols(),
                });
            }
            Ok((UnitCandidate::from_user(space, m.clone())?, Vec::new()))
        }
        VSpec::Search => {
            let s = find_unit(space, cfg.restarts, cfg.steps, cfg.seed)?;
            Ok((s.candidate, s.trace))
        }
    }
}

fn options(cfg: &RunConfig, lemmas: bool, conditions: bool) -> VerifyOptions {
    VerifyOptions {
        lemmas,
        conditions,
        trials: cfg.trials,
        n_max: cfg.n_max,
        budget: Budget {
            restarts: cfg.restarts,
            steps: cfg.steps,
        },
        seed: cfg.seed,
        tol: cfg.tol,
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Accepts a bare report or a classification wrapping one.
fn parse_report(text: &str) -> Result<VerificationReport> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let inner = match value.get("report") {
        Some(r) => r.clone(),
        None => value,
    };
    Ok(serde_json::from_value(inner)?)
}

fn execute(cfg: &RunConfig) -> Result<(Status, String)> {
    cfg.validate()?;
    if let Some(path) = &cfg.replay {
        let report = parse_report(&std::fs::read_to_string(path)?)?;
        let entries = replay(&report)?;
        let max_deviation = entries.iter().map(ReplayEntry::deviation).fold(0.0, f64::max);
        let status = if max_deviation <= REPLAY_TOL { Status::Pass } else { Status::Fail };
        return Ok((status, to_json(&ReplayReport { entries, max_deviation, status })?));
    }
    let path = cfg
        .space_file
        .as_ref()
        .ok_or_else(|| LabError::Unsupported("--space is required".into()))?;
    let space = load_space(path)?;
    let (unit, trace) = resolve_unit(&space, cfg)?;
    let v = unit.v.clone();
    match cfg.command {
        Command::FindUnit => {
            let status = if unit.cond_i_residual <= cfg.tol { Status::Pass } else { Status::Fail };
            Ok((status, to_json(&UnitReport { unit, trace, status })?))
        }
        Command::VerifyLemmas | Command::CheckConditions | Command::Report => {
            let (lemmas, conditions) = match cfg.command {
                Command::VerifyLemmas => (true, false),
                Command::CheckConditions => (false, true),
                _ => (true, true),
            };
            let report = crate::verify::verify(&space, Some(unit), v, &options(cfg, lemmas, conditions))?;
            Ok((report.verdict.status, to_json(&report)?))
        }
        Command::Classify => {
            let closure = tro_closure(&space)?;
            let adjoint_intersection_dim = if space.is_square() {
                Some(adjoint_intersection(&space)?.dim())
            } else {
                None
            };
            let report = crate::verify::verify(&space, Some(unit), v, &options(cfg, true, true))?;
            let status = report.verdict.status;
            let c = Classification {
                closure,
                adjoint_intersection_dim,
                report,
            };
            Ok((status, to_json(&c)?))
        }
    }
}

/// Runs a configured command.
pub fn run(cfg: &RunConfig) -> RunOutcome {
    let (status, json) = match execute(cfg) {
        Ok(r) => r,
        Err(e) => return RunOutcome::usage(e),
    };
    let mut diagnostics = Vec::new();
    let stdout = match &cfg.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                return RunOutcome::usage(e.into());
            }
            diagnostics.push(format!("wrote {}", path.display()));
            None
        }
        None => Some(json),
    };
    RunOutcome {
        exit_code: status.exit_code(),
        stdout,
        diagnostics,
    }
}
