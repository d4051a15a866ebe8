//! Parameter sweeps from a JSON spec.
//!
//! ```json
//! {
//!   "name": "p-scan",
//!   "kappa": [10], "solution": [1, 2], "p": [4, 5], "shots": [1000],
//!   "strategy": ["none", "abs-ratio"],
//!   "repeats": 3,
//!   "iterations": 20, "mode": "sampled"
//! }
//! ```
//!
//! Optional keys: `seeds` (explicit list, overrides `repeats` and `seed`),
//! `seed` (first seed, default 0), `evolution`, `slices`, `pre_shift`.

use std::fs;
use std::path::{Path, PathBuf};

use iimhhl::hamsim::EvolutionMode;
use iimhhl::hhl::ReadoutMode;
use iimhhl::refine::ShiftStrategy;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::SweepArgs;
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, OutputSet};
use crate::runs::RunSpec;

fn default_iterations() -> usize {
    20
}

fn default_slices() -> usize {
    6
}

fn default_mode() -> String {
    "sampled".into()
}

fn default_evolution() -> String {
    "exact".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    pub kappa: Vec<f64>,
    pub solution: Vec<usize>,
    pub p: Vec<usize>,
    pub shots: Vec<u64>,
    pub strategy: Vec<String>,
    #[serde(default)]
    pub repeats: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_evolution")]
    pub evolution: String,
    #[serde(default = "default_slices")]
    pub slices: usize,
    #[serde(default)]
    pub pre_shift: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct SweepRow {
    name: String,
    kappa: f64,
    solution: usize,
    p: usize,
    shots: u64,
    strategy: String,
    seed: u64,
    iteration: usize,
    rel_error: f64,
    residual_norm: f64,
    cumulative_measurements: u64,
}

const HEADER: [&str; 11] = [
    "name",
    "kappa",
    "solution",
    "p",
    "shots",
    "strategy",
    "seed",
    "iteration",
    "rel_error",
    "residual_norm",
    "cumulative_measurements",
];

/// A spec error pinned to the line of the offending field.
fn field_error(path: &Path, text: &str, field: &str, message: String) -> CliError {
    let needle = format!("\"{field}\"");
    let (line, column) = text
        .lines()
        .enumerate()
        .find_map(|(i, l)| l.find(&needle).map(|c| (i + 1, c + 1)))
        .unwrap_or((1, 1));
    CliError::Spec {
        path: path.display().to_string(),
        line,
        column,
        message: format!("field `{field}`: {message}"),
    }
}

/// Parsed and checked sweep, ready to expand.
#[derive(Debug)]
pub struct Sweep {
    pub name: String,
    pub runs: Vec<(String, RunSpec)>,
}

pub fn parse_spec(path: &Path, text: &str) -> CliResult<Sweep> {
    let spec: SweepSpec = serde_json::from_str(text).map_err(|e| CliError::Spec {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let bad = |field: &str, msg: String| field_error(path, text, field, msg);

    let safe = |c: char| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.');
    if spec.name.is_empty() || !spec.name.chars().all(safe) || spec.name.starts_with('.') {
        return Err(bad("name", format!("{:?} must be non-empty and use only letters, digits, '-', '_' or '.'", spec.name)));
    }
    if let Some(k) = spec.kappa.iter().find(|k| !(k.is_finite() && **k >= 1.0)) {
        return Err(bad("kappa", format!("{k} must be at least 1")));
    }
    if let Some(s) = spec.solution.iter().find(|s| !matches!(s, 1 | 2)) {
        return Err(bad("solution", format!("{s} must be 1 or 2")));
    }
    if let Some(p) = spec.p.iter().find(|p| !(1..=16).contains(*p)) {
        return Err(bad("p", format!("{p} must be between 1 and 16")));
    }
    let readout = match spec.mode.as_str() {
        "sampled" => ReadoutMode::Sampled,
        "statevector" => ReadoutMode::Statevector,
        other => return Err(bad("mode", format!("{other:?} must be \"sampled\" or \"statevector\""))),
    };
    if readout == ReadoutMode::Sampled && spec.shots.contains(&0) {
        return Err(bad("shots", "sampled runs need at least one shot".into()));
    }
    let evolution = match spec.evolution.as_str() {
        "exact" => EvolutionMode::Exact,
        "trotter" => EvolutionMode::Trotter,
        other => return Err(bad("evolution", format!("{other:?} must be \"exact\" or \"trotter\""))),
    };
    let strategies = spec
        .strategy
        .iter()
        .map(|s| s.parse::<ShiftStrategy>().map_err(|e| bad("strategy", e.to_string())))
        .collect::<CliResult<Vec<_>>>()?;
    if spec.iterations == 0 {
        return Err(bad("iterations", "must be at least 1".into()));
    }
    if spec.slices == 0 {
        return Err(bad("slices", "must be at least 1".into()));
    }
    if let Some(s) = &spec.pre_shift {
        if s.len() != 4 {
            return Err(bad("pre_shift", format!("needs 4 entries, got {}", s.len())));
        }
    }
    let seeds: Vec<u64> = match (&spec.seeds, spec.repeats) {
        (Some(list), _) => list.clone(),
        (None, Some(0)) => return Err(bad("repeats", "must be at least 1".into())),
        (None, Some(n)) => (0..n as u64).map(|i| spec.seed + i).collect(),
        (None, None) => vec![spec.seed],
    };

    let mut runs = Vec::new();
    for &kappa in &spec.kappa {
        for &solution in &spec.solution {
            for &p in &spec.p {
                for &shots in &spec.shots {
                    for &strategy in &strategies {
                        for &seed in &seeds {
                            let run = RunSpec {
                                seed,
                                iterations: spec.iterations,
                                readout,
                                evolution,
                                slices: spec.slices,
                                pre_shift: spec.pre_shift.clone(),
                                ..RunSpec::new(kappa, solution, p, shots, strategy)
                            };
                            runs.push((strategy.to_string(), run));
                        }
                    }
                }
            }
        }
    }
    Ok(Sweep { name: spec.name, runs })
}

#[derive(Debug)]
pub struct SweepReport {
    pub runs: usize,
    pub rows: usize,
    pub files: Vec<PathBuf>,
}

pub fn sweep(args: &SweepArgs) -> CliResult<SweepReport> {
    let text = fs::read_to_string(&args.spec).map_err(|e| CliError::io(&args.spec, e))?;
    let sweep = parse_spec(&args.spec, &text)?;
    let traces = sweep
        .runs
        .par_iter()
        .map(|(_, run)| run.run())
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for ((label, run), trace) in sweep.runs.iter().zip(&traces) {
        for r in &trace.records {
            rows.push(SweepRow {
                name: sweep.name.clone(),
                kappa: run.kappa,
                solution: run.solution,
                p: run.p,
                shots: run.shots,
                strategy: label.clone(),
                seed: run.seed,
                iteration: r.iteration,
                rel_error: r.rel_error.unwrap_or(f64::NAN),
                residual_norm: r.residual_norm,
                cumulative_measurements: r.cumulative_measurements,
            });
        }
    }
    let mut out = OutputSet::new();
    out.write(&args.out, &csv_bytes(&HEADER, &rows)?)?;
    Ok(SweepReport {
        runs: sweep.runs.len(),
        rows: rows.len(),
        files: out.commit(),
    })
}
