use std::path::PathBuf;

use iimhhl::numerics::ComplexVector;
use iimhhl::refine::{iimhhl, RefinementConfig};
use serde::Serialize;

use crate::args::SolveArgs;
use crate::error::CliResult;
use crate::output::{trace_csv, OutputSet};
use crate::runs::{load_problem, reference_solution, refinement_config};

#[derive(Debug, Serialize)]
struct SolutionDocument<'a> {
    label: &'a str,
    x: Vec<[f64; 2]>,
    x_reference: Vec<[f64; 2]>,
    rel_error: f64,
    residual_norm: f64,
    iterations: usize,
    measurements: u64,
    config: &'a RefinementConfig,
}

fn pairs(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug)]
pub struct SolveReport {
    pub rel_error: f64,
    pub iterations: usize,
    pub files: Vec<PathBuf>,
}

pub fn solve(args: &SolveArgs) -> CliResult<SolveReport> {
    let inst = load_problem(&args.problem)?;
    let x_ref = reference_solution(&inst)?;
    let config = refinement_config(&args.solver, args.problem.seed, inst.dim(), args.no_refine)?;
    let (x, trace) = iimhhl(&inst.a, &inst.b, &config, Some(&x_ref))?;
    let last = trace.last().expect("at least one iteration");
    let rel_error = last.rel_error.unwrap_or(f64::NAN);

    let doc = SolutionDocument {
        label: &inst.label,
        x: pairs(&x),
        x_reference: pairs(&x_ref),
        rel_error,
        residual_norm: last.residual_norm,
        iterations: trace.len(),
        measurements: last.cumulative_measurements,
        config: &config,
    };
    let json = serde_json::to_vec_pretty(&doc).expect("plain data serialises");

    let mut out = OutputSet::new();
    out.write(&args.out.join("trace.csv"), &trace_csv(&trace)?)?;
    out.write(&args.out.join("solution.json"), &json)?;
    Ok(SolveReport {
        rel_error,
        iterations: trace.len(),
        files: out.commit(),
    })
}
