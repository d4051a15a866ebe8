//! Shared plumbing for turning flags and sweep entries into solver runs.

use std::fs;

use iimhhl::hamsim::EvolutionMode;
use iimhhl::hhl::{HHLConfig, ReadoutMode, ShotBudget};
use iimhhl::numerics::{solve_exact, ComplexVector};
use iimhhl::problems::{identity_instance, try_make_instance, ProblemInstance};
use iimhhl::random::derive_seed;
use iimhhl::refine::{iimhhl, IterationTrace, RefinementConfig, ShiftStrategy};
use iimhhl::statevector::PostSelection;

use crate::args::{ProblemArgs, SolverArgs};
use crate::error::{CliError, CliResult};

/// Stream label for sampling seeds, so the matrix basis and the shot noise of
/// one `--seed` are independent.
const SAMPLING_STREAM: u64 = 0x5A_4D_50;

pub fn sampling_seed(seed: u64) -> u64 {
    derive_seed(seed, SAMPLING_STREAM)
}

/// One benchmark refinement run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub kappa: f64,
    pub solution: usize,
    pub seed: u64,
    pub p: usize,
    pub shots: u64,
    pub strategy: ShiftStrategy,
    pub iterations: usize,
    pub readout: ReadoutMode,
    pub evolution: EvolutionMode,
    pub slices: usize,
    pub pre_shift: Option<Vec<f64>>,
}

impl RunSpec {
    pub fn new(kappa: f64, solution: usize, p: usize, shots: u64, strategy: ShiftStrategy) -> Self {
        Self {
            kappa,
            solution,
            seed: 0,
            p,
            shots,
            strategy,
            iterations: 20,
            readout: ReadoutMode::Sampled,
            evolution: EvolutionMode::Exact,
            slices: 6,
            pre_shift: None,
        }
    }

    pub fn hhl_config(&self) -> HHLConfig {
        HHLConfig {
            p: self.p,
            shots: self.shots,
            slices: self.slices,
            evolution_mode: self.evolution,
            readout_mode: self.readout,
            seed: sampling_seed(self.seed),
            ..HHLConfig::default()
        }
    }

    pub fn run(&self) -> iimhhl::Result<IterationTrace> {
        let inst = try_make_instance(self.kappa, self.solution, self.seed)?;
        let config = RefinementConfig {
            pre_shift: self.pre_shift.as_deref().map(ComplexVector::from_real),
            ..RefinementConfig::new(self.hhl_config(), self.strategy, self.iterations)
        };
        let (_, trace) = iimhhl(&inst.a, &inst.b, &config, inst.x_true.as_ref())?;
        Ok(trace)
    }
}

pub fn load_problem(args: &ProblemArgs) -> CliResult<ProblemInstance> {
    if args.identity {
        return Ok(identity_instance());
    }
    if let Some(path) = &args.problem {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return ProblemInstance::from_json(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())));
    }
    if !(args.kappa >= 1.0) || !args.kappa.is_finite() {
        return Err(CliError::Usage(format!("--kappa must be at least 1, got {}", args.kappa)));
    }
    Ok(try_make_instance(args.kappa, args.solution as usize, args.seed)?)
}

pub fn parse_vector(text: &str, flag: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{flag}: {part:?} is not a number")))
        })
        .collect()
}

pub fn hhl_config(args: &SolverArgs, seed: u64) -> HHLConfig {
    HHLConfig {
        p: args.p,
        t: args.t,
        c: args.c,
        slices: args.slices,
        evolution_mode: args.evolution.into(),
        readout_mode: args.readout(),
        shots: args.shots,
        shot_budget: ShotBudget::from(args.shot_budget),
        post_selection: PostSelection::from(args.postselect),
        min_clock_fraction: 0.0,
        seed: sampling_seed(seed),
    }
}

/// Refinement settings for `solve`; `--no-refine` is a single iteration.
pub fn refinement_config(args: &SolverArgs, seed: u64, dim: usize, no_refine: bool) -> CliResult<RefinementConfig> {
    if args.iters == 0 {
        return Err(CliError::Usage("--iters must be at least 1".into()));
    }
    if args.p == 0 {
        return Err(CliError::Usage("--p must be at least 1".into()));
    }
    if args.readout() == ReadoutMode::Sampled && args.shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    if args.slices == 0 {
        return Err(CliError::Usage("--slices must be at least 1".into()));
    }
    let pre_shift = match &args.pre_shift {
        Some(text) => {
            let v = parse_vector(text, "--pre-shift")?;
            if v.len() != dim {
                return Err(CliError::Usage(format!(
                    "--pre-shift has {} entries for a {dim}-dimensional system",
                    v.len()
                )));
            }
            Some(ComplexVector::from_real(&v))
        }
        None => None,
    };
    Ok(RefinementConfig {
        pre_shift,
        ..RefinementConfig::new(
            hhl_config(args, seed),
            args.shift,
            if no_refine { 1 } else { args.iters },
        )
    })
}

/// The known solution if the problem carries one, otherwise a direct solve.
pub fn reference_solution(inst: &ProblemInstance) -> CliResult<ComplexVector> {
    match &inst.x_true {
        Some(x) => Ok(x.clone()),
        None => Ok(solve_exact(&inst.a, &inst.b)?),
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
