//! Iterative improvement around an approximate inner solver, and the shifted
//! variant that keeps the HHL inner solves on all-positive right answers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hhl::{HHLConfig, HHLSolution, HhlCircuit};
use crate::numerics::{relative_error, Complex64, ComplexMatrix, ComplexVector};
use crate::random::derive_seed;

/// Residual growth over its running minimum that counts as divergence.
pub const DIVERGENCE_GROWTH: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftStrategy {
    #[default]
    None,
    UniformRatio,
    AbsTenth,
    AbsRatio,
    AbsSqrtRatio,
}

impl ShiftStrategy {
    pub const ALL: [ShiftStrategy; 5] = [
        ShiftStrategy::None,
        ShiftStrategy::UniformRatio,
        ShiftStrategy::AbsTenth,
        ShiftStrategy::AbsRatio,
        ShiftStrategy::AbsSqrtRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShiftStrategy::None => "none",
            ShiftStrategy::UniformRatio => "uniform-ratio",
            ShiftStrategy::AbsTenth => "abs-tenth",
            ShiftStrategy::AbsRatio => "abs-ratio",
            ShiftStrategy::AbsSqrtRatio => "abs-sqrt-ratio",
        }
    }

    fn needs_previous(self) -> bool {
        matches!(
            self,
            ShiftStrategy::UniformRatio | ShiftStrategy::AbsRatio | ShiftStrategy::AbsSqrtRatio
        )
    }
}

impl fmt::Display for ShiftStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShiftStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        match key.as_str() {
            "none" | "1" => Ok(ShiftStrategy::None),
            "uniform-ratio" | "2" => Ok(ShiftStrategy::UniformRatio),
            "abs-tenth" | "3" => Ok(ShiftStrategy::AbsTenth),
            "abs-ratio" | "4" => Ok(ShiftStrategy::AbsRatio),
            "abs-sqrt-ratio" | "5" => Ok(ShiftStrategy::AbsSqrtRatio),
            _ => Err(Error::InvalidConfig(format!(
                "unknown shift strategy {s:?} (expected none, uniform-ratio, abs-tenth, abs-ratio or abs-sqrt-ratio)"
            ))),
        }
    }
}

/// Shift vector for the next inner solve. `x_m` is the latest correction and
/// `x_prev` the one before it.
pub fn compute_shift(
    strategy: ShiftStrategy,
    x_m: &ComplexVector,
    x_prev: Option<&ComplexVector>,
) -> Result<ComplexVector> {
    let ratio = || -> Result<f64> {
        match x_prev {
            Some(prev) if prev.norm2() > 0.0 => Ok(x_m.norm2() / prev.norm2()),
            _ => Err(Error::MissingPrevious(strategy.name())),
        }
    };
    if strategy.needs_previous() {
        if let Some(prev) = x_prev {
            if prev.len() != x_m.len() {
                return Err(Error::DimensionMismatch(format!(
                    "corrections of length {} and {}",
                    x_m.len(),
                    prev.len()
                )));
            }
        }
    }
    Ok(match strategy {
        ShiftStrategy::None => ComplexVector::zeros(x_m.len()),
        ShiftStrategy::UniformRatio => ComplexVector::new(vec![Complex64::new(ratio()?, 0.0); x_m.len()]),
        ShiftStrategy::AbsTenth => x_m.abs().scale_real(0.1),
        ShiftStrategy::AbsRatio => x_m.abs().scale_real(ratio()?),
        ShiftStrategy::AbsSqrtRatio => x_m.abs().scale_real(ratio()?.sqrt()),
    })
}

/// `b + A s`; the solution of the shifted system is `x + s`.
pub fn apply_pre_shift(b: &ComplexVector, a: &ComplexMatrix, s: &ComplexVector) -> Result<ComplexVector> {
    b.add(&a.matvec(s)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementConfig {
    pub max_iterations: usize,
    pub hhl: HHLConfig,
    pub shift: ShiftStrategy,
    /// Stop once the residual norm is at or below this.
    pub stop_residual: Option<f64>,
    pub pre_shift: Option<ComplexVector>,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20,
            hhl: HHLConfig::default(),
            shift: ShiftStrategy::None,
            stop_residual: None,
            pre_shift: None,
        }
    }
}

impl RefinementConfig {
    pub fn new(hhl: HHLConfig, shift: ShiftStrategy, max_iterations: usize) -> Self {
        Self {
            max_iterations,
            hhl,
            shift,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if let Some(tol) = self.stop_residual {
            if !(tol >= 0.0) {
                return Err(Error::InvalidConfig(format!("stop_residual {tol} must be non-negative")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Inner solution `y_m`.
    pub y: ComplexVector,
    /// Shift `x̃_m` the inner solve was aimed at.
    pub shift: ComplexVector,
    /// Correction `x_m = y_m - x̃_m`.
    pub correction: ComplexVector,
    /// Current estimate of the solution of the original system.
    pub x: ComplexVector,
    pub residual_norm: f64,
    pub rel_error: Option<f64>,
    pub accepted_shots: u64,
    pub total_executions: u64,
    pub cumulative_measurements: u64,
    pub f1: f64,
    pub f2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.last().and_then(|r| r.rel_error)
    }

    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.rel_error).collect()
    }
}

struct Guard {
    floor: f64,
    best: f64,
}

impl Guard {
    fn new(initial: f64) -> Self {
        Self {
            floor: f64::EPSILON * initial,
            best: initial,
        }
    }

    fn check(&mut self, iteration: usize, residual: f64) -> Result<()> {
        if !residual.is_finite() {
            return Err(Error::Diverged {
                iteration,
                growth: f64::INFINITY,
            });
        }
        let reference = self.best.max(self.floor);
        if reference > 0.0 && residual > DIVERGENCE_GROWTH * reference {
            return Err(Error::Diverged {
                iteration,
                growth: residual / reference,
            });
        }
        self.best = self.best.min(residual);
        Ok(())
    }
}

fn error_against(x: &ComplexVector, x_true: Option<&ComplexVector>) -> Result<Option<f64>> {
    x_true.map(|t| relative_error(x, t)).transpose()
}

/// Plain iterative improvement: solve `A y = r`, `x += y`, `r = b - A x`.
/// `inner` receives the matrix, the residual and the iteration index.
pub fn classical_iterative_improvement<F>(
    a: &ComplexMatrix,
    b: &ComplexVector,
    mut inner: F,
    max_iterations: usize,
    x_true: Option<&ComplexVector>,
) -> Result<(ComplexVector, IterationTrace)>
where
    F: FnMut(&ComplexMatrix, &ComplexVector, usize) -> Result<ComplexVector>,
{
    if max_iterations == 0 {
        return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
    }
    let n = a.require_square()?;
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("{n}x{n} system with length-{} rhs", b.len())));
    }
    let mut x = ComplexVector::zeros(n);
    let mut r = b.clone();
    let mut guard = Guard::new(b.norm2());
    let mut trace = IterationTrace::default();
    for m in 0..max_iterations {
        let y = inner(a, &r, m)?;
        x = x.add(&y)?;
        r = b.sub(&a.matvec(&x)?)?;
        let residual_norm = r.norm2();
        trace.records.push(IterationRecord {
            iteration: m,
            shift: ComplexVector::zeros(n),
            correction: y.clone(),
            y,
            x: x.clone(),
            residual_norm,
            rel_error: error_against(&x, x_true)?,
            accepted_shots: 0,
            total_executions: 0,
            cumulative_measurements: 0,
            f1: 1.0,
            f2: 0.0,
        });
        guard.check(m, residual_norm)?;
    }
    Ok((x, trace))
}

/// Shifted iterative improvement with an HHL inner solver. Iteration `m`
/// samples with seed `derive_seed(config.hhl.seed, m)`.
pub fn iimhhl(
    a: &ComplexMatrix,
    b: &ComplexVector,
    config: &RefinementConfig,
    x_true: Option<&ComplexVector>,
) -> Result<(ComplexVector, IterationTrace)> {
    config.validate()?;
    let circuit = HhlCircuit::new(a, &config.hhl)?;
    let base_seed = config.hhl.seed;
    iimhhl_with_solver(a, b, config, x_true, |r, m| {
        circuit.solve_seeded(r, derive_seed(base_seed, m as u64))
    })
}

/// [`iimhhl`] with the inner HHL solve replaced by `solver(r, m)`.
pub fn iimhhl_with_solver<F>(
    a: &ComplexMatrix,
    b: &ComplexVector,
    config: &RefinementConfig,
    x_true: Option<&ComplexVector>,
    mut solver: F,
) -> Result<(ComplexVector, IterationTrace)>
where
    F: FnMut(&ComplexVector, usize) -> Result<HHLSolution>,
{
    config.validate()?;
    let n = a.require_square()?;
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("{n}x{n} system with length-{} rhs", b.len())));
    }
    let s = match &config.pre_shift {
        Some(s) => s.clone(),
        None => ComplexVector::zeros(n),
    };
    let rhs = apply_pre_shift(b, a, &s)?;

    let mut x = ComplexVector::zeros(n);
    let mut shift = ComplexVector::zeros(n);
    let mut r = rhs.clone();
    let mut prev: Option<ComplexVector> = None;
    let mut guard = Guard::new(rhs.norm2());
    let mut cumulative = 0u64;
    let mut trace = IterationTrace::default();

    for m in 0..config.max_iterations {
        let (y, accepted, total, f1, f2) = if r.norm2() == 0.0 {
            (ComplexVector::zeros(n), 0, 0, 0.0, 0.0)
        } else {
            let sol = solver(&r, m)?;
            let (acc, tot) = (sol.accepted_shots(), sol.total_executions());
            (sol.x, acc, tot, sol.f1, sol.f2)
        };
        let correction = y.sub(&shift)?;
        x = x.add(&correction)?;

        let next_shift = match &prev {
            Some(p) if m > 0 && p.norm2() > 0.0 && correction.norm2() > 0.0 => {
                compute_shift(config.shift, &correction, Some(p))?
            }
            _ => ComplexVector::zeros(n),
        };
        r = rhs.sub(&a.matvec(&x.sub(&next_shift)?)?)?;
        let residual_norm = rhs.sub(&a.matvec(&x)?)?.norm2();
        let estimate = x.sub(&s)?;
        cumulative += accepted;

        trace.records.push(IterationRecord {
            iteration: m,
            y,
            shift: std::mem::replace(&mut shift, next_shift),
            correction: correction.clone(),
            x: estimate.clone(),
            residual_norm,
            rel_error: error_against(&estimate, x_true)?,
            accepted_shots: accepted,
            total_executions: total,
            cumulative_measurements: cumulative,
            f1,
            f2,
        });
        prev = Some(correction);

        guard.check(m, residual_norm)?;
        if config.stop_residual.is_some_and(|tol| residual_norm <= tol) {
            break;
        }
    }
    Ok((x.sub(&s)?, trace))
}
