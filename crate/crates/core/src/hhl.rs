//! One HHL solve: phase estimation, eigenvalue-conditioned ancilla rotation,
//! uncompute, readout, and rescaling by `f1 e^{i f2}`.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamsim::{EvolutionMode, EvolutionSpec};
use crate::numerics::{jacobi_eigh, Complex64, ComplexMatrix, ComplexVector};
use crate::qpe::{grid_value, PhaseEstimation};
use crate::random::{derive_seed, seeded_rng};
use crate::statevector::{MeasurementHistogram, PostSelection, RegisterLayout, StateVector};

const DEGENERATE_SCALE: f64 = 1e-300;
const POPULATED: f64 = 1e-30;
const OVERFLOW_SLACK: f64 = 1e-12;
const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutMode {
    Statevector,
    #[default]
    Sampled,
}

/// What the `shots` field counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShotBudget {
    /// Shots that pass post-selection; the device retries until this many.
    #[default]
    Accepted,
    /// Raw executions, accepted or not.
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HHLConfig {
    /// Clock qubits.
    pub p: usize,
    /// Evolution time; `None` means `2π(1 - 2^-p)`.
    pub t: Option<f64>,
    /// Rotation constant; `None` means the smallest nonzero grid value.
    pub c: Option<f64>,
    pub slices: usize,
    pub evolution_mode: EvolutionMode,
    pub readout_mode: ReadoutMode,
    pub shots: u64,
    pub shot_budget: ShotBudget,
    pub post_selection: PostSelection,
    /// Statevector readout fails if the clock-zero share of the ancilla-1
    /// branch is below this.
    pub min_clock_fraction: f64,
    pub seed: u64,
}

impl Default for HHLConfig {
    fn default() -> Self {
        Self {
            p: 4,
            t: None,
            c: None,
            slices: 6,
            evolution_mode: EvolutionMode::Exact,
            readout_mode: ReadoutMode::Sampled,
            shots: 1000,
            shot_budget: ShotBudget::Accepted,
            post_selection: PostSelection::AncillaAndClockZero,
            min_clock_fraction: 0.0,
            seed: 0,
        }
    }
}

impl HHLConfig {
    pub fn statevector(p: usize) -> Self {
        Self {
            p,
            readout_mode: ReadoutMode::Statevector,
            ..Self::default()
        }
    }

    pub fn sampled(p: usize, shots: u64, seed: u64) -> Self {
        Self {
            p,
            shots,
            seed,
            ..Self::default()
        }
    }

    pub fn time(&self) -> f64 {
        self.t.unwrap_or_else(|| EvolutionSpec::default_time(self.p))
    }

    pub fn rotation_constant(&self) -> f64 {
        self.c.unwrap_or_else(|| grid_value(1, self.p, self.time()))
    }

    pub fn evolution_spec(&self) -> EvolutionSpec {
        EvolutionSpec {
            t: self.time(),
            slices: self.slices,
            mode: self.evolution_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.p == 0 {
            return bad("p must be at least 1".into());
        }
        let t = self.time();
        if !(t.is_finite() && t > 0.0) {
            return bad(format!("evolution time {t} must be positive and finite"));
        }
        let c = self.rotation_constant();
        if !(c.is_finite() && c > 0.0) {
            return bad(format!("rotation constant {c} must be positive and finite"));
        }
        if self.slices == 0 {
            return bad("slices must be at least 1".into());
        }
        if self.readout_mode == ReadoutMode::Sampled && self.shots == 0 {
            return bad("sampled readout needs at least one shot".into());
        }
        if !(0.0..=1.0).contains(&self.min_clock_fraction) {
            return bad(format!("min_clock_fraction {} outside [0, 1]", self.min_clock_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HHLSolution {
    pub x: ComplexVector,
    pub x_sta: ComplexVector,
    pub f1: f64,
    pub f2: f64,
    pub acceptance_rate: f64,
    pub histogram: Option<MeasurementHistogram>,
}

impl HHLSolution {
    pub fn accepted_shots(&self) -> u64 {
        self.histogram.as_ref().map_or(0, |h| h.accepted)
    }

    pub fn total_executions(&self) -> u64 {
        self.histogram.as_ref().map_or(0, |h| h.total_executions)
    }
}

/// Ancilla rotation `|0⟩ → √(1 - (C/λ̃)²)|0⟩ + (C/λ̃)|1⟩` on every nonzero clock
/// value; clock value 0 is left alone.
pub fn apply_controlled_rotation(state: &mut StateVector, config: &HHLConfig) -> Result<()> {
    let layout = state.layout();
    let t = config.time();
    let c = config.rotation_constant();
    let ratios: Vec<f64> = (0..layout.clock_dim())
        .map(|k| if k == 0 { 0.0 } else { c / grid_value(k, layout.n_clock, t) })
        .collect();

    for (k, &ratio) in ratios.iter().enumerate().skip(1) {
        if ratio > 1.0 + OVERFLOW_SLACK {
            let populated = (0..layout.input_dim())
                .flat_map(|i| [layout.index(i, k, 0), layout.index(i, k, 1)])
                .any(|idx| state.amplitudes()[idx].norm_sqr() > POPULATED);
            if populated {
                return Err(Error::RotationOverflow { ratio, index: k });
            }
        }
    }

    let amps = state.amplitudes_mut();
    for (k, &ratio) in ratios.iter().enumerate().skip(1) {
        let s = ratio.min(1.0);
        let co = (1.0 - s * s).max(0.0).sqrt();
        for i in 0..layout.input_dim() {
            let i0 = layout.index(i, k, 0);
            let i1 = layout.index(i, k, 1);
            let (a0, a1) = (amps[i0], amps[i1]);
            amps[i0] = a0 * co - a1 * s;
            amps[i1] = a0 * s + a1 * co;
        }
    }
    Ok(())
}

/// `x_sta[i] = √(counts[i] / accepted)`.
pub fn estimate_from_histogram(h: &MeasurementHistogram) -> Result<ComplexVector> {
    if h.accepted == 0 {
        return Err(Error::EmptyHistogram);
    }
    let n = h.accepted as f64;
    Ok(ComplexVector::new(
        h.counts
            .iter()
            .map(|&k| Complex64::new((k as f64 / n).sqrt(), 0.0))
            .collect(),
    ))
}

/// `f1 = |b| / |A x_sta|`, `f2 = arg⟨A x_sta, b⟩`, `x = f1 e^{i f2} x_sta`.
///
/// The angle takes `A x_sta` as the conjugated argument; that is the phase
/// which rotates `A x_sta` onto `b`.
pub fn postprocess(x_sta: &ComplexVector, a: &ComplexMatrix, b: &ComplexVector) -> Result<(f64, f64, ComplexVector)> {
    let ax = a.matvec(x_sta)?;
    let ax_norm = ax.norm2();
    if ax_norm <= DEGENERATE_SCALE {
        return Err(Error::DegenerateScale(ax_norm));
    }
    let f1 = b.norm2() / ax_norm;
    let f2 = ax.inner(b)?.arg();
    let x = x_sta.scale(Complex64::from_polar(f1, f2));
    Ok((f1, f2, x))
}

/// Rotates `v` so its largest-magnitude entry is real and positive.
fn canonical_phase(v: &ComplexVector) -> ComplexVector {
    let mut best = Complex64::new(0.0, 0.0);
    for z in v.iter() {
        if z.norm() > best.norm() {
            best = *z;
        }
    }
    if best.norm() == 0.0 {
        return v.clone();
    }
    v.scale(best.conj() / best.norm())
}

/// A prepared HHL circuit for one matrix and configuration. Building it does
/// the eigen-decompositions once so repeated solves only run the circuit.
#[derive(Debug, Clone)]
pub struct HhlCircuit {
    a: ComplexMatrix,
    config: HHLConfig,
    layout: RegisterLayout,
    qpe: PhaseEstimation,
}

impl HhlCircuit {
    pub fn new(a: &ComplexMatrix, config: &HHLConfig) -> Result<Self> {
        config.validate()?;
        let n = a.require_square()?;
        let layout = RegisterLayout::for_dimension(n, config.p)?;
        if layout.total_qubits() > MAX_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "{} qubits exceeds the simulator limit of {MAX_QUBITS}",
                layout.total_qubits()
            )));
        }
        let t = config.time();
        let eig = jacobi_eigh(a)?;
        for &lambda in &eig.eigenvalues {
            let phase = lambda * t;
            if !(phase > 0.0 && phase < std::f64::consts::TAU) {
                return Err(Error::SpectrumOutOfRange { eigenvalue: lambda, phase });
            }
        }
        let qpe = PhaseEstimation::new(a, &config.evolution_spec(), config.p)?;
        Ok(Self {
            a: a.clone(),
            config: config.clone(),
            layout,
            qpe,
        })
    }

    pub fn config(&self) -> &HHLConfig {
        &self.config
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.a
    }

    /// State after uncompute, just before measurement.
    pub fn final_state(&self, b: &ComplexVector) -> Result<StateVector> {
        let mut state = StateVector::prepare_b_state(b, self.layout)?;
        self.qpe.forward(&mut state)?;
        apply_controlled_rotation(&mut state, &self.config)?;
        self.qpe.inverse(&mut state)?;
        Ok(state)
    }

    /// Solves `A x = b` with the configured seed.
    pub fn solve(&self, b: &ComplexVector) -> Result<HHLSolution> {
        self.solve_seeded(b, self.config.seed)
    }

    pub fn solve_seeded(&self, b: &ComplexVector, seed: u64) -> Result<HHLSolution> {
        let state = self.final_state(b)?;
        let post = self.config.post_selection;
        let accept_prob = state.probability_where(|_, clk, anc| {
            anc == 1 && (post == PostSelection::Ancilla || clk == 0)
        });

        let (x_sta, acceptance_rate, histogram) = match self.config.readout_mode {
            ReadoutMode::Statevector => {
                let amps = state.read_solution_amplitudes(self.config.min_clock_fraction)?;
                (canonical_phase(&amps), accept_prob, None)
            }
            ReadoutMode::Sampled => {
                let hist = self.measure(&state, seed)?;
                let x_sta = estimate_from_histogram(&hist)?;
                (x_sta, hist.acceptance_rate(), Some(hist))
            }
        };
        let (f1, f2, x) = postprocess(&x_sta, &self.a, b)?;
        Ok(HHLSolution {
            x,
            x_sta,
            f1,
            f2,
            acceptance_rate,
            histogram,
        })
    }

    fn measure(&self, state: &StateVector, seed: u64) -> Result<MeasurementHistogram> {
        let post = self.config.post_selection;
        match self.config.shot_budget {
            ShotBudget::Accepted => state.sample(self.config.shots, seed, post),
            ShotBudget::Total => {
                let p = state.probability_where(|_, clk, anc| {
                    anc == 1 && (post == PostSelection::Ancilla || clk == 0)
                });
                let mut rng = seeded_rng(derive_seed(seed, 0));
                let accepted = Binomial::new(self.config.shots, p.clamp(0.0, 1.0))
                    .map_err(|e| Error::InvalidConfig(e.to_string()))?
                    .sample(&mut rng);
                if accepted == 0 {
                    return Err(Error::EmptyHistogram);
                }
                let mut hist = state.sample(accepted, seed, post)?;
                hist.total_executions = self.config.shots;
                Ok(hist)
            }
        }
    }
}

/// Runs the full pipeline once.
pub fn run_hhl(a: &ComplexMatrix, b: &ComplexVector, config: &HHLConfig) -> Result<HHLSolution> {
    HhlCircuit::new(a, config)?.solve(b)
}
