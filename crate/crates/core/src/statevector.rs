//! Dense statevector over the `input ⊗ clock ⊗ ancilla` register.
//!
//! Qubit 0 is the least significant bit of the global basis index. The input
//! register occupies qubits `0..n_input`, the clock register the next `p`
//! qubits and the single ancilla the most significant qubit, so a basis index
//! decomposes as `input + (clock << n_input) + (ancilla << (n_input + p))`.

use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix, ComplexVector};
use crate::random::seeded_rng;

const NORM_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
/// `sample` refuses states whose post-selection probability is below this.
pub const MIN_ACCEPTANCE: f64 = 1e-9;
/// Clock-zero fraction required by [`StateVector::read_solution_amplitudes`].
pub const STRICT_CLOCK_FRACTION: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub n_input: usize,
    pub n_clock: usize,
}

impl RegisterLayout {
    pub const N_ANCILLA: usize = 1;

    pub fn new(n_input: usize, n_clock: usize) -> Self {
        Self { n_input, n_clock }
    }

    /// Layout whose input register holds a length-`dim` vector.
    pub fn for_dimension(dim: usize, n_clock: usize) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        Ok(Self::new(dim.trailing_zeros() as usize, n_clock))
    }

    pub fn total_qubits(&self) -> usize {
        self.n_input + self.n_clock + Self::N_ANCILLA
    }

    pub fn len(&self) -> usize {
        1 << self.total_qubits()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn input_dim(&self) -> usize {
        1 << self.n_input
    }

    pub fn clock_dim(&self) -> usize {
        1 << self.n_clock
    }

    pub fn input_qubits(&self) -> Vec<usize> {
        (0..self.n_input).collect()
    }

    pub fn clock_qubits(&self) -> Vec<usize> {
        (self.n_input..self.n_input + self.n_clock).collect()
    }

    pub fn ancilla_qubit(&self) -> usize {
        self.n_input + self.n_clock
    }

    pub fn index(&self, input: usize, clock: usize, ancilla: usize) -> usize {
        input | (clock << self.n_input) | (ancilla << self.ancilla_qubit())
    }

    /// `(input, clock, ancilla)` of a global basis index.
    pub fn split(&self, index: usize) -> (usize, usize, usize) {
        let input = index & (self.input_dim() - 1);
        let clock = (index >> self.n_input) & (self.clock_dim() - 1);
        let ancilla = index >> self.ancilla_qubit();
        (input, clock, ancilla)
    }
}

/// Which measurement outcomes count as accepted shots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostSelection {
    /// Ancilla reads 1; clock register is measured but ignored.
    Ancilla,
    /// Ancilla reads 1 and the uncomputed clock register reads 0.
    #[default]
    AncillaAndClockZero,
}

impl PostSelection {
    fn accepts(self, clock: usize, ancilla: usize) -> bool {
        ancilla == 1
            && match self {
                PostSelection::Ancilla => true,
                PostSelection::AncillaAndClockZero => clock == 0,
            }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementHistogram {
    /// Counts per input-register basis index among accepted shots.
    pub counts: Vec<u64>,
    pub accepted: u64,
    /// All shots drawn, including rejected ones.
    pub total_executions: u64,
}

impl MeasurementHistogram {
    pub fn acceptance_rate(&self) -> f64 {
        if self.total_executions == 0 {
            0.0
        } else {
            self.accepted as f64 / self.total_executions as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    layout: RegisterLayout,
}

impl StateVector {
    /// All registers in `|0⟩`.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.len()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { amplitudes, layout }
    }

    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a {}-qubit layout",
                amplitudes.len(),
                layout.total_qubits()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidConfig(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes, layout })
    }

    /// `|b⟩|0⟩_p|0⟩_a` with `|b⟩ = b / |b|`.
    pub fn prepare_b_state(b: &ComplexVector, layout: RegisterLayout) -> Result<Self> {
        if b.len() != layout.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "length-{} vector for a {}-qubit input register",
                b.len(),
                layout.n_input
            )));
        }
        let norm = b.norm2();
        if norm <= 1e-300 {
            return Err(Error::ZeroVector);
        }
        let mut state = Self::zero(layout);
        for (i, z) in b.iter().enumerate() {
            state.amplitudes[i] = z / norm;
        }
        Ok(state)
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability that the ancilla reads 1.
    pub fn ancilla_one_probability(&self) -> f64 {
        self.probability_where(|_, _, a| a == 1)
    }

    /// Probability that the clock register reads 0.
    pub fn clock_zero_probability(&self) -> f64 {
        self.probability_where(|_, c, _| c == 0)
    }

    pub fn probability_where(&self, pred: impl Fn(usize, usize, usize) -> bool) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let (inp, clk, anc) = self.layout.split(*i);
                pred(inp, clk, anc)
            })
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// Applies `u` to `targets`; `targets[k]` is bit `k` of `u`'s row index.
    pub fn apply_unitary(&mut self, u: &ComplexMatrix, targets: &[usize]) -> Result<()> {
        self.check_targets(u, targets, None)?;
        check_unitary(u)?;
        self.apply_unchecked(u, targets, None);
        Ok(())
    }

    /// Applies `u` to `targets` on the subspace where `control` is 1.
    pub fn apply_controlled_unitary(
        &mut self,
        u: &ComplexMatrix,
        control: usize,
        targets: &[usize],
    ) -> Result<()> {
        self.check_targets(u, targets, Some(control))?;
        check_unitary(u)?;
        self.apply_unchecked(u, targets, Some(control));
        Ok(())
    }

    /// Gate application for operators that are unitary by construction.
    pub(crate) fn apply_unchecked(&mut self, u: &ComplexMatrix, targets: &[usize], control: Option<usize>) {
        let k = targets.len();
        let dim = 1usize << k;
        let offsets: Vec<usize> = (0..dim)
            .map(|local| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| local >> bit & 1 == 1)
                    .map(|(_, &q)| 1usize << q)
                    .sum()
            })
            .collect();
        let target_mask: usize = targets.iter().map(|&q| 1usize << q).sum();
        let control_mask = control.map_or(0, |c| 1usize << c);

        let mut local = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..self.amplitudes.len() {
            if base & target_mask != 0 || base & control_mask != control_mask {
                continue;
            }
            for (slot, &off) in local.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base + off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                self.amplitudes[base + off] = u
                    .row(row)
                    .iter()
                    .zip(&local)
                    .map(|(a, b)| a * b)
                    .sum();
            }
        }
    }

    fn check_targets(&self, u: &ComplexMatrix, targets: &[usize], control: Option<usize>) -> Result<()> {
        let total = self.layout.total_qubits();
        for &q in targets.iter().chain(control.iter()) {
            if q >= total {
                return Err(Error::QubitIndexOutOfRange { qubit: q, total });
            }
        }
        for (i, &q) in targets.iter().enumerate() {
            if targets[..i].contains(&q) || control == Some(q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        let dim = 1usize << targets.len();
        if u.rows() != dim || u.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on {} qubits",
                u.rows(),
                u.cols(),
                targets.len()
            )));
        }
        Ok(())
    }

    /// Draws full-register measurements until `shots_accepted` of them pass
    /// `post`, and histograms the input register of the accepted draws.
    ///
    /// Accepted outcomes are drawn from the conditional distribution by
    /// sequential binomial splitting, and the number of rejected draws from
    /// the negative binomial law of a geometric retry loop (as a Gamma-Poisson
    /// mixture). Both are exact in distribution, and the cost does not depend
    /// on the acceptance probability.
    pub fn sample(&self, shots_accepted: u64, seed: u64, post: PostSelection) -> Result<MeasurementHistogram> {
        if shots_accepted == 0 {
            return Err(Error::InvalidConfig("at least one accepted shot is required".into()));
        }
        let accepted: Vec<(usize, f64)> = self
            .amplitudes
            .iter()
            .enumerate()
            .filter_map(|(i, z)| {
                let (_, clk, anc) = self.layout.split(i);
                post.accepts(clk, anc).then_some((i, z.norm_sqr()))
            })
            .filter(|&(_, p)| p > 0.0)
            .collect();
        let total_prob: f64 = self.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        let p_accept = accepted.iter().map(|&(_, p)| p).sum::<f64>() / total_prob;
        if !(p_accept >= MIN_ACCEPTANCE) {
            return Err(Error::AcceptanceTooLow { probability: p_accept });
        }

        let mut rng = seeded_rng(seed);
        let mut counts = vec![0u64; self.layout.input_dim()];
        let mut remaining = shots_accepted;
        let mut remaining_mass: f64 = accepted.iter().map(|&(_, p)| p).sum();
        for &(index, p) in &accepted {
            if remaining == 0 {
                break;
            }
            let frac = (p / remaining_mass).clamp(0.0, 1.0);
            let k = if frac >= 1.0 {
                remaining
            } else {
                Binomial::new(remaining, frac)
                    .expect("probability in [0, 1]")
                    .sample(&mut rng)
            };
            let (input, _, _) = self.layout.split(index);
            counts[input] += k;
            remaining -= k;
            remaining_mass -= p;
        }
        // roundoff in remaining_mass can leave a few shots unassigned
        if remaining > 0 {
            let (last, _) = accepted.last().expect("non-empty");
            counts[self.layout.split(*last).0] += remaining;
        }

        let rejected = sample_rejections(shots_accepted, p_accept, &mut rng);
        Ok(MeasurementHistogram {
            counts,
            accepted: shots_accepted,
            total_executions: shots_accepted + rejected,
        })
    }

    /// Input-register amplitudes on the `clock = 0, ancilla = 1` branch,
    /// renormalised. Relative phases are kept as they are.
    ///
    /// Fails with `ClockNotUncomputed` when that branch carries less than
    /// `min_clock_fraction` of the ancilla-1 probability.
    pub fn read_solution_amplitudes(&self, min_clock_fraction: f64) -> Result<ComplexVector> {
        let anc = self.ancilla_one_probability();
        let branch: Vec<Complex64> = (0..self.layout.input_dim())
            .map(|i| self.amplitudes[self.layout.index(i, 0, 1)])
            .collect();
        let mass: f64 = branch.iter().map(|z| z.norm_sqr()).sum();
        let fraction = if anc > 0.0 { mass / anc } else { 0.0 };
        if mass <= 0.0 || fraction < min_clock_fraction {
            return Err(Error::ClockNotUncomputed { fraction });
        }
        let norm = mass.sqrt();
        Ok(ComplexVector::new(branch.into_iter().map(|z| z / norm).collect()))
    }
}

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    let deviation = u.unitary_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Failures before the `shots`-th success of a Bernoulli(`p`) sequence.
fn sample_rejections(shots: u64, p: f64, rng: &mut crate::random::Rng) -> u64 {
    if p >= 1.0 {
        return 0;
    }
    let scale = (1.0 - p) / p;
    let rate = Gamma::new(shots as f64, scale)
        .expect("positive shape and scale")
        .sample(rng);
    if !(rate > 0.0) {
        return 0;
    }
    Poisson::new(rate).expect("positive rate").sample(rng) as u64
}
