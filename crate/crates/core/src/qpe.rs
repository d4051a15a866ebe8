//! Phase estimation on the clock register.
//!
//! Clock qubit `j` controls `U^{2^j}`; the clock integer is read with qubit
//! `p - 1` as the most significant bit, with no bit reversal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamsim::{controlled_power_unitary, EvolutionSpec};
use crate::numerics::{Complex64, ComplexMatrix};
use crate::statevector::StateVector;

const CLOCK_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockReading {
    pub p: usize,
    pub index: usize,
    pub lambda_tilde: f64,
}

impl ClockReading {
    pub fn new(p: usize, index: usize, t: f64) -> Self {
        Self {
            p,
            index,
            lambda_tilde: grid_value(index, p, t),
        }
    }
}

/// `(2π/t) · index / 2^p`.
pub fn grid_value(index: usize, p: usize, t: f64) -> f64 {
    std::f64::consts::TAU / t * index as f64 / (1usize << p) as f64
}

/// Dense `2^p x 2^p` matrix with entries `e^{∓2πi jk/2^p} / √2^p`.
fn fourier_matrix(p: usize, sign: f64) -> ComplexMatrix {
    let n = 1usize << p;
    let norm = 1.0 / (n as f64).sqrt();
    let mut m = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let angle = sign * std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64;
            m[(j, k)] = Complex64::from_polar(norm, angle);
        }
    }
    m
}

pub fn qft_matrix(p: usize) -> ComplexMatrix {
    fourier_matrix(p, 1.0)
}

pub fn inverse_qft_matrix(p: usize) -> ComplexMatrix {
    fourier_matrix(p, -1.0)
}

pub fn inverse_qft(state: &mut StateVector) {
    let layout = state.layout();
    state.apply_unchecked(&inverse_qft_matrix(layout.n_clock), &layout.clock_qubits(), None);
}

pub fn qft(state: &mut StateVector) {
    let layout = state.layout();
    state.apply_unchecked(&qft_matrix(layout.n_clock), &layout.clock_qubits(), None);
}

fn hadamard_all(state: &mut StateVector) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let gate = ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).expect("2x2");
    for q in state.layout().clock_qubits() {
        state.apply_unchecked(&gate, &[q], None);
    }
}

/// Controlled-power blocks and Fourier matrices for one `(A, spec, p)`,
/// built once and reused across runs.
#[derive(Debug, Clone)]
pub struct PhaseEstimation {
    dim: usize,
    blocks: Vec<ComplexMatrix>,
    blocks_adjoint: Vec<ComplexMatrix>,
    qft: ComplexMatrix,
    inverse_qft: ComplexMatrix,
}

impl PhaseEstimation {
    pub fn new(a: &ComplexMatrix, spec: &EvolutionSpec, p: usize) -> Result<Self> {
        let dim = a.require_square()?;
        let blocks = (0..p as u32)
            .map(|j| controlled_power_unitary(a, spec, j))
            .collect::<Result<Vec<_>>>()?;
        let blocks_adjoint = blocks.iter().map(ComplexMatrix::adjoint).collect();
        Ok(Self {
            dim,
            blocks,
            blocks_adjoint,
            qft: qft_matrix(p),
            inverse_qft: inverse_qft_matrix(p),
        })
    }

    fn check_layout(&self, state: &StateVector) -> Result<()> {
        let layout = state.layout();
        check_size(self.dim, layout.input_dim())?;
        if layout.n_clock != self.blocks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} clock qubits for a {}-bit phase estimation",
                layout.n_clock,
                self.blocks.len()
            )));
        }
        Ok(())
    }

    /// Hadamards on the clock, controlled powers of `e^{iAt}`, inverse QFT.
    pub fn forward(&self, state: &mut StateVector) -> Result<()> {
        self.check_layout(state)?;
        let leak = 1.0 - state.clock_zero_probability() / state.norm().powi(2);
        if leak > CLOCK_ZERO_TOL {
            return Err(Error::ClockNotZero { leak });
        }
        let layout = state.layout();
        let inputs = layout.input_qubits();
        hadamard_all(state);
        for (j, u) in self.blocks.iter().enumerate() {
            state.apply_unchecked(u, &inputs, Some(layout.n_input + j));
        }
        state.apply_unchecked(&self.inverse_qft, &layout.clock_qubits(), None);
        Ok(())
    }

    /// Adjoint of [`PhaseEstimation::forward`]: QFT, inverse controlled powers
    /// in reverse order, Hadamards.
    pub fn inverse(&self, state: &mut StateVector) -> Result<()> {
        self.check_layout(state)?;
        let layout = state.layout();
        let inputs = layout.input_qubits();
        state.apply_unchecked(&self.qft, &layout.clock_qubits(), None);
        for (j, u) in self.blocks_adjoint.iter().enumerate().rev() {
            state.apply_unchecked(u, &inputs, Some(layout.n_input + j));
        }
        hadamard_all(state);
        Ok(())
    }
}

pub fn apply_qpe(state: &mut StateVector, a: &ComplexMatrix, spec: &EvolutionSpec) -> Result<()> {
    PhaseEstimation::new(a, spec, state.layout().n_clock)?.forward(state)
}

pub fn apply_inverse_qpe(state: &mut StateVector, a: &ComplexMatrix, spec: &EvolutionSpec) -> Result<()> {
    PhaseEstimation::new(a, spec, state.layout().n_clock)?.inverse(state)
}

fn check_size(n: usize, dim: usize) -> Result<()> {
    if n != dim {
        return Err(Error::DimensionMismatch(format!(
            "{n}x{n} matrix for a {dim}-dimensional input register"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, ComplexVector};
    use crate::random::random_vector;
    use crate::statevector::RegisterLayout;
    use std::f64::consts::{PI, TAU};

    fn clock_distribution(state: &StateVector) -> Vec<f64> {
        let l = state.layout();
        let mut out = vec![0.0; l.clock_dim()];
        for (i, z) in state.amplitudes().iter().enumerate() {
            out[l.split(i).1] += z.norm_sqr();
        }
        out
    }

    fn eigenstate_run(phase: f64, p: usize) -> Vec<f64> {
        // 1x1-like system padded to one input qubit: A = diag(λ, 0), input |0>
        let t = 1.0;
        let a = ComplexMatrix::diagonal_real(&[phase * TAU / t, 0.0]);
        let l = RegisterLayout::new(1, p);
        let mut s = StateVector::prepare_b_state(&ComplexVector::from_real(&[1.0, 0.0]), l).unwrap();
        apply_qpe(&mut s, &a, &EvolutionSpec::exact(t)).unwrap();
        clock_distribution(&s)
    }

    #[test]
    fn one_qubit_inverse_qft_is_hadamard() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap();
        assert!(inverse_qft_matrix(1).max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn inverse_qft_maps_uniform_to_zero() {
        let l = RegisterLayout::new(0, 3);
        let mut amps = vec![c(0.0, 0.0); l.len()];
        for k in 0..8 {
            amps[l.index(0, k, 0)] = c(1.0 / 8f64.sqrt(), 0.0);
        }
        let mut s = StateVector::from_amplitudes(l, amps).unwrap();
        inverse_qft(&mut s);
        assert!((s.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inverse_qft_picks_out_frequency_five() {
        let l = RegisterLayout::new(0, 3);
        let mut amps = vec![c(0.0, 0.0); l.len()];
        for k in 0..8 {
            amps[l.index(0, k, 0)] = Complex64::from_polar(1.0 / 8f64.sqrt(), TAU * (k * 5) as f64 / 8.0);
        }
        let mut s = StateVector::from_amplitudes(l, amps).unwrap();
        inverse_qft(&mut s);
        assert!((s.amplitudes()[l.index(0, 5, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qft_matrices_are_unitary_and_inverse() {
        for p in 1..=9 {
            let f = qft_matrix(p);
            let g = inverse_qft_matrix(p);
            let prod = f.matmul(&g).unwrap();
            assert!(prod.max_abs_diff(&ComplexMatrix::identity(1 << p)).unwrap() < 1e-12, "p={p}");
            assert!(g.max_abs_diff(&f.adjoint()).unwrap() < 1e-15);
        }
    }

    #[test]
    fn zero_matrix_leaves_clock_empty() {
        let l = RegisterLayout::new(2, 3);
        let b = random_vector(4, 1);
        let mut s = StateVector::prepare_b_state(&b, l).unwrap();
        let a = ComplexMatrix::zeros(4, 4);
        let spec = EvolutionSpec::exact(1.0);
        apply_qpe(&mut s, &a, &spec).unwrap();
        assert!((s.clock_zero_probability() - 1.0).abs() < 1e-12);
        apply_inverse_qpe(&mut s, &a, &spec).unwrap();
        assert!((s.clock_zero_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_phase_quarter() {
        let dist = eigenstate_run(0.25, 2);
        assert!((dist[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn every_grid_phase_is_exact() {
        let p = 4;
        for k in 0..16 {
            let dist = eigenstate_run(k as f64 / 16.0, p);
            assert!(dist[k] >= 1.0 - 1e-9, "k={k}: {}", dist[k]);
        }
    }

    /// Closed-form QPE outcome probability for phase φ at clock index k.
    fn qpe_kernel(phi: f64, k: usize, p: usize) -> f64 {
        let n = (1usize << p) as f64;
        let delta = phi - k as f64 / n;
        let num = (PI * n * delta).sin();
        let den = (PI * delta).sin();
        if den.abs() < 1e-15 {
            1.0
        } else {
            (num / den).powi(2) / (n * n)
        }
    }

    #[test]
    fn off_grid_third_matches_kernel() {
        let dist = eigenstate_run(1.0 / 3.0, 3);
        assert!(dist[3] >= 4.0 / (PI * PI) - 1e-6);
        for (k, &pk) in dist.iter().enumerate() {
            assert!((pk - qpe_kernel(1.0 / 3.0, k, 3)).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn two_nearest_indices_hold_eight_over_pi_squared() {
        let p = 4;
        for i in 0..40 {
            let phi = 0.013 + i as f64 * 0.0243;
            let dist = eigenstate_run(phi, p);
            let lo = (phi * 16.0).floor() as usize % 16;
            let hi = (lo + 1) % 16;
            assert!(dist[lo] + dist[hi] >= 8.0 / (PI * PI), "phi={phi}");
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let a = crate::problems::make_instance(10.0, 1, 2).a;
        let l = RegisterLayout::new(2, 4);
        let t = EvolutionSpec::default_time(4);
        for spec in [EvolutionSpec::exact(t), EvolutionSpec::trotter(t, 6)] {
            for seed in 0..5 {
                let b = random_vector(4, seed);
                let s0 = StateVector::prepare_b_state(&b, l).unwrap();
                let mut s = s0.clone();
                apply_qpe(&mut s, &a, &spec).unwrap();
                apply_inverse_qpe(&mut s, &a, &spec).unwrap();
                let diff = s
                    .amplitudes()
                    .iter()
                    .zip(s0.amplitudes())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-12, "diff {diff}");
            }
        }
    }

    #[test]
    fn populated_clock_is_rejected() {
        let l = RegisterLayout::new(1, 2);
        let mut amps = vec![c(0.0, 0.0); l.len()];
        amps[l.index(0, 1, 0)] = c(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(l, amps).unwrap();
        let a = ComplexMatrix::identity(2);
        assert!(matches!(
            apply_qpe(&mut s, &a, &EvolutionSpec::exact(1.0)),
            Err(Error::ClockNotZero { .. })
        ));
    }

    #[test]
    fn clock_reading_grid() {
        let r = ClockReading::new(3, 5, 2.0);
        assert!((r.lambda_tilde * 2.0 / TAU - 5.0 / 8.0).abs() < 1e-15);
    }
}
