//! Time evolution `e^{iAt}`, exact or by first-order Trotter splitting over
//! the Pauli decomposition of `A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{matrix_exp_hermitian, Complex64, ComplexMatrix};

const DROP_TOL: f64 = 1e-14;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    /// Leftmost character acts on the most significant qubit.
    pub label: String,
    pub coefficient: f64,
}

impl PauliTerm {
    pub fn matrix(&self) -> ComplexMatrix {
        pauli_string_matrix(&self.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMode {
    #[default]
    Exact,
    Trotter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec {
    pub t: f64,
    pub slices: usize,
    pub mode: EvolutionMode,
}

impl EvolutionSpec {
    pub fn exact(t: f64) -> Self {
        Self {
            t,
            slices: 1,
            mode: EvolutionMode::Exact,
        }
    }

    pub fn trotter(t: f64, slices: usize) -> Self {
        Self {
            t,
            slices,
            mode: EvolutionMode::Trotter,
        }
    }

    /// `2π(1 - 2^-p)`, which puts eigenvalue 1 on the top clock grid point.
    pub fn default_time(p: usize) -> f64 {
        std::f64::consts::TAU * (1.0 - 0.5f64.powi(p as i32))
    }

    fn validate(&self) -> Result<()> {
        if self.slices == 0 {
            return Err(Error::InvalidConfig("slices must be at least 1".into()));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidConfig(format!("evolution time {} is not finite", self.t)));
        }
        Ok(())
    }
}

fn pauli_single(ch: char) -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let entries = match ch {
        'I' => vec![one, z, z, one],
        'X' => vec![z, one, one, z],
        'Y' => vec![z, -i, i, z],
        'Z' => vec![one, z, z, -one],
        other => panic!("not a Pauli label: {other}"),
    };
    ComplexMatrix::new(2, 2, entries).expect("2x2")
}

fn pauli_string_matrix(label: &str) -> ComplexMatrix {
    label
        .chars()
        .fold(ComplexMatrix::identity(1), |acc, ch| acc.kron(&pauli_single(ch)))
}

/// All `4^n` labels of length `n`, lexicographic in `I < X < Y < Z`.
fn labels(n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| "IXYZ".chars().map(move |ch| format!("{s}{ch}")))
            .collect();
    }
    out
}

/// `A = Σ a_P P` with `a_P = tr(P A) / 2^n`, terms with `|a_P| ≤ 1e-14` dropped.
pub fn pauli_decompose(a: &ComplexMatrix) -> Result<Vec<PauliTerm>> {
    let dim = a.require_square()?;
    if !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let deviation = a.hermitian_deviation();
    if deviation > HERMITIAN_TOL * a.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let n = dim.trailing_zeros() as usize;
    let mut terms = Vec::new();
    for label in labels(n) {
        let p = pauli_string_matrix(&label);
        // tr(P A) without forming the product
        let tr: Complex64 = (0..dim)
            .flat_map(|i| (0..dim).map(move |k| (i, k)))
            .map(|(i, k)| p[(i, k)] * a[(k, i)])
            .sum();
        let coefficient = tr.re / dim as f64;
        if coefficient.abs() > DROP_TOL {
            terms.push(PauliTerm { label, coefficient });
        }
    }
    Ok(terms)
}

/// `e^{iAt}` per `spec`.
pub fn evolution_unitary(a: &ComplexMatrix, spec: &EvolutionSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    match spec.mode {
        EvolutionMode::Exact => matrix_exp_hermitian(a, spec.t),
        EvolutionMode::Trotter => {
            let n = a.require_square()?;
            let dt = spec.t / spec.slices as f64;
            let mut step = ComplexMatrix::identity(n);
            for term in pauli_decompose(a)? {
                let theta = term.coefficient * dt;
                // e^{iθP} = cos θ I + i sin θ P since P² = I
                let factor = ComplexMatrix::identity(n)
                    .scale_real(theta.cos())
                    .add(&term.matrix().scale(Complex64::new(0.0, theta.sin())))?;
                step = step.matmul(&factor)?;
            }
            repeat(&step, spec.slices)
        }
    }
}

/// The block QPE applies on clock qubit `j`: `e^{iAt·2^j}` in exact mode, or the
/// Trotter step for time `t` applied `2^j` times.
pub fn controlled_power_unitary(a: &ComplexMatrix, spec: &EvolutionSpec, j: u32) -> Result<ComplexMatrix> {
    match spec.mode {
        EvolutionMode::Exact => evolution_unitary(
            a,
            &EvolutionSpec {
                t: spec.t * 2f64.powi(j as i32),
                ..*spec
            },
        ),
        EvolutionMode::Trotter => evolution_unitary(a, spec)?.power_of_two(j),
    }
}

fn repeat(m: &ComplexMatrix, times: usize) -> Result<ComplexMatrix> {
    let mut result = ComplexMatrix::identity(m.rows());
    let mut base = m.clone();
    let mut k = times;
    while k > 0 {
        if k & 1 == 1 {
            result = result.matmul(&base)?;
        }
        k >>= 1;
        if k > 0 {
            base = base.matmul(&base)?;
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_instance;
    use crate::random::random_hermitian;

    fn x_plus_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]).unwrap()
    }

    fn rebuild(terms: &[PauliTerm], n: usize) -> ComplexMatrix {
        terms.iter().fold(ComplexMatrix::zeros(n, n), |acc, t| {
            acc.add(&t.matrix().scale_real(t.coefficient)).unwrap()
        })
    }

    #[test]
    fn decompose_pauli_x() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let terms = pauli_decompose(&x).unwrap();
        assert_eq!(terms, vec![PauliTerm { label: "X".into(), coefficient: 1.0 }]);
    }

    #[test]
    fn decompose_identity() {
        let terms = pauli_decompose(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(terms, vec![PauliTerm { label: "II".into(), coefficient: 1.0 }]);
    }

    #[test]
    fn label_order_is_lexicographic() {
        assert_eq!(labels(1), vec!["I", "X", "Y", "Z"]);
        assert_eq!(&labels(2)[..5], &["II", "IX", "IY", "IZ", "XI"]);
    }

    #[test]
    fn high_qubit_is_leftmost() {
        // Z on qubit 1 flips the sign of basis states 2 and 3
        let zi = pauli_string_matrix("ZI");
        let diag: Vec<f64> = (0..4).map(|i| zi[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn decompose_reconstructs_benchmark_matrix() {
        let a = make_instance(10.0, 1, 0).a;
        let terms = pauli_decompose(&a).unwrap();
        let back = rebuild(&terms, 4);
        assert!(back.max_abs_diff(&a).unwrap() <= 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn decompose_random_hermitian() {
        for seed in 0..10 {
            let a = random_hermitian(8, seed);
            let back = rebuild(&pauli_decompose(&a).unwrap(), 8);
            assert!(back.max_abs_diff(&a).unwrap() <= 1e-12 * a.frobenius_norm());
        }
    }

    #[test]
    fn decompose_rejects_bad_input() {
        assert!(matches!(
            pauli_decompose(&ComplexMatrix::identity(3)),
            Err(Error::NotPowerOfTwo(3))
        ));
        let not_h = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(pauli_decompose(&not_h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_time_is_identity() {
        let a = random_hermitian(4, 1);
        for spec in [EvolutionSpec::exact(0.0), EvolutionSpec::trotter(0.0, 3)] {
            let u = evolution_unitary(&a, &spec).unwrap();
            assert!(u.max_abs_diff(&ComplexMatrix::identity(4)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn commuting_terms_trotterise_exactly() {
        let a = ComplexMatrix::diagonal_real(&[0.3, -0.2, 0.9, 0.1]);
        let exact = evolution_unitary(&a, &EvolutionSpec::exact(1.7)).unwrap();
        for r in [1, 2, 5] {
            let trot = evolution_unitary(&a, &EvolutionSpec::trotter(1.7, r)).unwrap();
            assert!(trot.max_abs_diff(&exact).unwrap() < 1e-12);
        }
    }

    #[test]
    fn trotter_error_is_first_order() {
        let a = x_plus_z();
        let exact = evolution_unitary(&a, &EvolutionSpec::exact(1.0)).unwrap();
        let errs: Vec<f64> = [1, 2, 4, 8, 16, 32]
            .iter()
            .map(|&r| {
                let trot = evolution_unitary(&a, &EvolutionSpec::trotter(1.0, r)).unwrap();
                trot.sub(&exact).unwrap().operator_norm().unwrap()
            })
            .collect();
        for w in errs.windows(2).skip(1) {
            let ratio = w[0] / w[1];
            assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn produced_matrices_are_unitary() {
        let a = make_instance(100.0, 2, 3).a;
        let t = EvolutionSpec::default_time(4);
        for spec in [EvolutionSpec::exact(t), EvolutionSpec::trotter(t, 6)] {
            for j in 0..4 {
                assert!(controlled_power_unitary(&a, &spec, j).unwrap().is_unitary(1e-10));
            }
        }
    }

    #[test]
    fn power_zero_matches_single_step() {
        let a = random_hermitian(4, 9);
        for spec in [EvolutionSpec::exact(0.8), EvolutionSpec::trotter(0.8, 4)] {
            let u = evolution_unitary(&a, &spec).unwrap();
            let u0 = controlled_power_unitary(&a, &spec, 0).unwrap();
            assert!(u0.max_abs_diff(&u).unwrap() < 1e-14);
        }
    }

    #[test]
    fn exact_power_follows_exponent_law() {
        let a = random_hermitian(4, 4);
        let spec = EvolutionSpec::exact(0.6);
        let u = evolution_unitary(&a, &spec).unwrap();
        let u1 = controlled_power_unitary(&a, &spec, 1).unwrap();
        assert!(u1.max_abs_diff(&u.matmul(&u).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn trotter_power_repeats_the_step() {
        let a = x_plus_z();
        let spec = EvolutionSpec::trotter(1.0, 3);
        let u = evolution_unitary(&a, &spec).unwrap();
        let by_hand = u.matmul(&u).unwrap().matmul(&u).unwrap().matmul(&u).unwrap();
        let u2 = controlled_power_unitary(&a, &spec, 2).unwrap();
        assert!(u2.max_abs_diff(&by_hand).unwrap() < 1e-12);
    }

    #[test]
    fn zero_slices_rejected() {
        let err = evolution_unitary(&x_plus_z(), &EvolutionSpec::trotter(1.0, 0));
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }
}
