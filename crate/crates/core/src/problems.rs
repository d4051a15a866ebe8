//! Benchmark linear systems and the Hermitian embedding.
//!
//! The conditioned test matrices are `Uᵀ diag(1, 0.5, 0.1, 1/κ) U` with `U` a
//! seeded Haar-random real orthogonal matrix. The two reference solutions
//! differ only in the sign of their first entry, which is what separates
//! same-sign from mixed-sign behaviour in the refinement experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix, ComplexVector};
use crate::random::{derive_seed, random_orthogonal};

/// Diagonal of the benchmark spectrum, before the `1/κ` entry.
pub const BASE_SPECTRUM: [f64; 3] = [1.0, 0.5, 0.1];

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: ComplexMatrix,
    pub b: ComplexVector,
    pub x_true: Option<ComplexVector>,
    pub kappa: Option<f64>,
    pub seed: Option<u64>,
    pub label: String,
}

impl ProblemInstance {
    pub fn new(a: ComplexMatrix, b: ComplexVector, label: impl Into<String>) -> Result<Self> {
        let n = a.require_square()?;
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n}x{n} matrix with length-{} right-hand side",
                b.len()
            )));
        }
        Ok(Self {
            a,
            b,
            x_true: None,
            kappa: None,
            seed: None,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// `|A x_true - b| / |b|`, if a reference solution is attached.
    pub fn reference_residual(&self) -> Option<f64> {
        let x = self.x_true.as_ref()?;
        let r = crate::numerics::residual(&self.a, x, &self.b).ok()?;
        Some(r.norm2() / self.b.norm2())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ProblemDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProblemDocument = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// On-disk form: complex numbers as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub b: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_true: Option<Vec<[f64; 2]>>,
}

fn pairs(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(p: &[[f64; 2]]) -> ComplexVector {
    ComplexVector::new(p.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
}

impl From<&ProblemInstance> for ProblemDocument {
    fn from(p: &ProblemInstance) -> Self {
        Self {
            label: p.label.clone(),
            kappa: p.kappa,
            seed: p.seed,
            matrix: p
                .a
                .to_rows()
                .iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            b: pairs(&p.b),
            x_true: p.x_true.as_ref().map(pairs),
        }
    }
}

impl TryFrom<ProblemDocument> for ProblemInstance {
    type Error = Error;

    fn try_from(doc: ProblemDocument) -> Result<Self> {
        let rows = doc
            .matrix
            .iter()
            .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        let mut inst = ProblemInstance::new(ComplexMatrix::from_rows(rows)?, from_pairs(&doc.b), doc.label)?;
        inst.kappa = doc.kappa;
        inst.seed = doc.seed;
        if let Some(x) = doc.x_true {
            let x = from_pairs(&x);
            if x.len() != inst.dim() {
                return Err(Error::DimensionMismatch("x_true length".into()));
            }
            inst.x_true = Some(x);
        }
        Ok(inst)
    }
}

/// `Uᵀ diag(spectrum) U` for a seeded Haar-random real orthogonal `U`.
pub fn build_from_spectrum(spectrum: &[f64], seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let u = random_orthogonal(spectrum.len(), seed);
    let d = ComplexMatrix::diagonal_real(spectrum);
    let a = u
        .transpose()
        .matmul(&d)
        .and_then(|m| m.matmul(&u))
        .expect("square factors");
    (symmetrize(a), u)
}

/// 4x4 Hermitian matrix with spectrum `{1, 0.5, 0.1, 1/κ}`; returns `(A, U)`.
pub fn build_conditioned_matrix(kappa: f64, seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    assert!(kappa >= 1.0, "kappa must be at least 1");
    let spectrum = [BASE_SPECTRUM[0], BASE_SPECTRUM[1], BASE_SPECTRUM[2], 1.0 / kappa];
    build_from_spectrum(&spectrum, seed)
}

// removes the last-ulp asymmetry left by the triple product
fn symmetrize(mut a: ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    a
}

/// `x₁ = [1, 0.1, 0.01, 10]`, `x₂ = [-1, 0.1, 0.01, 10]`.
pub fn benchmark_solutions() -> (ComplexVector, ComplexVector) {
    (
        ComplexVector::from_real(&[1.0, 0.1, 0.01, 10.0]),
        ComplexVector::from_real(&[-1.0, 0.1, 0.01, 10.0]),
    )
}

pub fn reference_solution(k: usize) -> Result<ComplexVector> {
    let (x1, x2) = benchmark_solutions();
    match k {
        1 => Ok(x1),
        2 => Ok(x2),
        _ => Err(Error::InvalidConfig(format!("solution index must be 1 or 2, got {k}"))),
    }
}

/// Seed of the orthogonal factor used for solution `k`. It does not depend on
/// `kappa`, so the κ=10 and κ=100 matrices for one `k` share `U`.
pub fn orthogonal_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, k as u64)
}

/// Benchmark system `A_{κ,k} x = b_{κ,k}` with `b = A x_k`.
pub fn make_instance(kappa: f64, k: usize, seed: u64) -> ProblemInstance {
    try_make_instance(kappa, k, seed).expect("k must be 1 or 2")
}

pub fn try_make_instance(kappa: f64, k: usize, seed: u64) -> Result<ProblemInstance> {
    if !(kappa >= 1.0) {
        return Err(Error::InvalidConfig(format!("kappa must be >= 1, got {kappa}")));
    }
    let x = reference_solution(k)?;
    let (a, _) = build_conditioned_matrix(kappa, orthogonal_seed(seed, k));
    let b = a.matvec(&x)?;
    Ok(ProblemInstance {
        a,
        b,
        x_true: Some(x),
        kappa: Some(kappa),
        seed: Some(seed),
        label: format!("kappa{kappa}_x{k}_seed{seed}"),
    })
}

/// 4x4 identity system with `b = [1, 2, 3, 4]`.
pub fn identity_instance() -> ProblemInstance {
    let b = ComplexVector::from_real(&[1.0, 2.0, 3.0, 4.0]);
    ProblemInstance {
        a: ComplexMatrix::identity(4),
        b: b.clone(),
        x_true: Some(b),
        kappa: Some(1.0),
        seed: None,
        label: "identity".into(),
    }
}

/// `Ã = [[0, A], [A^H, 0]]`, `b̃ = [b; 0]`. The solution of the embedded
/// system is `[0; x]` with `A x = b`.
pub fn hermitian_embed(a: &ComplexMatrix, b: &ComplexVector) -> Result<ProblemInstance> {
    let n = a.require_square()?;
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n}x{n} matrix with length-{} right-hand side",
            b.len()
        )));
    }
    let ah = a.adjoint();
    let mut big = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            big[(i, n + j)] = a[(i, j)];
            big[(n + i, j)] = ah[(i, j)];
        }
    }
    let mut rhs = b.entries().to_vec();
    rhs.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), n));
    ProblemInstance::new(big, ComplexVector::new(rhs), "hermitian-embedding")
}

/// Lower block `x` of an embedded solution `[0; x]`.
pub fn unembed_solution(x_embedded: &ComplexVector) -> ComplexVector {
    let n = x_embedded.len() / 2;
    ComplexVector::new(x_embedded.entries()[n..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{condition_number, jacobi_eigh, solve_exact};
    use crate::random::{random_hermitian, random_real_vector, random_unitary};

    #[test]
    fn unit_spectrum_is_identity_for_any_rotation() {
        for seed in 0..5 {
            let (a, _) = build_from_spectrum(&[1.0; 4], seed);
            assert!(a.max_abs_diff(&ComplexMatrix::identity(4)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn kappa_ten_spectrum() {
        let (a, u) = build_conditioned_matrix(10.0, 42);
        assert!(u.is_unitary(1e-13));
        assert!(a.is_hermitian(1e-12));
        let eig = jacobi_eigh(&a).unwrap();
        for (got, want) in eig.eigenvalues.iter().zip([0.1, 0.1, 0.5, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((condition_number(&a).unwrap() / 10.0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn seeds_change_matrix_not_spectrum() {
        let (a, _) = build_conditioned_matrix(100.0, 1);
        let (b, _) = build_conditioned_matrix(100.0, 2);
        assert!(a.max_abs_diff(&b).unwrap() > 1e-3);
        let ea = jacobi_eigh(&a).unwrap().eigenvalues;
        let eb = jacobi_eigh(&b).unwrap().eigenvalues;
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn reference_solutions() {
        let (x1, x2) = benchmark_solutions();
        assert_eq!(x1[3].re, 10.0);
        assert_eq!(x2[0].re, -1.0);
        let diff = x1.sub(&x2).unwrap();
        assert_eq!(diff, ComplexVector::from_real(&[2.0, 0.0, 0.0, 0.0]));
        assert_eq!(x1[0], -x2[0]);
    }

    #[test]
    fn kappa_pair_shares_rotation() {
        let seed = 5;
        let (_, u10) = build_conditioned_matrix(10.0, orthogonal_seed(seed, 1));
        let (_, u100) = build_conditioned_matrix(100.0, orthogonal_seed(seed, 1));
        assert!(u10.max_abs_diff(&u100).unwrap() <= 1e-15);
        let (_, u2) = build_conditioned_matrix(10.0, orthogonal_seed(seed, 2));
        assert!(u10.max_abs_diff(&u2).unwrap() > 1e-3);
    }

    #[test]
    fn instances_satisfy_residual_invariant() {
        for seed in 0..10 {
            for kappa in [10.0, 100.0] {
                for k in [1, 2] {
                    let inst = make_instance(kappa, k, seed);
                    assert!(inst.a.is_hermitian(1e-12));
                    assert!(inst.reference_residual().unwrap() <= 1e-10);
                    let eig = jacobi_eigh(&inst.a).unwrap();
                    assert!(eig.eigenvalues.iter().all(|&l| l > 0.0 && l <= 1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn b_is_independent_matvec() {
        let inst = make_instance(10.0, 2, 3);
        let x = [-1.0, 0.1, 0.01, 10.0];
        for i in 0..4 {
            let row: Complex64 = (0..4).map(|j| inst.a[(i, j)] * x[j]).sum();
            assert!((row - inst.b[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn bad_solution_index() {
        assert!(try_make_instance(10.0, 3, 0).is_err());
        assert!(try_make_instance(0.5, 1, 0).is_err());
    }

    #[test]
    fn scalar_embedding() {
        let a = ComplexMatrix::from_real(1, 1, &[2.0]).unwrap();
        let b = ComplexVector::from_real(&[4.0]);
        let e = hermitian_embed(&a, &b).unwrap();
        assert_eq!(e.a, ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 2.0, 0.0]).unwrap());
        assert_eq!(e.b, ComplexVector::from_real(&[4.0, 0.0]));
        let x = solve_exact(&e.a, &e.b).unwrap();
        assert_eq!(x, ComplexVector::from_real(&[0.0, 2.0]));
    }

    #[test]
    fn non_hermitian_embedding_by_hand() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let b = ComplexVector::from_real(&[2.0, 1.0]);
        let e = hermitian_embed(&a, &b).unwrap();
        assert!(e.a.is_hermitian(0.0));
        let x = solve_exact(&e.a, &e.b).unwrap();
        let lower = unembed_solution(&x);
        assert!(lower.max_abs_diff(&ComplexVector::from_real(&[1.0, 1.0])).unwrap() < 1e-12);
        let upper = ComplexVector::new(x.entries()[..2].to_vec());
        assert!(upper.norm2() < 1e-12);
    }

    #[test]
    fn embedding_preserves_solutions() {
        for seed in 0..100 {
            let a = random_hermitian(4, seed);
            let b = random_real_vector(4, seed + 7);
            let direct = solve_exact(&a, &b).unwrap();
            let e = hermitian_embed(&a, &b).unwrap();
            let lower = unembed_solution(&solve_exact(&e.a, &e.b).unwrap());
            assert!(lower.sub(&direct).unwrap().norm2() <= 1e-10 * direct.norm2());
        }
    }

    #[test]
    fn embedded_spectrum_is_plus_minus_singular_values() {
        for seed in 0..20 {
            // general complex matrix: unitary times positive diagonal times unitary
            let s = [0.3 + seed as f64 * 0.01, 0.7, 1.1, 2.0];
            let u = random_unitary(4, seed);
            let w = random_unitary(4, seed + 500);
            let a = u.matmul(&ComplexMatrix::diagonal_real(&s)).unwrap().matmul(&w).unwrap();
            let e = hermitian_embed(&a, &ComplexVector::zeros(4)).unwrap();
            let eig = jacobi_eigh(&e.a).unwrap().eigenvalues;
            let mut want: Vec<f64> = s.iter().flat_map(|&x| [x, -x]).collect();
            want.sort_by(f64::total_cmp);
            for (got, want) in eig.iter().zip(&want) {
                assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let inst = make_instance(100.0, 2, 9);
        let text = inst.to_json().unwrap();
        let back = ProblemInstance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["matrix"][0][0].as_array().unwrap().len(), 2);
        assert_eq!(doc["kappa"], 100.0);
    }
}
