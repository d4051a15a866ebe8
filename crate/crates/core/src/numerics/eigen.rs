use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector for `eigenvalues[j]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> ComplexVector {
        self.eigenvectors.column(j)
    }

    /// `V f(Λ) V^H`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let weights: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n).map(|k| v[(i, k)] * weights[k] * v[(j, k)].conj()).sum();
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| Complex64::new(l, 0.0))
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the real Jacobi rotation that annihilates it. Sweeps
/// continue until the off-diagonal Frobenius norm is below `1e-14 |A|_F`.
/// Eigenvectors of clustered eigenvalues are re-orthonormalised afterwards.
pub fn jacobi_eigh(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = a.require_square()?;
    let scale = a.frobenius_norm();
    let deviation = a.hermitian_deviation();
    if deviation > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }

    // symmetrise so roundoff in the input does not bias the diagonal
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);

    let threshold = OFF_DIAGONAL_TOL * scale;
    let mut converged = scale == 0.0 || n < 2;
    let mut off = off_diagonal_norm(&m);
    for _ in 0..MAX_SWEEPS {
        if converged || off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&m);
    }
    if !converged && off > threshold {
        return Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            off_norm: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    reorthonormalize_clusters(&eigenvalues, &mut vectors, scale);

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += m[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let phase = apq / g;

    let theta = 0.5 * (aqq - app) / g;
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let cos = 1.0 / (t * t + 1.0).sqrt();
    let sin = t * cos;

    // G = diag(1, conj(phase)) * [[c, s], [-s, c]] restricted to (p, q)
    let g_pp = Complex64::new(cos, 0.0);
    let g_pq = Complex64::new(sin, 0.0);
    let g_qp = -phase.conj() * sin;
    let g_qq = phase.conj() * cos;

    let n = m.rows();
    // M <- M G
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * g_pp + mkq * g_qp;
        m[(k, q)] = mkp * g_pq + mkq * g_qq;
    }
    // M <- G^H M
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
        m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
    // V <- V G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Modified Gram-Schmidt within each run of (nearly) equal eigenvalues.
fn reorthonormalize_clusters(eigenvalues: &[f64], vectors: &mut ComplexMatrix, scale: f64) {
    let n = eigenvalues.len();
    let cluster_tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] <= cluster_tol {
            end += 1;
        }
        for j in start..end {
            for k in start..j {
                let proj: Complex64 = (0..n).map(|i| vectors[(i, k)].conj() * vectors[(i, j)]).sum();
                for i in 0..n {
                    let vik = vectors[(i, k)];
                    vectors[(i, j)] -= proj * vik;
                }
            }
            let norm = (0..n).map(|i| vectors[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..n {
                vectors[(i, j)] /= norm;
            }
        }
        start = end;
    }
}

/// `|λ_max| / |λ_min|` over the eigenvalue moduli.
pub fn condition_number(a: &ComplexMatrix) -> Result<f64> {
    let eig = jacobi_eigh(a)?;
    let moduli = eig.eigenvalues.iter().map(|l| l.abs());
    let max = moduli.clone().fold(0.0, f64::max);
    let min = moduli.fold(f64::INFINITY, f64::min);
    if max == 0.0 || min <= 1e-14 * max {
        return Err(Error::Singular(format!(
            "smallest eigenvalue modulus {min:.3e} vs largest {max:.3e}"
        )));
    }
    Ok(max / min)
}

/// `e^{iAt}` for Hermitian `A`, through its eigendecomposition.
pub fn matrix_exp_hermitian(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = jacobi_eigh(a)?;
    Ok(eig.map_spectrum(|l| Complex64::from_polar(1.0, l * t)))
}
