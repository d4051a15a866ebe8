//! Dense complex linear algebra for small systems.
//!
//! Everything here is sized for the handful of qubits the simulator uses:
//! matrices are row-major `Vec<Complex64>` and no routine tries to be clever
//! about cache behaviour.

mod eigen;
mod matrix;
mod solve;
mod vector;

pub use eigen::{condition_number, jacobi_eigh, matrix_exp_hermitian, EigenDecomposition};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use solve::solve_exact;
pub use vector::ComplexVector;

use crate::error::{Error, Result};

/// `b - A x`.
pub fn residual(a: &ComplexMatrix, x: &ComplexVector, b: &ComplexVector) -> Result<ComplexVector> {
    let ax = a.matvec(x)?;
    b.sub(&ax)
}

pub fn norm2(v: &ComplexVector) -> f64 {
    v.norm2()
}

/// `<u, v>`, conjugate-linear in `u`.
pub fn inner(u: &ComplexVector, v: &ComplexVector) -> Result<Complex64> {
    u.inner(v)
}

/// `|x - x_true| / |x_true|`.
pub fn relative_error(x: &ComplexVector, x_true: &ComplexVector) -> Result<f64> {
    let denom = x_true.norm2();
    if denom == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(x.sub(x_true)?.norm2() / denom)
}

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_of_exact_solution_is_zero() {
        let a = ComplexMatrix::identity(4);
        let b = ComplexVector::from_real(&[1.0, -2.0, 3.0, 0.5]);
        let r = residual(&a, &b, &b).unwrap();
        assert_eq!(r.norm2(), 0.0);
    }

    #[test]
    fn relative_error_of_self_is_zero() {
        let x = ComplexVector::from_real(&[1.0, 0.1, 0.01, 10.0]);
        assert_eq!(relative_error(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn inner_is_conjugate_linear_in_first_argument() {
        let u = ComplexVector::new(vec![c(0.0, 1.0), c(1.0, 0.0)]);
        let v = ComplexVector::new(vec![c(0.0, 1.0), c(2.0, 0.0)]);
        // conj(i)*i + 1*2 = 1 + 2
        let z = inner(&u, &v).unwrap();
        assert!((z - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = ComplexMatrix::identity(4);
        let x = ComplexVector::zeros(3);
        let b = ComplexVector::zeros(4);
        assert!(matches!(residual(&a, &x, &b), Err(Error::DimensionMismatch(_))));
        let ones = ComplexVector::from_real(&[1.0; 4]);
        assert!(matches!(relative_error(&x, &ones), Err(Error::DimensionMismatch(_))));
        assert!(matches!(inner(&x, &b), Err(Error::DimensionMismatch(_))));
    }
}
