use super::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-14;

/// Gaussian elimination with partial pivoting.
pub fn solve_exact(a: &ComplexMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    let n = a.require_square()?;
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n}x{n} system with length-{} right-hand side",
            b.len()
        )));
    }
    let floor = PIVOT_TOL * a.frobenius_norm();
    let mut m = a.to_rows();
    let mut rhs: Vec<_> = b.entries().to_vec();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .expect("non-empty range");
        let pivot = m[pivot_row][col];
        if pivot.norm() <= floor {
            return Err(Error::Singular(format!(
                "pivot {:.3e} in column {col}",
                pivot.norm()
            )));
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);

        for row in (col + 1)..n {
            let factor = m[row][col] / m[col][col];
            if factor.norm() == 0.0 {
                continue;
            }
            let (upper, lower) = m.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= factor * src;
            }
            let r = rhs[col];
            rhs[row] -= factor * r;
        }
    }

    let mut x = rhs;
    for row in (0..n).rev() {
        let tail: num_complex::Complex64 = ((row + 1)..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (x[row] - tail) / m[row][row];
    }
    Ok(ComplexVector::new(x))
}
