use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.entries[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.entries.iter()
    }

    pub fn norm2(&self) -> f64 {
        // scaled accumulation keeps 1e-300-sized vectors from underflowing to zero
        let scale = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        let sum: f64 = self.entries.iter().map(|z| (z / scale).norm_sqr()).sum();
        scale * sum.sqrt()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_len(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.entries.iter().map(|z| z * factor).collect())
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self::new(self.entries.iter().map(|z| z * factor).collect())
    }

    /// Entrywise modulus as a real-valued complex vector.
    pub fn abs(&self) -> Self {
        Self::new(
            self.entries
                .iter()
                .map(|z| Complex64::new(z.norm(), 0.0))
                .collect(),
        )
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm2();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale_real(1.0 / n))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_len(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(entries: Vec<Complex64>) -> Self {
        Self::new(entries)
    }
}
