//! Statevector simulation of the HHL linear-system algorithm and a shifted
//! iterative-refinement driver built on top of it.

pub mod error;
pub mod hamsim;
pub mod hhl;
pub mod numerics;
pub mod problems;
pub mod qpe;
pub mod random;
pub mod refine;
pub mod statevector;

pub use error::{Error, Result};
pub use numerics::{Complex64, ComplexMatrix, ComplexVector};
