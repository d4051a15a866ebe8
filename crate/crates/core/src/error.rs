use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is singular to working precision ({0})")]
    Singular(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("entry count {found} does not match {rows}x{cols}")]
    BadShape {
        rows: usize,
        cols: usize,
        found: usize,
    },

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("operator is not unitary (max |U^H U - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("qubit index {qubit} out of range for a {total}-qubit register")]
    QubitIndexOutOfRange { qubit: usize, total: usize },

    #[error("duplicate target qubit {0}")]
    DuplicateQubit(usize),

    #[error("post-selection probability {probability:.3e} is below the sampling floor")]
    AcceptanceTooLow { probability: f64 },

    #[error("clock register not uncomputed (clock=0 fraction of ancilla-1 mass = {fraction:.6})")]
    ClockNotUncomputed { fraction: f64 },

    #[error("clock register is not in |0> (mass outside clock=0 is {leak:.3e})")]
    ClockNotZero { leak: f64 },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("rotation amplitude C/lambda = {ratio:.6} exceeds 1 at clock index {index}")]
    RotationOverflow { ratio: f64, index: usize },

    #[error("eigenvalue {eigenvalue:.6e} gives lambda*t = {phase:.6} outside (0, 2*pi)")]
    SpectrumOutOfRange { eigenvalue: f64, phase: f64 },

    #[error("histogram has no accepted shots")]
    EmptyHistogram,

    #[error("|A x_sta| = {0:.3e} is too small to rescale")]
    DegenerateScale(f64),

    #[error("shift strategy {0} needs the previous correction")]
    MissingPrevious(&'static str),

    #[error("refinement diverged at iteration {iteration}: residual grew {growth:.3e}x over its minimum")]
    Diverged { iteration: usize, growth: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("problem document: {0}")]
    Json(#[from] serde_json::Error),
}
