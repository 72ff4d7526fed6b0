use thiserror::Error;

/// Every failure mode reported by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid angular momentum 2j = {0}")]
    InvalidJ(i64),
    #[error("rotation axis is not a unit vector (|n| = {0})")]
    NonUnitAxis(f64),
    #[error("matrix is not in SU(2)")]
    NotSU2,
    #[error("triangle rule violated for ({0}, {1}, {2})")]
    TriangleViolation(f64, f64, f64),
    #[error("integration window too small: {0}")]
    WindowTooSmall(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("negative input: {0}")]
    NegativeInput(String),
    #[error("spectrum is degenerate (gap {0:.3e})")]
    DegenerateSpectrum(f64),
    #[error("transmission must lie in (0, 1], got {0}")]
    InvalidG(f64),
    #[error("transfer-matrix block is singular")]
    SingularBlock,
    #[error("no open channel at E = {0}")]
    NoOpenChannel(f64),
    #[error("energy sits exactly on a channel threshold ({0})")]
    AtThreshold(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("integral diverged: {0}")]
    IntegralDiverged(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("tensor symmetry violated: {0}")]
    SymmetryViolation(String),
    #[error("projectors are not orthogonal and complete (deviation {0:.3e})")]
    IncompleteProjectors(f64),
    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("duplicate qubit index {0}")]
    DuplicateIndex(usize),
    #[error("{m} and {n} are not coprime")]
    NotCoprime { m: u64, n: u64 },
    #[error("period extraction failed after {0} attempts")]
    ExtractionFailed(usize),
    #[error("factoring retries exhausted after {0} attempts")]
    RetriesExhausted(usize),
    #[error("{a} has no inverse modulo {modulus}")]
    NoInverse { a: u64, modulus: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, QmError>;
