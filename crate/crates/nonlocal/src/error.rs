use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^dag| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("matrix does not have unit trace: |Tr - 1| = {deviation:.3e}")]
    NotUnitTrace { deviation: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPSD { min_eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid dimension {dim}: expected a power of two >= 2")]
    InvalidDimension { dim: usize },
    #[error("bad party index {party} for {n_parties} parties")]
    BadPartyIndex { party: usize, n_parties: usize },
    #[error("wrong party count: expected {expected}, got {got}")]
    WrongPartyCount { expected: usize, got: usize },
    #[error("bad party count {n}: {reason}")]
    BadPartyCount { n: usize, reason: String },
    #[error("bad spectrum: {reason}")]
    BadSpectrum { reason: String },
    #[error("{what} = {value} out of range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("coefficients not normalized: |sum of squares - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },
    #[error("states {i} and {j} not orthogonal: |<i|j>| = {overlap:.3e}")]
    NotOrthogonal { i: usize, j: usize, overlap: f64 },
    #[error("state is not Bell-diagonal: off-diagonal norm {norm:.3e} in the Bell basis")]
    NotBellDiagonal { norm: f64 },
    #[error("correlator tensor does not describe a physical state: {source}")]
    NotAState { source: Box<Error> },
    #[error("correlator file schema mismatch: {details}")]
    SchemaMismatch { details: String },
    #[error("optimization did not converge: {what}")]
    NoConvergence { what: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
