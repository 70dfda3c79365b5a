use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    Dimension(String),
    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    Shape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("Fock index ({n_a}, {n_b}) outside truncation {dim_a}x{dim_b}")]
    IndexOutOfRange {
        n_a: usize,
        n_b: usize,
        dim_a: usize,
        dim_b: usize,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("trace drift {drift:.3e} exceeds tolerance {tol:.3e} at t = {t}")]
    TraceDrift { t: f64, drift: f64, tol: f64 },
    #[error("non-finite density-matrix entry at t = {t}")]
    NonFinite { t: f64 },
    #[error("projected two-qubit block is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPositive { min_eig: f64 },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error came from the time integration rather than from the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TraceDrift { .. } | Error::NonFinite { .. } | Error::NotPositive { .. }
        )
    }
}
