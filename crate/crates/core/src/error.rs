use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("{what} is not Hermitian (residual {residual:.3e} > tolerance {tolerance:.3e})")]
    NotHermitian {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("{what} contains a non-finite entry")]
    NonFinite { what: &'static str },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("Sylvester operator is singular (eigenvalue sum {gap:.3e} below resolution)")]
    Resonant { gap: f64 },

    #[error("pure state parameter has |Omega| = {norm} >= 1; state is not normalizable")]
    NotNormalizable { norm: f64 },

    #[error("negative mean occupation {0}")]
    NegativeOccupation(f64),

    #[error("bath is not completely positive (min Kossakowski eigenvalue {min_eig:.6e})")]
    NotCp { min_eig: f64 },

    #[error("covariance is not physical (min eigenvalue of V + Sigma/2 is {min_eig:.6e})")]
    NonPhysicalInput { min_eig: f64 },

    #[error("drift has an eigenvalue with real part {max_re:.6e} >= 0; no unique equilibrium")]
    Unstable { max_re: f64 },

    #[error("operation requires {expected} modes, got {got}")]
    WrongModeCount { expected: usize, got: usize },

    #[error("V~(0) + Sigma/2 has a trivial null space; the generation witness does not apply")]
    EmptyNullSpace,

    #[error("vector is not in the null space of V~(0) + Sigma/2 (residual {residual:.3e})")]
    NotNullVector { residual: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("Fock cutoff {0} is too small (need at least 2)")]
    CutoffTooSmall(usize),

    #[error("truncation leak: top Fock level population {population:.3e} exceeds {limit:.1e}")]
    TruncationLeak { population: f64, limit: f64 },

    #[error("negative time {0}")]
    NegativeTime(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
