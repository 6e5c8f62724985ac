use thiserror::Error;

/// Errors raised by the transform, factorization and solver routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NlftError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("grid size {0} must be a power of two and at least 2")]
    InvalidGridSize(usize),

    #[error("grid size {grid} too small for support width {width} (need at least {required})")]
    GridTooSmall {
        grid: usize,
        width: usize,
        required: usize,
    },

    #[error("window [{lo}, {hi}] is too wide for grid size {grid}; coefficients would alias")]
    Aliasing { lo: i64, hi: i64, grid: usize },

    #[error("symbol vanishes on the grid: min modulus {min:.3e} below {delta:.3e}")]
    VanishingSymbol { min: f64, delta: f64 },

    #[error("Szego margin violated: max |b| = {max_abs:.17} exceeds 1 - {delta:.3e}")]
    SzegoMargin { max_abs: f64, delta: f64 },

    #[error("outer factor check failed: winding number {winding} on |z| = {radius}")]
    NotOuter { winding: i64, radius: f64 },

    #[error("spectral factor inaccurate: determinant residual {residual:.3e} above {tolerance:.3e}")]
    FactorResidual { residual: f64, tolerance: f64 },

    #[error("enumeration too large: {count} index tuples exceed the limit {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("Krylov solver stalled after {iterations} iterations (relative residual {residual:.3e}, target {tol:.3e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("inconsistent solution: {0}")]
    Consistency(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl NlftError {
    /// True for failures of a numerical method or of a mathematical
    /// hypothesis on valid input; false for malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            NlftError::VanishingSymbol { .. }
                | NlftError::SzegoMargin { .. }
                | NlftError::NotOuter { .. }
                | NlftError::FactorResidual { .. }
                | NlftError::Convergence { .. }
                | NlftError::Consistency(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, NlftError>;
