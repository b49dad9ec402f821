use thiserror::Error;

/// Failures raised by the operator routines.
///
/// Every numerical rejection carries the residual or eigenvalue that caused it,
/// so callers can report the margin instead of a bare refusal.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not a contraction: I - X*X has eigenvalue {min_eigenvalue:e}")]
    NotAContraction { min_eigenvalue: f64 },

    #[error("map is not isometric on the domain (residual {residual:e})")]
    NotIsometric { residual: f64 },

    #[error("operators {first} and {second} do not commute (residual {residual:e})")]
    NotCommuting {
        first: usize,
        second: usize,
        residual: f64,
    },

    #[error("simultaneous triangularization failed after {attempts} attempts (residual {residual:e})")]
    TriangularizationFailed { attempts: usize, residual: f64 },

    #[error("eigenvalue solver did not converge")]
    EigenFailure,

    #[error("fiber mismatch: expected {expected}, found {found}")]
    FiberMismatch { expected: usize, found: usize },

    #[error("witness search failed: {0}")]
    SearchFailed(String),

    #[error("no fundamental pair: {which} has off-defect residual {residual:e}")]
    NoFundamentalPair { which: &'static str, residual: f64 },

    #[error("not a partial isometry (residual {residual:e})")]
    NotPartialIsometry { residual: f64 },

    #[error("pairing correspondence is not isometric (residual {residual:e})")]
    PairingNotIsometric { residual: f64 },

    #[error("degree {degree} exceeds the protected degree {protected}")]
    DegreeExceedsProtection { degree: usize, protected: usize },

    #[error("lift does not verify at degree {degree} (residual {residual:e})")]
    LiftNotVerified { degree: usize, residual: f64 },

    #[error("random generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for failures that signal a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::PairingNotIsometric { .. }
                | Error::EigenFailure
                | Error::TriangularizationFailed { .. }
                | Error::SearchFailed(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
