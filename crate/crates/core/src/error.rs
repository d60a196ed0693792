use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("form is not positive: λ_min = {lambda_min:.6e}, hermitian defect = {hermitian_defect:.6e}{}", label.as_deref().map(|l| format!(" (atom {l:?})")).unwrap_or_default())]
    NotPositive {
        lambda_min: f64,
        hermitian_defect: f64,
        label: Option<String>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unitary equivalence failed: max defect {max_defect:.6e} exceeds tolerance {tol:.6e}")]
    EquivalenceFailed { max_defect: f64, tol: f64 },

    #[error("cross-check between density routes failed at atom {atom:?}: max disagreement {max_disagreement:.6e}")]
    CrossCheckFailed {
        atom: String,
        max_disagreement: f64,
    },

    #[error("grid of {grid} points aliases the window [-{half_width}, {half_width}]: need grid > 2·half_width")]
    Aliasing { grid: usize, half_width: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
