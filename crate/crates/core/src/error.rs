use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: max |A - A^T| = {0:e}")]
    NotSymmetric(f64),

    #[error("basis is not column-orthonormal: max |Q^T Q - I| = {0:e}")]
    NotOrthonormal(f64),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("no spectral gap: lambda_r = {lam_r}, lambda_(r+1) = {lam_next}")]
    NoGap { lam_r: f64, lam_next: f64 },

    #[error("bound not applicable: {0}")]
    NotApplicable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate separation: clusters {0} and {1} share the same true row")]
    DegenerateSeparation(usize, usize),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
