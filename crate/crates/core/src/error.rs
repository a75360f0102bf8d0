use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not an orthogonal projector (defect {defect:.3e})")]
    NotProjector { defect: f64 },

    #[error("not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("right-hand side is not in the range of the unperturbed generator (max |Tr[A_i tau]| = {max_violation:.3e})")]
    NotInRange {
        /// Values Tr[A_i tau] for every invariant observable A_i.
        traces: Vec<num_complex::Complex64>,
        max_violation: f64,
    },

    #[error("solvability system stays singular through order {order}: {unresolved} undetermined kernel direction(s)")]
    DegenerateBeyondOrder { order: usize, unresolved: usize },

    #[error("base generator has {0} stationary directions; use the degenerate expansion")]
    DegenerateBase(usize),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures that indicate bad input rather than a failed check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::InvalidInput(_)
                | Error::Json(_)
                | Error::Io(_)
                | Error::UnknownFixture(_)
                | Error::NotProjector { .. }
                | Error::NotUnitary { .. }
        )
    }
}
