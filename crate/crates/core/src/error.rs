use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GibbsError {
    #[error("invalid parameters: {0}")]
    Param(String),

    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("probabilities sum to {0}, expected 1")]
    Normalization(f64),

    #[error("value {0} is not a probability")]
    NotAProbability(f64),

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("root finder failed: {0}")]
    Convergence(String),

    #[error("integration domain is empty")]
    EmptyDomain,

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tol:e}")]
    ToleranceNotMet { estimate: f64, tol: f64 },

    #[error("model cannot be used here: {0}")]
    Model(String),

    #[error("arithmetic precision insufficient: {0}")]
    Accuracy(String),
}

impl GibbsError {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            GibbsError::NonConvergence(_)
                | GibbsError::Convergence(_)
                | GibbsError::ToleranceNotMet { .. }
                | GibbsError::Normalization(_)
                | GibbsError::NotAProbability(_)
                | GibbsError::Accuracy(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, GibbsError>;
