use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "image sum did not reach relative tolerance {tol:e} within {max_terms} terms \
         (achieved bound {achieved:e})"
    )]
    ImageSumTruncation {
        tol: f64,
        max_terms: u64,
        achieved: f64,
    },

    #[error(
        "finite-difference derivative did not settle near a singular separation \
         (steps tried {steps:?}, last relative change {last_change:e})"
    )]
    StepUnderflow { steps: Vec<f64>, last_change: f64 },

    #[error("accelerated scenario supports x-polarization only, got alpha = {alpha:?}")]
    UnsupportedPolarization { alpha: [f64; 3] },

    #[error(
        "quadrature oracle did not converge at lambda = {lambda}: achieved error {achieved:e} \
         exceeds requested {requested:e} (epsilons {epsilons:?})"
    )]
    OracleNonConvergence {
        lambda: f64,
        achieved: f64,
        requested: f64,
        epsilons: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}
