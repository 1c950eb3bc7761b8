//! One-sided Fourier transforms of the field correlator weighted by the
//! dipole matrix elements, in closed form and by regularized quadrature.

mod boundary;
mod closed;
mod oracle;

pub use boundary::{
    f_accelerated, f_static, BoundaryFunctions, BoundaryVariant, ACCEL_SERIES_THRESHOLD,
    STATIC_SERIES_THRESHOLD,
};
pub use closed::fourier_closed_form;
pub(crate) use oracle::fourier_oracle_pair;
pub use oracle::{fourier_oracle, OracleControls};

use serde::{Deserialize, Serialize};

use crate::domain::Axis;

/// Emission evaluates the transform at `lambda = +omega0`, excitation at
/// `lambda = -omega0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    Emission,
    Excitation,
}

impl Transition {
    pub fn lambda(self, omega0: f64) -> f64 {
        match self {
            Transition::Emission => omega0,
            Transition::Excitation => -omega0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FourierMethod {
    ClosedForm,
    QuadratureOracle {
        epsilon_sequence: Vec<f64>,
        window: f64,
        achieved_error: f64,
    },
}

impl FourierMethod {
    /// Zero for closed-form results.
    pub fn achieved_error(&self) -> f64 {
        match self {
            FourierMethod::ClosedForm => 0.0,
            FourierMethod::QuadratureOracle { achieved_error, .. } => *achieved_error,
        }
    }
}

/// Contribution of one polarization axis to `G+(omega0)` or `G-(-omega0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierResult {
    pub axis: Axis,
    pub value: f64,
    pub method: FourierMethod,
    pub lambda: f64,
}
