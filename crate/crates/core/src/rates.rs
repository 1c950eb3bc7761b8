//! Einstein coefficients and the vacuum-fluctuation / radiation-reaction
//! split of the atomic energy change.

use serde::{Deserialize, Serialize};

use crate::domain::{AtomSpec, Axis, Scenario};
use crate::error::{ensure_positive, Error, Result};
use crate::spectral::{
    f_accelerated, f_static, fourier_closed_form, FourierResult, OracleControls, Transition,
};

#[derive(Debug, Clone, PartialEq)]
pub enum RateMethod {
    ClosedForm,
    Oracle(OracleControls),
}

/// `G+(omega0)` and `G-(-omega0)` summed over polarization axes, with the
/// Einstein coefficients they define.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRates {
    pub g_plus: f64,
    pub g_minus: f64,
    pub a_down: f64,
    pub a_up: f64,
    /// Oracle error bounds on `g_plus` and `g_minus`; zero in closed form.
    pub g_plus_error: f64,
    pub g_minus_error: f64,
}

impl SpectralRates {
    pub fn new(g_plus: f64, g_minus: f64) -> Result<Self> {
        for (name, v) in [("g_plus", g_plus), ("g_minus", g_minus)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        Ok(Self::from_parts(g_plus, g_minus, 0.0, 0.0))
    }

    fn from_parts(g_plus: f64, g_minus: f64, g_plus_error: f64, g_minus_error: f64) -> Self {
        Self {
            g_plus,
            g_minus,
            a_down: g_plus,
            a_up: g_minus,
            g_plus_error,
            g_minus_error,
        }
    }

    /// `A_up + A_down`.
    pub fn decay_rate(&self) -> f64 {
        self.a_up + self.a_down
    }
}

fn summed(results: &[FourierResult; 3]) -> (f64, f64) {
    results.iter().fold((0.0, 0.0), |(v, e), r| {
        (v + r.value, e + r.method.achieved_error())
    })
}

pub fn spectral_rates(
    scenario: &Scenario,
    atom: &AtomSpec,
    method: &RateMethod,
) -> Result<SpectralRates> {
    let (down, up) = match method {
        RateMethod::ClosedForm => (
            fourier_closed_form(scenario, atom, Transition::Emission)?,
            fourier_closed_form(scenario, atom, Transition::Excitation)?,
        ),
        RateMethod::Oracle(controls) => {
            crate::spectral::fourier_oracle_pair(scenario, atom, controls)?
        }
    };
    let (g_plus, e_plus) = summed(&down);
    let (g_minus, e_minus) = summed(&up);
    // a quadrature estimate may dip below zero within its error bar; the
    // rates themselves cannot
    let clip = |name: &'static str, g: f64, err: f64| {
        if g < -err {
            Err(Error::invalid(
                name,
                format!("negative beyond its error bound ({g:e} +- {err:e})"),
            ))
        } else {
            Ok(g.max(0.0))
        }
    };
    Ok(SpectralRates::from_parts(
        clip("g_plus", g_plus, e_plus)?,
        clip("g_minus", g_minus, e_minus)?,
        e_plus,
        e_minus,
    ))
}

/// Signed rates of change of the mean atomic energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRates {
    pub vf_excited: f64,
    pub vf_ground: f64,
    pub rr_any_state: f64,
    pub total_excited: f64,
    pub total_ground: f64,
}

/// The totals are formed as `vf + rr` so the decomposition holds exactly in
/// floating point; they equal `-omega0 G+` and `+omega0 G-` up to rounding.
pub fn energy_rates(sr: &SpectralRates, omega0: f64) -> EnergyRates {
    let half = 0.5 * omega0;
    let vf_ground = half * (sr.g_plus + sr.g_minus);
    let vf_excited = -vf_ground;
    let rr_any_state = half * (sr.g_minus - sr.g_plus);
    EnergyRates {
        vf_excited,
        vf_ground,
        rr_any_state,
        total_excited: rr_any_state + vf_excited,
        total_ground: rr_any_state + vf_ground,
    }
}

/// Total rate next to the mirror (`z0 -> 0`, where `f_x = f_y = -f_z = 1`)
/// relative to free space. Temperature factors cancel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationReport {
    pub per_axis: [f64; 3],
    pub ratio: f64,
}

pub fn polarization_report(atom: &AtomSpec) -> PolarizationReport {
    const CONTACT: [f64; 3] = [1.0, 1.0, -1.0];
    let alpha = atom.alpha();
    let per_axis = Axis::ALL.map(|a| alpha[a.index()] * (1.0 - CONTACT[a.index()]));
    let ratio = per_axis.iter().sum::<f64>() / alpha.iter().sum::<f64>();
    PolarizationReport { per_axis, ratio }
}

/// x-polarized emission factors of the accelerated atom and of a static atom
/// in a bath at the Unruh temperature, both at height `z0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `1 + a^2/omega0^2 - f_x(omega0, z0, a)`
    pub accelerated_factor: f64,
    /// `1 - f_x(omega0, z0)`
    pub thermal_factor: f64,
    pub difference: f64,
    /// `2 pi / a`, shared by both Planck factors.
    pub beta: f64,
}

impl EquivalenceReport {
    pub fn is_nonzero(&self, tol: f64) -> bool {
        self.difference.abs() > tol
    }
}

/// `z0 = inf` compares the two situations without a mirror.
pub fn equivalence_check(omega0: f64, z0: f64, a: f64) -> Result<EquivalenceReport> {
    ensure_positive("omega0", omega0)?;
    ensure_positive("a", a)?;
    if z0.is_nan() || z0 <= 0.0 {
        return Err(Error::invalid(
            "z0",
            format!("must be > 0 (or +inf), got {z0}"),
        ));
    }
    let (f_acc, f_stat) = if z0.is_infinite() {
        (0.0, 0.0)
    } else {
        (f_accelerated(omega0, z0, a)?.f_x, f_static(omega0, z0)?.f_x)
    };
    let r2 = (a / omega0).powi(2);
    Ok(EquivalenceReport {
        accelerated_factor: 1.0 + r2 - f_acc,
        thermal_factor: 1.0 - f_stat,
        // grouped so the mirror-free case returns a^2/omega0^2 exactly
        difference: r2 + (f_stat - f_acc),
        beta: 2.0 * std::f64::consts::PI / a,
    })
}
