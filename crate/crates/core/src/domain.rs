//! Physical parameters and trajectories.
//!
//! Natural units throughout: ħ = c = k_B = 1. A perfectly reflecting plane
//! mirror, where present, sits at z = 0 and the atom is at height `z0`.
//! Transverse offsets parallel to the mirror are fixed to zero since nothing
//! depends on them.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

const ALPHA_SUM_TOL: f64 = 1e-12;

/// Cartesian polarization axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Two-level atom: transition frequency, vacuum emission rate and the
/// relative polarizabilities `alpha_i = |<+|r_i|->|^2 / |<+|r|->|^2`.
///
/// The dipole products enter every rate only through `gamma0 * alpha_i`, so
/// the electron charge and raw matrix elements never appear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    omega0: f64,
    gamma0: f64,
    alpha: [f64; 3],
}

impl AtomSpec {
    pub fn new(omega0: f64, gamma0: f64, alpha: [f64; 3]) -> Result<Self> {
        ensure_positive("omega0", omega0)?;
        if !(gamma0.is_finite() && gamma0 >= 0.0) {
            return Err(Error::invalid(
                "gamma0",
                format!("must be finite and >= 0, got {gamma0}"),
            ));
        }
        if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::invalid(
                "alpha",
                format!("components must lie in [0, 1], got {alpha:?}"),
            ));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(Error::invalid(
                "alpha",
                format!("components must sum to 1, got {sum}"),
            ));
        }
        Ok(AtomSpec {
            omega0,
            gamma0,
            alpha,
        })
    }

    pub fn isotropic(omega0: f64, gamma0: f64) -> Result<Self> {
        Self::new(omega0, gamma0, [1.0 / 3.0; 3])
    }

    /// Dipole along a single axis.
    pub fn polarized(axis: Axis, omega0: f64, gamma0: f64) -> Result<Self> {
        let mut alpha = [0.0; 3];
        alpha[axis.index()] = 1.0;
        Self::new(omega0, gamma0, alpha)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    /// Dipole weight `e^2 |<+|r_i|->|^2` expressed through `gamma0`:
    /// `gamma0 * alpha_i * 3 pi / omega0^3`.
    pub fn dipole_weight(&self, axis: Axis) -> f64 {
        self.gamma0 * self.alpha[axis.index()] * 3.0 * PI / self.omega0.powi(3)
    }
}

/// Trajectory and environment of the atom.
///
/// `beta = f64::INFINITY` encodes zero temperature. A vanishing acceleration
/// must be requested as `StaticMirrorThermal` with infinite `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scenario {
    StaticFreeSpace,
    StaticMirrorThermal { z0: f64, beta: f64 },
    AcceleratedMirror { a: f64, z0: f64 },
}

impl Scenario {
    pub fn static_mirror(z0: f64, beta: f64) -> Result<Self> {
        let s = Scenario::StaticMirrorThermal { z0, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn accelerated(a: f64, z0: f64) -> Result<Self> {
        let s = Scenario::AcceleratedMirror { a, z0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scenario::StaticFreeSpace => Ok(()),
            Scenario::StaticMirrorThermal { z0, beta } => {
                ensure_positive("z0", z0)?;
                if beta.is_nan() || beta <= 0.0 {
                    return Err(Error::invalid(
                        "beta",
                        format!("must be > 0 (or +inf), got {beta}"),
                    ));
                }
                Ok(())
            }
            Scenario::AcceleratedMirror { a, z0 } => {
                if a == 0.0 {
                    return Err(Error::invalid(
                        "a",
                        "zero acceleration must be requested as a static mirror scenario with beta = inf",
                    ));
                }
                ensure_positive("a", a)?;
                ensure_positive("z0", z0)
            }
        }
    }

    pub fn z0(&self) -> Option<f64> {
        match *self {
            Scenario::StaticFreeSpace => None,
            Scenario::StaticMirrorThermal { z0, .. } | Scenario::AcceleratedMirror { z0, .. } => {
                Some(z0)
            }
        }
    }

    /// Inverse temperature of the Planck factor seen by the atom: the bath
    /// temperature for the static mirror, `2 pi / a` for the accelerated one.
    pub fn effective_beta(&self) -> f64 {
        match *self {
            Scenario::StaticFreeSpace => f64::INFINITY,
            Scenario::StaticMirrorThermal { beta, .. } => beta,
            Scenario::AcceleratedMirror { a, .. } => 2.0 * PI / a,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::StaticFreeSpace => "static_free_space",
            Scenario::StaticMirrorThermal { .. } => "static_mirror_thermal",
            Scenario::AcceleratedMirror { .. } => "accelerated_mirror",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Scenario::StaticFreeSpace => write!(f, "static free space"),
            Scenario::StaticMirrorThermal { z0, beta } => {
                write!(f, "static mirror (z0 = {z0}, beta = {beta})")
            }
            Scenario::AcceleratedMirror { a, z0 } => {
                write!(f, "accelerated mirror (a = {a}, z0 = {z0})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    Excited,
    Ground,
    Mixed { excited_fraction: f64 },
}

impl InitialState {
    pub fn mixed(excited_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&excited_fraction) {
            return Err(Error::invalid(
                "excited_fraction",
                format!("must lie in [0, 1], got {excited_fraction}"),
            ));
        }
        Ok(InitialState::Mixed { excited_fraction })
    }

    pub fn excited_fraction(&self) -> f64 {
        match *self {
            InitialState::Excited => 1.0,
            InitialState::Ground => 0.0,
            InitialState::Mixed { excited_fraction } => excited_fraction,
        }
    }

    /// Mean atomic energy `omega0 (p_excited - 1/2)`.
    pub fn energy(&self, omega0: f64) -> f64 {
        omega0 * (self.excited_fraction() - 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector { t, x, y, z }
    }

    pub fn spatial(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub(crate) fn with_spatial(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::X => self.x = value,
            Axis::Y => self.y = value,
            Axis::Z => self.z = value,
        }
        self
    }

    /// Minkowski interval `(t - t')^2 - |x - x'|^2`.
    pub fn interval(&self, other: &FourVector) -> f64 {
        let dt = self.t - other.t;
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dt * dt - dx * dx - dy * dy - dz * dz
    }
}

/// Worldline point at proper time `tau`.
pub fn trajectory_point(scenario: &Scenario, tau: f64) -> FourVector {
    match *scenario {
        Scenario::StaticFreeSpace => FourVector::new(tau, 0.0, 0.0, 0.0),
        Scenario::StaticMirrorThermal { z0, .. } => FourVector::new(tau, 0.0, 0.0, z0),
        Scenario::AcceleratedMirror { a, z0 } => {
            FourVector::new((a * tau).sinh() / a, (a * tau).cosh() / a, 0.0, z0)
        }
    }
}

/// Inverse Unruh temperature `2 pi / a`.
pub fn unruh_beta(a: f64) -> Result<f64> {
    ensure_positive("a", a)?;
    Ok(2.0 * PI / a)
}

/// Bose-Einstein occupation `1 / (exp(beta omega) - 1)`; exactly zero at
/// `beta = inf`.
pub fn planck(beta: f64, omega: f64) -> f64 {
    if beta.is_infinite() {
        0.0
    } else {
        1.0 / (beta * omega).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn static_trajectory_is_at_rest() {
        let s = Scenario::static_mirror(1.0, 1.0).unwrap();
        assert_eq!(
            trajectory_point(&s, 5.0),
            FourVector::new(5.0, 0.0, 0.0, 1.0)
        );
    }

    #[test]
    fn accelerated_trajectory_values() {
        let s = Scenario::accelerated(1.0, 1.0).unwrap();
        assert_eq!(
            trajectory_point(&s, 0.0),
            FourVector::new(0.0, 1.0, 0.0, 1.0)
        );

        let s = Scenario::accelerated(2.0, 0.5).unwrap();
        let p = trajectory_point(&s, 1.0);
        assert_relative_eq!(p.t, 1.813_430_203_923_509_4, max_relative = 1e-12);
        assert_relative_eq!(p.x, 1.881_097_845_541_816_3, max_relative = 1e-12);
        assert_eq!((p.y, p.z), (0.0, 0.5));
    }

    #[test]
    fn unruh_beta_values() {
        assert_relative_eq!(unruh_beta(2.0 * PI).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            unruh_beta(1.0).unwrap(),
            std::f64::consts::TAU,
            max_relative = 1e-15
        );
        assert!(unruh_beta(1e-300).unwrap() > 1e300);
        assert!(unruh_beta(0.0).is_err());
        assert!(unruh_beta(-1.0).is_err());
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::static_mirror(0.0, 1.0).is_err());
        assert!(Scenario::static_mirror(1.0, 0.0).is_err());
        assert!(Scenario::static_mirror(1.0, f64::INFINITY).is_ok());
        assert!(Scenario::accelerated(0.0, 1.0).is_err());
        assert!(Scenario::accelerated(1.0, -1.0).is_err());
    }

    #[test]
    fn atom_validation() {
        assert!(AtomSpec::new(1.0, 1.0, [0.5, 0.5, 0.0]).is_ok());
        assert!(AtomSpec::new(1.0, 1.0, [0.5, 0.6, 0.0]).is_err());
        assert!(AtomSpec::new(0.0, 1.0, [1.0, 0.0, 0.0]).is_err());
        assert!(AtomSpec::new(1.0, -1.0, [1.0, 0.0, 0.0]).is_err());
        assert!(AtomSpec::new(1.0, 1.0, [1.2, -0.2, 0.0]).is_err());
        assert!(AtomSpec::isotropic(2.0, 0.3).is_ok());
    }

    #[test]
    fn initial_state_energy() {
        assert_eq!(InitialState::Excited.energy(2.0), 1.0);
        assert_eq!(InitialState::Ground.energy(2.0), -1.0);
        assert_eq!(InitialState::mixed(0.25).unwrap().energy(2.0), -0.5);
        assert!(InitialState::mixed(1.5).is_err());
    }

    #[test]
    fn planck_zero_temperature_is_exact() {
        assert_eq!(planck(f64::INFINITY, 1.0), 0.0);
        assert_relative_eq!(planck(2f64.ln(), 1.0), 1.0, max_relative = 1e-14);
    }
}
