//! Regularized quadrature of `int e^{i lambda u} G(u - i eps) du` followed by
//! polynomial extrapolation to `eps -> 0`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed::check_accelerated_polarization;
use super::{FourierMethod, FourierResult};
use crate::domain::{AtomSpec, Axis, Scenario};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::wightman::{
    accel_pole_lags, accel_xx_unchecked, correlator_free_space, static_thermal_at, ImageSumPolicy,
};

/// Knobs of the quadrature oracle. The panel rule is a fixed 21-point
/// Gauss-Kronrod pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleControls {
    /// Largest regulator; `None` picks `min(0.1, z0/4, 1/(4 omega0), beta/8, u_s/4)`.
    pub epsilon0: Option<f64>,
    /// Number of regulators `eps_k = eps0 2^-k`.
    pub levels: usize,
    /// Half-width of the lag window; `None` picks `max(50/omega0, 20 beta)` at
    /// finite temperature, `max(50/omega0, 20/a)` under acceleration and
    /// `400/omega0` otherwise.
    pub window: Option<f64>,
    pub tol_rel: f64,
    /// Absolute tolerance in units of `gamma0`.
    pub tol_abs: f64,
    pub max_panels: usize,
    #[serde(skip)]
    pub image_policy: ImageSumPolicy,
}

impl Default for OracleControls {
    fn default() -> Self {
        Self {
            epsilon0: None,
            levels: 5,
            window: None,
            tol_rel: 1e-6,
            tol_abs: 1e-8,
            max_panels: 200_000,
            image_policy: ImageSumPolicy::default(),
        }
    }
}

impl OracleControls {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.epsilon0 {
            crate::error::ensure_positive("epsilon0", e)?;
        }
        if let Some(l) = self.window {
            crate::error::ensure_positive("window", l)?;
        }
        if self.levels < 2 {
            return Err(Error::invalid(
                "levels",
                "need at least two regulators to extrapolate",
            ));
        }
        crate::error::ensure_positive("tol_rel", self.tol_rel)?;
        if self.tol_abs.is_nan() || self.tol_abs < 0.0 {
            return Err(Error::invalid("tol_abs", "must be >= 0"));
        }
        if self.max_panels == 0 {
            return Err(Error::invalid("max_panels", "must be >= 1"));
        }
        self.image_policy.validate()
    }

    pub fn epsilons(&self, scenario: &Scenario, omega0: f64) -> Vec<f64> {
        let eps0 = self
            .epsilon0
            .unwrap_or_else(|| default_epsilon0(scenario, omega0));
        (0..self.levels)
            .map(|k| eps0 * 0.5f64.powi(k as i32))
            .collect()
    }

    pub fn window_for(&self, scenario: &Scenario, omega0: f64) -> f64 {
        self.window.unwrap_or_else(|| {
            // thermal and accelerated correlators decay exponentially, the
            // zero-temperature static ones only as |u|^-4
            let short = 50.0 / omega0;
            match *scenario {
                Scenario::StaticMirrorThermal { beta, .. } if beta.is_finite() => {
                    short.max(20.0 * beta)
                }
                Scenario::AcceleratedMirror { a, .. } => short.max(20.0 / a),
                _ => 400.0 / omega0,
            }
        })
    }
}

fn default_epsilon0(scenario: &Scenario, omega0: f64) -> f64 {
    let mut e = 0.1f64.min(0.25 / omega0);
    match *scenario {
        Scenario::StaticFreeSpace => {}
        Scenario::StaticMirrorThermal { z0, beta } => {
            e = e.min(z0 / 4.0);
            if beta.is_finite() {
                e = e.min(beta / 8.0);
            }
        }
        Scenario::AcceleratedMirror { a, z0 } => {
            e = e.min(z0 / 4.0).min(accel_pole_lags(a, z0)[2] / 4.0);
        }
    }
    e
}

/// Correlator components `(xx = yy, zz)` at `u - i eps`.
fn correlator_pair(
    scenario: &Scenario,
    u: f64,
    eps: f64,
    policy: &ImageSumPolicy,
) -> Result<[Complex64; 2]> {
    Ok(match *scenario {
        Scenario::StaticFreeSpace => {
            let g = correlator_free_space(u, eps);
            [g, g]
        }
        Scenario::StaticMirrorThermal { z0, beta } => {
            let s = static_thermal_at(Complex64::new(u, 0.0), z0, beta, eps, policy)?;
            [s.value[0], s.value[2]]
        }
        Scenario::AcceleratedMirror { a, z0 } => {
            [accel_xx_unchecked(a, z0, u, eps), Complex64::new(0.0, 0.0)]
        }
    })
}

fn real_poles(scenario: &Scenario) -> Vec<f64> {
    match *scenario {
        Scenario::StaticFreeSpace => vec![0.0],
        Scenario::StaticMirrorThermal { z0, .. } => vec![-2.0 * z0, 0.0, 2.0 * z0],
        Scenario::AcceleratedMirror { a, z0 } => accel_pole_lags(a, z0).to_vec(),
    }
}

/// Panels of width `eps/4` within `2 eps` of each pole, graded geometrically
/// outwards up to `h_max`.
fn mesh(poles: &[f64], half_width: f64, eps: f64, h_max: f64) -> Vec<f64> {
    let fine = 0.25 * eps;
    let mut anchors: Vec<f64> = poles
        .iter()
        .copied()
        .filter(|p| p.abs() < half_width)
        .collect();
    anchors.push(-half_width);
    anchors.push(half_width);
    anchors.sort_by(f64::total_cmp);
    anchors.dedup();

    let distance = |u: f64| {
        poles
            .iter()
            .fold(f64::INFINITY, |d, p| d.min((u - p).abs()))
    };
    let mut points = vec![-half_width];
    for pair in anchors.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let mut u = lo;
        loop {
            let d = distance(u);
            let step = if d <= 2.0 * eps {
                fine
            } else {
                (0.25 * d).clamp(fine, h_max)
            };
            if u + step >= hi - 0.5 * fine {
                points.push(hi);
                break;
            }
            u += step;
            points.push(u);
        }
    }
    points
}

/// Lagrange weights of the interpolating polynomial through `(x_k, .)`
/// evaluated at zero.
fn extrapolation_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            x.iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &xj)| xj / (xj - x[k]))
                .product()
        })
        .collect()
}

fn extrapolate(weights: &[f64], values: &[Complex64]) -> Complex64 {
    weights.iter().zip(values).map(|(w, v)| v * *w).sum()
}

struct Level {
    value: [Complex64; 4],
    quad_error: f64,
    rounding: [f64; 4],
    tail: f64,
}

struct OracleRun {
    /// `[lambda][axis]` weighted values and error estimates.
    values: [[f64; 3]; 2],
    errors: [[f64; 3]; 2],
    epsilons: Vec<f64>,
    window: f64,
}

fn run_oracle(
    scenario: &Scenario,
    atom: &AtomSpec,
    lambdas: [f64; 2],
    controls: &OracleControls,
) -> Result<OracleRun> {
    scenario.validate()?;
    controls.validate()?;
    if matches!(scenario, Scenario::AcceleratedMirror { .. }) {
        check_accelerated_polarization(atom)?;
    }
    let omega0 = atom.omega0();
    let freq = lambdas[0].abs().max(lambdas[1].abs());
    if freq.is_nan() || freq <= 0.0 || !freq.is_finite() {
        return Err(Error::invalid("lambda", "must be finite and nonzero"));
    }
    let epsilons = controls.epsilons(scenario, omega0);
    let window = controls.window_for(scenario, omega0);
    let poles = real_poles(scenario);
    let mut h_max = 2.0 / freq;
    match *scenario {
        Scenario::StaticMirrorThermal { beta, .. } if beta.is_finite() => {
            h_max = h_max.min(0.25 * beta)
        }
        Scenario::AcceleratedMirror { a, .. } => h_max = h_max.min(2.0 / a),
        _ => {}
    }
    // free-space transform at |lambda| sets the absolute scale
    let scale = freq.powi(3) / (3.0 * PI);
    let quad_tol = 1e-4 * controls.tol_rel * scale;
    let policy = &controls.image_policy;

    let levels: Vec<Result<Level>> = epsilons
        .par_iter()
        .map(|&eps| {
            let failure: RefCell<Option<Error>> = RefCell::new(None);
            let integrand = |u: f64| -> [Complex64; 4] {
                let g = match correlator_pair(scenario, u, eps, policy) {
                    Ok(g) => g,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        [Complex64::new(0.0, 0.0); 2]
                    }
                };
                let p = Complex64::from_polar(1.0, lambdas[0] * u);
                let m = Complex64::from_polar(1.0, lambdas[1] * u);
                [g[0] * p, g[1] * p, g[0] * m, g[1] * m]
            };
            let breaks = mesh(&poles, window, eps, h_max);
            let out = integrate(integrand, &breaks, quad_tol, controls.max_panels);
            // |int_L^inf e^{i lambda u} G| <= 2 |G(L)| / |lambda| for monotone |G|
            let tail = [-window, window]
                .iter()
                .map(|&u| match correlator_pair(scenario, u, eps, policy) {
                    Ok(g) => {
                        2.0 * g[0].norm().max(g[1].norm()) / lambdas[0].abs().min(lambdas[1].abs())
                    }
                    Err(_) => f64::INFINITY,
                })
                .sum();
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            Ok(Level {
                value: out.value,
                quad_error: out.error,
                rounding: out.abs_integral.map(|a| f64::EPSILON * a),
                tail,
            })
        })
        .collect();
    let levels = levels.into_iter().collect::<Result<Vec<_>>>()?;

    // the truncated tails vary smoothly with eps and extrapolate like the rest
    let tail = levels.iter().fold(0.0f64, |m, l| m.max(l.tail));
    // Every contiguous run of at least three regulators gives an extrapolant
    // and an error estimate: coarse runs carry more extrapolation error, fine
    // ones more rounding near the poles. Keep the best-estimated one.
    let min_run = 3.min(levels.len());
    let mut runs = Vec::new();
    for start in 0..levels.len() {
        for end in start + min_run..=levels.len() {
            let eps = &epsilons[start..end];
            runs.push((
                start,
                end,
                extrapolation_weights(eps),
                extrapolation_weights(&eps[1..]),
            ));
        }
    }
    let estimate =
        |comp: usize, (start, end, weights, lower): &(usize, usize, Vec<f64>, Vec<f64>)| {
            let used = &levels[*start..*end];
            let series: Vec<Complex64> = used.iter().map(|l| l.value[comp]).collect();
            let best = extrapolate(weights, &series);
            let residual = (best - extrapolate(lower, &series[1..])).norm();
            let propagated: f64 = weights
                .iter()
                .zip(used)
                .map(|(w, l)| w.abs() * (l.quad_error + l.rounding[comp]))
                .sum();
            // the exact transform is real
            (best.re, residual + tail + propagated + best.im.abs())
        };

    let mut values = [[0.0; 3]; 2];
    let mut errors = [[0.0; 3]; 2];
    for (side, (v_side, e_side)) in values.iter_mut().zip(errors.iter_mut()).enumerate() {
        for axis in Axis::ALL {
            let weight = atom.dipole_weight(axis);
            if weight == 0.0 {
                continue;
            }
            let comp = 2 * side + usize::from(axis == Axis::Z);
            let (best, err) =
                runs.iter()
                    .map(|r| estimate(comp, r))
                    .fold(
                        (f64::NAN, f64::INFINITY),
                        |acc, x| if x.1 < acc.1 { x } else { acc },
                    );
            v_side[axis.index()] = weight * best;
            e_side[axis.index()] = weight * err;
        }
    }
    Ok(OracleRun {
        values,
        errors,
        epsilons,
        window,
    })
}

fn to_results(
    run: &OracleRun,
    side: usize,
    lambda: f64,
    atom: &AtomSpec,
    controls: &OracleControls,
) -> Result<[FourierResult; 3]> {
    for axis in Axis::ALL {
        let (v, e) = (
            run.values[side][axis.index()],
            run.errors[side][axis.index()],
        );
        let requested = controls.tol_rel * v.abs() + controls.tol_abs * atom.gamma0();
        if !e.is_finite() || e > requested {
            return Err(Error::OracleNonConvergence {
                lambda,
                achieved: e,
                requested,
                epsilons: run.epsilons.clone(),
            });
        }
    }
    Ok(Axis::ALL.map(|axis| FourierResult {
        axis,
        value: run.values[side][axis.index()],
        method: FourierMethod::QuadratureOracle {
            epsilon_sequence: run.epsilons.clone(),
            window: run.window,
            achieved_error: run.errors[side][axis.index()],
        },
        lambda,
    }))
}

/// Per-axis transform at a signed frequency by direct quadrature of the
/// regularized correlator.
pub fn fourier_oracle(
    scenario: &Scenario,
    atom: &AtomSpec,
    lambda: f64,
    controls: &OracleControls,
) -> Result<[FourierResult; 3]> {
    let run = run_oracle(scenario, atom, [lambda, -lambda], controls)?;
    to_results(&run, 0, lambda, atom, controls)
}

/// Emission and excitation transforms from a single pass over the lag axis.
pub(crate) fn fourier_oracle_pair(
    scenario: &Scenario,
    atom: &AtomSpec,
    controls: &OracleControls,
) -> Result<([FourierResult; 3], [FourierResult; 3])> {
    let w = atom.omega0();
    let run = run_oracle(scenario, atom, [w, -w], controls)?;
    Ok((
        to_results(&run, 0, w, atom, controls)?,
        to_results(&run, 1, -w, atom, controls)?,
    ))
}
