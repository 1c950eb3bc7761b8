//! Electric-field two-point functions along stationary worldlines.
//!
//! All correlators are returned without dipole factors: `G_ii(u)` for the
//! lag `u = tau - tau'` with the regulator applied as `u -> u - i epsilon`.
//! Only diagonal components are computed; for the mirror geometries the
//! off-diagonal ones vanish.

mod imagesum;
mod potential;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::Axis;
use crate::error::{ensure_positive, Error, Result};

pub use potential::{correlator_from_potential, potential_two_point, PotentialComponent};

pub(crate) use imagesum::{laurent_tail, order_for_ratio};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const MIN_EXPLICIT_TERMS: u64 = 32;

/// How the imaginary-time image sum over `k` is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TruncationMode {
    /// Grow the number of explicit terms until the remainder bound is below
    /// `tol` times the absolute scale `sum_k |term_k|` of the explicit terms.
    TruncateAtTolerance { tol: f64, max_terms: u64 },
    /// Exactly `K` explicit image pairs.
    FixedTerms(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSumPolicy {
    pub mode: TruncationMode,
    pub tail_bound_reported: bool,
    /// Add the resummed remainder `|k| > K` from the large-`k` expansion of
    /// the summand. Without it the reported bound is the plain `(K beta)^-3`
    /// truncation estimate.
    pub asymptotic_tail: bool,
}

impl Default for ImageSumPolicy {
    fn default() -> Self {
        ImageSumPolicy {
            mode: TruncationMode::TruncateAtTolerance {
                tol: 1e-12,
                max_terms: 1_000_000,
            },
            tail_bound_reported: true,
            asymptotic_tail: true,
        }
    }
}

impl ImageSumPolicy {
    pub fn fixed(terms: u64) -> Self {
        ImageSumPolicy {
            mode: TruncationMode::FixedTerms(terms),
            tail_bound_reported: true,
            asymptotic_tail: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            TruncationMode::TruncateAtTolerance { tol, max_terms } => {
                ensure_positive("tol", tol)?;
                if max_terms < 1 {
                    return Err(Error::invalid("max_terms", "must be >= 1"));
                }
            }
            TruncationMode::FixedTerms(k) => {
                if k < 1 {
                    return Err(Error::invalid("K", "must be >= 1"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorSample {
    pub u: f64,
    pub epsilon: f64,
    /// `[xx, yy, zz]`
    pub value: [Complex64; 3],
    /// Explicit image pairs summed (0 at zero temperature).
    pub terms: u64,
    pub tail_bound: Option<f64>,
}

impl CorrelatorSample {
    pub fn component(&self, axis: Axis) -> Complex64 {
        self.value[axis.index()]
    }
}

/// Summand of the static thermal image sum at `v = lag + i k beta`:
/// `[free + boundary_xy, free + boundary_z]`. The regulator shifts only the
/// denominators; the boundary numerator keeps the unshifted `v`.
#[inline]
fn static_summand(v: Complex64, epsilon: f64, z0: f64) -> [Complex64; 2] {
    let w = v - I * epsilon;
    let w2 = w * w;
    let free = (w2 * w2).inv();
    let four_z2 = 4.0 * z0 * z0;
    let d = w2 - four_z2;
    let inv_d3 = (d * d * d).inv();
    let v2 = v * v;
    let b_xy = -(v2 + four_z2) * inv_d3;
    let b_z = -(four_z2 - v2) * inv_d3;
    [free + b_xy, free + b_z]
}

/// Laurent coefficients in `1/p`, `p = v - i epsilon`, of the static summand
/// for the boundary sign `c` (+1 for x/y, -1 for z), up to `order`.
fn static_laurent(c: f64, epsilon: f64, z0: f64, order: usize) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
    if order >= 4 {
        coeffs[4] += 1.0;
    }
    let four_z2 = 4.0 * z0 * z0;
    let lin = Complex64::new(0.0, 2.0 * c * epsilon);
    let cst = four_z2 - c * epsilon * epsilon;
    let mut n = 0usize;
    let mut geo = 1.0; // C(n+2, 2) (4 z0^2)^n
    loop {
        let m = 4 + 2 * n;
        if m > order {
            break;
        }
        let scale = -geo;
        coeffs[m] += scale * c;
        if m < order {
            coeffs[m + 1] += lin * scale;
        }
        if m + 2 <= order {
            coeffs[m + 2] += scale * cst;
        }
        n += 1;
        geo *= four_z2 * ((n + 2) * (n + 1)) as f64 / ((n + 1) * n) as f64;
    }
    coeffs
}

/// Static mirror correlator at a complex lag. `beta = inf` keeps only the
/// `k = 0` image.
pub(crate) fn static_thermal_at(
    lag: Complex64,
    z0: f64,
    beta: f64,
    epsilon: f64,
    policy: &ImageSumPolicy,
) -> Result<CorrelatorSample> {
    let norm = 1.0 / (PI * PI);
    let k0 = static_summand(lag, epsilon, z0);
    if beta.is_infinite() {
        let xy = k0[0] * norm;
        return Ok(CorrelatorSample {
            u: lag.re,
            epsilon,
            value: [xy, xy, k0[1] * norm],
            terms: 0,
            tail_bound: policy.tail_bound_reported.then_some(0.0),
        });
    }

    let reach = (lag - I * epsilon).norm() + 2.0 * z0;
    let explicit = |k_max: u64| -> ([Complex64; 2], f64) {
        let mut sum = k0;
        let mut scale = k0[0].norm() + k0[1].norm();
        for k in 1..=k_max {
            let shift = I * (k as f64 * beta);
            let up = static_summand(lag + shift, epsilon, z0);
            let down = static_summand(lag - shift, epsilon, z0);
            for j in 0..2 {
                sum[j] += up[j] + down[j];
            }
            scale += up[0].norm() + up[1].norm() + down[0].norm() + down[1].norm();
        }
        (sum, scale)
    };
    // |summand| <= 3 / |p|^4 once |p| > 4 z0, so the dropped pairs are below
    // 2 * 3 / (3 beta (K beta - |w|)^3)
    let raw_bound = |k_max: u64| -> f64 {
        let gap = k_max as f64 * beta - reach;
        if gap <= 0.0 {
            f64::INFINITY
        } else {
            2.0 / (beta * gap.powi(3))
        }
    };
    let resummed = |k_max: u64| -> Option<([Complex64; 2], f64)> {
        let rho = reach / ((k_max + 1) as f64 * beta);
        if rho >= 0.5 {
            return None;
        }
        let order = order_for_ratio(rho);
        let w = lag - I * epsilon;
        let (t_xy, b_xy) = laurent_tail(&static_laurent(1.0, epsilon, z0, order), w, beta, k_max);
        let (t_z, b_z) = laurent_tail(&static_laurent(-1.0, epsilon, z0, order), w, beta, k_max);
        Some(([t_xy, t_z], b_xy.max(b_z)))
    };

    let evaluate = |k_max: u64| -> ([Complex64; 2], f64, f64) {
        let (mut sum, scale) = explicit(k_max);
        let mut bound = raw_bound(k_max);
        if policy.asymptotic_tail {
            if let Some((tail, tail_bound)) = resummed(k_max) {
                sum[0] += tail[0];
                sum[1] += tail[1];
                bound = tail_bound;
            }
        }
        (sum, scale, bound)
    };

    let (sum, k_used, bound) = match policy.mode {
        TruncationMode::FixedTerms(k_max) => {
            let (sum, _, bound) = evaluate(k_max);
            (sum, k_max, bound)
        }
        TruncationMode::TruncateAtTolerance { tol, max_terms } => {
            let start = if policy.asymptotic_tail {
                ((4.0 * reach / beta).ceil() as u64).max(MIN_EXPLICIT_TERMS)
            } else {
                MIN_EXPLICIT_TERMS
            };
            let mut k_max = start.min(max_terms);
            loop {
                let (sum, scale, bound) = evaluate(k_max);
                if bound <= tol * scale {
                    break (sum, k_max, bound);
                }
                if k_max >= max_terms {
                    return Err(Error::ImageSumTruncation {
                        tol,
                        max_terms,
                        achieved: bound / scale,
                    });
                }
                k_max = (k_max * 2).min(max_terms);
            }
        }
    };

    let xy = sum[0] * norm;
    Ok(CorrelatorSample {
        u: lag.re,
        epsilon,
        value: [xy, xy, sum[1] * norm],
        terms: k_used,
        tail_bound: policy.tail_bound_reported.then_some(bound * norm),
    })
}

/// Field correlator of an atom at rest at height `z0` above the mirror in a
/// bath at inverse temperature `beta` (`inf` for the vacuum).
pub fn correlator_static_thermal(
    z0: f64,
    beta: f64,
    u: f64,
    epsilon: f64,
    policy: &ImageSumPolicy,
) -> Result<CorrelatorSample> {
    ensure_positive("z0", z0)?;
    ensure_positive("epsilon", epsilon)?;
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::invalid(
            "beta",
            format!("must be > 0 (or +inf), got {beta}"),
        ));
    }
    if !u.is_finite() {
        return Err(Error::invalid("u", "must be finite"));
    }
    policy.validate()?;
    static_thermal_at(Complex64::new(u, 0.0), z0, beta, epsilon, policy)
}

/// Free-space part `delta_ij / (pi^2 (u - i eps)^4)`, the `z0 -> inf` limit.
pub fn correlator_free_space(u: f64, epsilon: f64) -> Complex64 {
    let w = Complex64::new(u, -epsilon);
    (w * w * w * w).inv() / (PI * PI)
}

/// `sinh(x - i delta)` split as `e^|x| / 2 * t` for large `|x|`, returning
/// `(t, sinh(x) 2 e^-|x|)`.
#[inline]
fn scaled_sinh(x: f64, delta: f64) -> (Complex64, f64) {
    let y = x.abs();
    let sign = x.signum();
    let decay = (-2.0 * y).exp();
    let t = Complex64::from_polar(1.0, -sign * delta) - Complex64::from_polar(decay, sign * delta);
    (t, 1.0 - decay)
}

/// xx-component along the uniformly accelerated worldline at height `z0`.
pub fn correlator_accel_mirror_xx(a: f64, z0: f64, u: f64, epsilon: f64) -> Result<Complex64> {
    ensure_positive("a", a)?;
    ensure_positive("z0", z0)?;
    ensure_positive("epsilon", epsilon)?;
    if !u.is_finite() {
        return Err(Error::invalid("u", "must be finite"));
    }
    Ok(accel_xx_unchecked(a, z0, u, epsilon))
}

#[inline]
pub(crate) fn accel_xx_unchecked(a: f64, z0: f64, u: f64, epsilon: f64) -> Complex64 {
    let prefactor = a.powi(4) / (16.0 * PI * PI);
    let q = a * a * z0 * z0;
    let x = 0.5 * a * u;
    let delta = 0.5 * a * epsilon;
    if x.abs() < 20.0 {
        let s = Complex64::new(x, -delta).sinh();
        let s2 = s * s;
        let sr = x.sinh();
        let d = q - s2;
        prefactor * ((s2 * s2).inv() + (q + sr * sr) / (d * d * d))
    } else {
        // both terms carry a common e^{-2|x|}^2 factor
        let (t, r) = scaled_sinh(x, delta);
        let e_inv2 = 4.0 * (-2.0 * x.abs()).exp(); // 1 / (e^|x| / 2)^2
        let t2 = t * t;
        let d = q * e_inv2 - t2;
        prefactor * e_inv2 * e_inv2 * ((t2 * t2).inv() + (q * e_inv2 + r * r) / (d * d * d))
    }
}

/// Real-axis singular lags of the accelerated correlator at zero regulator:
/// `0` and `+-(2/a) asinh(a z0)`.
pub fn accel_pole_lags(a: f64, z0: f64) -> [f64; 3] {
    let us = 2.0 / a * (a * z0).asinh();
    [-us, 0.0, us]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn zero_temperature_u_zero_literal_substitution() {
        let eps: f64 = 0.1;
        let z0: f64 = 1.0;
        let s = correlator_static_thermal(z0, f64::INFINITY, 0.0, eps, &ImageSumPolicy::default())
            .unwrap();
        let w = Complex64::new(0.0, -eps);
        // unshifted boundary numerator u^2 + 4 z0^2 = 4 at u = 0
        let expected = (1.0 / eps.powi(4) - 4.0 / (w * w - 4.0).powi(3)) / (PI * PI);
        assert!(rel(s.value[0], expected) < 1e-14);
        assert_eq!(s.terms, 0);
    }

    #[test]
    fn large_distance_recovers_free_space() {
        for &u in &[0.3, 1.0, 2.5] {
            let s =
                correlator_static_thermal(1e4, f64::INFINITY, u, 0.01, &ImageSumPolicy::default())
                    .unwrap();
            let free = correlator_free_space(u, 0.01);
            for axis in Axis::ALL {
                assert!(rel(s.component(axis), free) < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_term_decays_as_inverse_fourth_power() {
        let (u, eps) = (0.8, 0.05);
        let boundary = |z0: f64| {
            let s =
                correlator_static_thermal(z0, f64::INFINITY, u, eps, &ImageSumPolicy::default())
                    .unwrap();
            (s.value[0] - correlator_free_space(u, eps)).norm()
        };
        let b10 = boundary(10.0);
        let b100 = boundary(100.0);
        // (u^2 + 4 z^2) / (u^2 - 4 z^2)^3 -> -1 / (16 z^4)
        let slope = (b100 / b10).log10();
        assert!((slope + 4.0).abs() < 0.01, "decay exponent {slope}");
        assert_relative_eq!(b100 * 16.0 * 1e8 * PI * PI, 1.0, max_relative = 1e-3);
    }

    #[test]
    fn hermiticity() {
        let policy = ImageSumPolicy::default();
        for &(z0, beta) in &[(0.7, 2.0), (0.3, 0.5), (2.0, f64::INFINITY)] {
            for &u in &[0.1, 0.9, 3.0] {
                let plus = correlator_static_thermal(z0, beta, u, 1e-2, &policy).unwrap();
                let minus = correlator_static_thermal(z0, beta, -u, 1e-2, &policy).unwrap();
                for axis in Axis::ALL {
                    assert!(rel(plus.component(axis).conj(), minus.component(axis)) < 1e-12);
                }
            }
        }
        for &u in &[0.2, 1.5, 30.0, 80.0] {
            let p = correlator_accel_mirror_xx(1.3, 0.6, u, 1e-2).unwrap();
            let m = correlator_accel_mirror_xx(1.3, 0.6, -u, 1e-2).unwrap();
            assert!((p.conj() - m).norm() <= 1e-12 * p.norm());
        }
    }

    #[test]
    fn image_pairs_are_conjugate_at_zero_regulator() {
        let (z0, beta) = (0.7, 2.0);
        for &u in &[0.2, 1.1] {
            for k in 1..5 {
                let shift = I * (k as f64 * beta);
                let up = static_summand(Complex64::new(u, 0.0) + shift, 0.0, z0);
                let down = static_summand(Complex64::new(u, 0.0) - shift, 0.0, z0);
                for j in 0..2 {
                    assert!((up[j].conj() - down[j]).norm() < 1e-14 * up[j].norm());
                }
            }
        }
    }

    #[test]
    fn kms_with_matched_regulator() {
        // G(u - i(beta - 2 eps)) = G(-u) holds exactly for the free part and
        // to O(eps) for the unshifted boundary numerator.
        let (z0, beta, eps) = (0.7, 2.0, 1e-7);
        let policy = ImageSumPolicy::default();
        for &u in &[0.3, 1.0, 2.2] {
            let shifted = static_thermal_at(
                Complex64::new(u, -(beta - 2.0 * eps)),
                z0,
                beta,
                eps,
                &policy,
            )
            .unwrap();
            let mirrored = correlator_static_thermal(z0, beta, -u, eps, &policy).unwrap();
            for axis in Axis::ALL {
                assert!(rel(shifted.component(axis), mirrored.component(axis)) < 1e-6);
            }
        }
    }

    #[test]
    fn resummed_tail_matches_long_explicit_sum() {
        let (z0, beta, eps) = (0.4, 0.5, 0.02);
        let k_max = 400_000u64;
        for &u in &[0.05, 0.9, 12.0] {
            let fast =
                correlator_static_thermal(z0, beta, u, eps, &ImageSumPolicy::default()).unwrap();
            // smallest images first
            let v = Complex64::new(u, 0.0);
            let mut slow = [Complex64::new(0.0, 0.0); 2];
            for k in (1..=k_max).rev() {
                let shift = I * (k as f64 * beta);
                let (up, down) = (
                    static_summand(v + shift, eps, z0),
                    static_summand(v - shift, eps, z0),
                );
                for j in 0..2 {
                    slow[j] += up[j] + down[j];
                }
            }
            let k0 = static_summand(v, eps, z0);
            let slow = [(slow[0] + k0[0]) / (PI * PI), (slow[1] + k0[1]) / (PI * PI)];
            let bound = 2.0 / (beta * (k_max as f64 * beta - u - 2.0 * z0).powi(3)) / (PI * PI);
            for (axis, j) in [(Axis::X, 0), (Axis::Z, 1)] {
                let diff = (fast.component(axis) - slow[j]).norm();
                assert!(
                    diff <= bound + 1e-14 * slow[j].norm(),
                    "u={u} {axis:?}: {diff} > {bound}"
                );
            }
        }
    }

    #[test]
    fn fixed_terms_bound_scales_as_inverse_cube() {
        let policy = |k| ImageSumPolicy::fixed(k);
        let b1 = correlator_static_thermal(0.5, 1.0, 0.3, 0.01, &policy(100))
            .unwrap()
            .tail_bound
            .unwrap();
        let b2 = correlator_static_thermal(0.5, 1.0, 0.3, 0.01, &policy(200))
            .unwrap()
            .tail_bound
            .unwrap();
        assert_relative_eq!(b1 / b2, 8.0, max_relative = 0.05);
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let policy = ImageSumPolicy {
            mode: TruncationMode::TruncateAtTolerance {
                tol: 1e-12,
                max_terms: 50,
            },
            tail_bound_reported: true,
            asymptotic_tail: false,
        };
        match correlator_static_thermal(0.5, 1.0, 0.3, 0.01, &policy) {
            Err(Error::ImageSumTruncation {
                max_terms,
                achieved,
                ..
            }) => {
                assert_eq!(max_terms, 50);
                assert!(achieved > 1e-12);
            }
            other => panic!("expected truncation failure, got {other:?}"),
        }
    }

    #[test]
    fn accelerated_small_a_matches_static_vacuum() {
        let (z0, eps) = (1.0, 1e-3);
        for i in 0..=10 {
            let u = 0.1 + 0.49 * i as f64;
            let acc = correlator_accel_mirror_xx(1e-4, z0, u, eps).unwrap();
            let stat =
                correlator_static_thermal(z0, f64::INFINITY, u, eps, &ImageSumPolicy::default())
                    .unwrap()
                    .value[0];
            assert!(rel(acc, stat) < 1e-6, "u={u}: {acc} vs {stat}");
        }
    }

    #[test]
    fn accelerated_large_lag_branch_is_continuous() {
        let (a, z0, eps) = (2.0, 0.7, 0.05);
        let below = accel_xx_unchecked(a, z0, 19.999_999 / a * 2.0, eps);
        let above = accel_xx_unchecked(a, z0, 20.000_001 / a * 2.0, eps);
        assert!(rel(below, above) < 1e-4);
        // direct evaluation at a lag where both branches are representable
        let u = 25.0;
        let direct = {
            let x = Complex64::new(0.5 * a * u, -0.5 * a * eps);
            let s = x.sinh();
            let q = a * a * z0 * z0;
            let sr = (0.5 * a * u).sinh();
            a.powi(4) / (16.0 * PI * PI)
                * ((s * s * s * s).inv() + (q + sr * sr) / (q - s * s).powi(3))
        };
        assert!(rel(accel_xx_unchecked(a, z0, u, eps), direct) < 1e-10);
        assert!(accel_xx_unchecked(a, z0, 5000.0, eps).is_finite());
    }

    #[test]
    fn accelerated_pole_locations() {
        let [m, zero, p] = accel_pole_lags(1.0, 1.0);
        assert_eq!(zero, 0.0);
        assert_relative_eq!(p, 2.0 * 1f64.asinh(), max_relative = 1e-15);
        assert_eq!(m, -p);
        // sinh^2(a u / 2) = a^2 z0^2 at the pole
        assert_relative_eq!((0.5 * p).sinh().powi(2), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn laurent_coefficients_reproduce_summand() {
        let (z0, eps) = (0.6, 0.03);
        let p = Complex64::new(7.0, 5.0);
        let v = p + I * eps;
        let direct = static_summand(v, eps, z0);
        for (j, c) in [1.0, -1.0].into_iter().enumerate() {
            let coeffs = static_laurent(c, eps, z0, 60);
            let series: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(m, cm)| cm * p.powi(-(m as i32)))
                .sum();
            assert!(rel(series, direct[j]) < 1e-13);
        }
    }
}
