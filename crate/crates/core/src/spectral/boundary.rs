//! Oscillating mirror corrections `f_i` to the emission and excitation rates.

use crate::error::{ensure_positive, Result};

/// Below this value of `2 omega0 z0` the static closed forms lose digits to
/// cancellation and the Maclaurin series takes over.
pub const STATIC_SERIES_THRESHOLD: f64 = 1e-2;
/// The accelerated series is used when both `2 omega0 z0` and `a z0` are
/// below this value.
pub const ACCEL_SERIES_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryVariant {
    Static { omega0: f64, z0: f64 },
    Accelerated { omega0: f64, z0: f64, a: f64 },
}

/// `f_x`, `f_y`, `f_z`. The accelerated variant only defines `f_x`; its `f_y`
/// and `f_z` are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFunctions {
    pub f_x: f64,
    pub f_y: f64,
    pub f_z: f64,
    pub variant: BoundaryVariant,
}

impl BoundaryFunctions {
    pub fn get(&self, axis: crate::domain::Axis) -> f64 {
        match axis {
            crate::domain::Axis::X => self.f_x,
            crate::domain::Axis::Y => self.f_y,
            crate::domain::Axis::Z => self.f_z,
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `(f_x, f_z)` as functions of `x = 2 omega0 z0`.
pub(crate) fn static_pair(x: f64) -> (f64, f64) {
    if x < STATIC_SERIES_THRESHOLD {
        let x2 = x * x;
        let mut fx = 0.0;
        let mut fz = 0.0;
        let mut pow = 1.0;
        for m in 1..=6u32 {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            let denom = factorial(2 * m + 1);
            fx += sign * 6.0 * (m * m) as f64 * pow / denom;
            fz -= sign * 6.0 * m as f64 * pow / denom;
            pow *= x2;
        }
        return (fx, fz);
    }
    let (s, c) = x.sin_cos();
    let x3 = x * x * x;
    let fx = 1.5 / x3 * (x * c + (x * x - 1.0) * s);
    let fz = 3.0 / x3 * (x * c - s);
    (fx, fz)
}

pub fn f_static(omega0: f64, z0: f64) -> Result<BoundaryFunctions> {
    ensure_positive("omega0", omega0)?;
    ensure_positive("z0", z0)?;
    let (fx, fz) = static_pair(2.0 * omega0 * z0);
    Ok(BoundaryFunctions {
        f_x: fx,
        f_y: fx,
        f_z: fz,
        variant: BoundaryVariant::Static { omega0, z0 },
    })
}

// Coefficients of x^{2k} in the small-(x, s) expansion, as polynomials in
// r^2 with r = s / x = a / (2 omega0), lowest power first.
const ACCEL_SERIES: [&[f64]; 5] = [
    &[1.0, 4.0],
    &[-1.0 / 5.0, -4.0, -64.0 / 5.0],
    &[3.0 / 280.0, 3.0 / 5.0, 42.0 / 5.0, 864.0 / 35.0],
    &[
        -1.0 / 3780.0,
        -2.0 / 63.0,
        -52.0 / 45.0,
        -2624.0 / 189.0,
        -4096.0 / 105.0,
    ],
    &[
        1.0 / 266_112.0,
        5.0 / 6048.0,
        31.0 / 504.0,
        695.0 / 378.0,
        3832.0 / 189.0,
        12800.0 / 231.0,
    ],
];

/// Accelerated `f_x` as a function of `x = 2 omega0 z0` and `s = a z0`.
pub(crate) fn accel_fx(x: f64, s: f64) -> f64 {
    if s == 0.0 {
        return static_pair(x).0;
    }
    if x < ACCEL_SERIES_THRESHOLD && s < ACCEL_SERIES_THRESHOLD {
        // Sum by monomials x^{2k - 2j} s^{2j} so nothing overflows when x << s.
        let x2 = x * x;
        let s2 = s * s;
        let mut total = 0.0;
        for (k, poly) in ACCEL_SERIES.iter().enumerate().rev() {
            let mut term = 0.0;
            for (j, c) in poly.iter().enumerate() {
                let power = k as i32 - j as i32;
                term += c * s2.powi(j as i32) * x2.powi(power);
            }
            total += term;
        }
        return total;
    }
    let s2 = s * s;
    let q = 1.0 + s2;
    let phase = x * s.asinh() / s;
    let (sin_p, cos_p) = phase.sin_cos();
    let p_coef = (x * x * q - 2.0 * s2 * (1.0 + 2.0 * s2) - 1.0) / (q * q * q.sqrt());
    let q_coef = x * (1.0 + 4.0 * s2) / (q * q);
    1.5 / (x * x * x) * (p_coef * sin_p + q_coef * cos_p)
}

/// Mirror correction for an x-polarized atom accelerating parallel to the
/// mirror; `a = 0` reduces to [`f_static`].
pub fn f_accelerated(omega0: f64, z0: f64, a: f64) -> Result<BoundaryFunctions> {
    ensure_positive("omega0", omega0)?;
    ensure_positive("z0", z0)?;
    if a.is_nan() || a < 0.0 {
        return Err(crate::error::Error::invalid(
            "a",
            format!("must be >= 0, got {a}"),
        ));
    }
    if a == 0.0 {
        return f_static(omega0, z0);
    }
    Ok(BoundaryFunctions {
        f_x: accel_fx(2.0 * omega0 * z0, a * z0),
        f_y: f64::NAN,
        f_z: f64::NAN,
        variant: BoundaryVariant::Accelerated { omega0, z0, a },
    })
}
