//! Four-potential two-point function with a plane mirror at z = 0 and the
//! independent finite-difference route to the field correlator.
//!
//! `<A^mu(x) A^nu(x')> = (1/4 pi^2) sum_k [ eta^{mu nu} / D_-  -  (eta^{mu nu} + 2 n^mu n^nu) / D_+ ]`
//! with `D_(-/+) = (t - t' + i k beta - i eps)^2 - (x-x')^2 - (y-y')^2 - (z -/+ z')^2`
//! and `n = (0, 0, 0, 1)`. The field correlator follows from
//! `<E_i E_j> = d_0 d'_0 <A_i A_j> + d_i d'_j <A_0 A_0>`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{laurent_tail, order_for_ratio, I, MIN_EXPLICIT_TERMS};
use crate::domain::{Axis, FourVector};
use crate::error::{ensure_positive, Error, Result};

/// Diagonal components of the lower-index potential correlator; the
/// off-diagonal ones vanish identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialComponent {
    Time,
    Space(Axis),
}

/// `sum_k 1 / ((dt + i k beta - i eps)^2 - r2)`.
fn image_sum(dt: f64, r2: f64, beta: f64, epsilon: f64) -> Complex64 {
    let w = Complex64::new(dt, -epsilon);
    let term = |p: Complex64| (p * p - r2).inv();
    let mut sum = term(w);
    if beta.is_infinite() {
        return sum;
    }
    let r = r2.sqrt();
    let reach = w.norm() + r;
    let k_max = ((4.0 * reach / beta).ceil() as u64).max(MIN_EXPLICIT_TERMS);
    for k in 1..=k_max {
        let shift = I * (k as f64 * beta);
        sum += term(w + shift) + term(w - shift);
    }
    let rho = reach / ((k_max + 1) as f64 * beta);
    let order = order_for_ratio(rho);
    // 1 / (p^2 - r^2) = sum_n r^{2n} p^{-2-2n}
    let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
    let mut r_pow = 1.0;
    let mut m = 2;
    while m <= order {
        coeffs[m] = Complex64::new(r_pow, 0.0);
        r_pow *= r2;
        m += 2;
    }
    sum + laurent_tail(&coeffs, w, beta, k_max).0
}

fn separations(x: &FourVector, xp: &FourVector) -> (f64, f64, f64) {
    let dt = x.t - xp.t;
    let dx = x.x - xp.x;
    let dy = x.y - xp.y;
    let transverse = dx * dx + dy * dy;
    let r2_direct = transverse + (x.z - xp.z).powi(2);
    let r2_image = transverse + (x.z + xp.z).powi(2);
    (dt, r2_direct, r2_image)
}

/// Lower-index `<A_mu(x) A_mu(x')>` at inverse temperature `beta`.
pub fn potential_two_point(
    beta: f64,
    x: &FourVector,
    xp: &FourVector,
    component: PotentialComponent,
    epsilon: f64,
) -> Complex64 {
    let (dt, r2_direct, r2_image) = separations(x, xp);
    let direct = image_sum(dt, r2_direct, beta, epsilon);
    let image = image_sum(dt, r2_image, beta, epsilon);
    // eta^{mu mu} for the direct term, eta^{mu mu} + 2 n^mu n^mu for the image
    let (eta, eta_image) = match component {
        PotentialComponent::Time => (1.0, 1.0),
        PotentialComponent::Space(Axis::Z) => (-1.0, 1.0),
        PotentialComponent::Space(_) => (-1.0, -1.0),
    };
    (direct * eta - image * eta_image) / (4.0 * PI * PI)
}

#[derive(Debug, Clone, Copy)]
enum Coord {
    Time,
    Space(Axis),
}

fn shifted(p: &FourVector, coord: Coord, by: f64) -> FourVector {
    match coord {
        Coord::Time => FourVector { t: p.t + by, ..*p },
        Coord::Space(axis) => p.with_spatial(axis, p.spatial(axis) + by),
    }
}

// sixth-order central first derivative: offsets 1, 2, 3
const STENCIL: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

fn mixed_derivative<F>(
    f: &F,
    x: &FourVector,
    xp: &FourVector,
    a: Coord,
    b: Coord,
    h: f64,
) -> Complex64
where
    F: Fn(&FourVector, &FourVector) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, cm) in STENCIL.iter().enumerate() {
        for (n, cn) in STENCIL.iter().enumerate() {
            let hm = (m + 1) as f64 * h;
            let hn = (n + 1) as f64 * h;
            let pp = f(&shifted(x, a, hm), &shifted(xp, b, hn));
            let pm = f(&shifted(x, a, hm), &shifted(xp, b, -hn));
            let mp = f(&shifted(x, a, -hm), &shifted(xp, b, hn));
            let mm = f(&shifted(x, a, -hm), &shifted(xp, b, -hn));
            acc += (pp - pm - mp + mm) * (cm * cn);
        }
    }
    acc / (h * h)
}

const MAX_HALVINGS: usize = 6;
const SETTLE_TOL: f64 = 1e-7;

/// `<E_i(x) E_j(x')>` by sixth-order central differences of the potential
/// correlator, with step halving until successive estimates agree.
///
/// The regulator shifts the coordinate-time difference, so along an
/// accelerated worldline this agrees with the proper-time regularized
/// closed form only as `epsilon -> 0`.
pub fn correlator_from_potential(
    beta: f64,
    x: &FourVector,
    xp: &FourVector,
    component: (Axis, Axis),
    epsilon: f64,
) -> Result<Complex64> {
    ensure_positive("epsilon", epsilon)?;
    ensure_positive("z", x.z)?;
    ensure_positive("z'", xp.z)?;
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::invalid(
            "beta",
            format!("must be > 0 (or +inf), got {beta}"),
        ));
    }
    let (i, j) = component;

    let (dt, r2_direct, r2_image) = separations(x, xp);
    let w = Complex64::new(dt, -epsilon);
    let scale = [
        (w * w - r2_direct).norm().sqrt(),
        (w * w - r2_image).norm().sqrt(),
        x.z,
        xp.z,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let magnitude = 1.0 / (PI * PI * scale.powi(4));

    let time_part = |p: &FourVector, q: &FourVector| {
        if i == j {
            potential_two_point(beta, p, q, PotentialComponent::Space(i), epsilon)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let space_part = |p: &FourVector, q: &FourVector| {
        potential_two_point(beta, p, q, PotentialComponent::Time, epsilon)
    };
    let estimate = |h: f64| {
        mixed_derivative(&time_part, x, xp, Coord::Time, Coord::Time, h)
            + mixed_derivative(&space_part, x, xp, Coord::Space(i), Coord::Space(j), h)
    };

    let coord_scale = [x.t, x.x, x.y, x.z, xp.t, xp.x, xp.y, xp.z]
        .into_iter()
        .fold(1.0f64, |m, c| m.max(c.abs()));
    let mut h = 1e-2 * scale;
    let mut steps = vec![h];
    let mut previous = estimate(h);
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        h *= 0.5;
        if h < 1e-13 * coord_scale {
            break;
        }
        steps.push(h);
        let current = estimate(h);
        last_change = (current - previous).norm() / current.norm().max(magnitude);
        if last_change <= SETTLE_TOL {
            return Ok((current * 64.0 - previous) / 63.0);
        }
        previous = current;
    }
    Err(Error::StepUnderflow { steps, last_change })
}
