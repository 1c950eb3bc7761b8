//! Tail of imaginary-time image sums.
//!
//! For a summand with a Laurent expansion `F(p) = sum_m c_m p^-m` the pair
//! `F(w + i k beta) + F(w - i k beta)` expands in powers of `w / (k beta)`.
//! Summing over `k > K` turns each power into a Hurwitz-type tail
//! `sum_{k>K} k^-s`, so the whole remainder of the image sum costs O(M^2)
//! operations instead of the millions of explicit terms a `k^-4` (or `k^-2`)
//! series needs.

use num_complex::Complex64;

// B_2 .. B_16
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// `sum_{k > k_max} k^-s` for `s >= 2`.
pub(crate) fn zeta_tail(s: u32, k_max: u64) -> f64 {
    debug_assert!(s >= 2);
    let sf = s as f64;
    let start = k_max + 1;
    // a few explicit terms keep the Euler-Maclaurin remainder tiny even when s ~ start
    let direct = 8u64;
    let mut sum = 0.0;
    for k in start..start + direct {
        sum += (k as f64).powi(-(s as i32));
    }
    let n = (start + direct) as f64;
    let n_pow = n.powf(-sf);
    sum += n * n_pow / (sf - 1.0) + 0.5 * n_pow;

    // rising factorial s (s+1) ... (s + 2j - 2) / (2j)!
    let mut rising = sf;
    let mut fact = 2.0;
    let mut n_term = n_pow / n;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let j = j + 1;
        let term = b / fact * rising * n_term;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let two_j = 2.0 * j as f64;
        rising *= (sf + two_j - 1.0) * (sf + two_j);
        fact *= (two_j + 1.0) * (two_j + 2.0);
        n_term /= n * n;
    }
    sum
}

/// Number of Laurent orders needed for a remainder below ~1e-17 when the
/// expansion ratio is `rho`.
pub(crate) fn order_for_ratio(rho: f64) -> usize {
    let m = (17.0 * std::f64::consts::LN_10 / (1.0 / rho).ln()).ceil() as usize;
    let m = m.clamp(8, 80);
    m + (m % 2)
}

/// `sum_{|k| > k_max} F(w + i k beta)` given Laurent coefficients `coeffs[m]`
/// of `F` in `1/p`. Returns the value and an estimate of the dropped orders.
pub(crate) fn laurent_tail(
    coeffs: &[Complex64],
    w: Complex64,
    beta: f64,
    k_max: u64,
) -> (Complex64, f64) {
    let order = coeffs.len() - 1;
    let mut w_pow = Vec::with_capacity(order + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=order {
        w_pow.push(acc);
        acc *= w;
    }

    let mut total = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    let mut binom = vec![0.0f64; order + 1];
    let mut s = 2;
    while s <= order {
        // binom[m - 1] = C(s - 1, m - 1)
        binom[0] = 1.0;
        for i in 1..s {
            binom[i] = binom[i - 1] * (s - i) as f64 / i as f64;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for m in 1..=s {
            let c = coeffs[m];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let j = s - m;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            inner += c * w_pow[j] * (sign * binom[m - 1]);
        }
        let sign_s = if (s / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let term = inner * (2.0 * sign_s * beta.powi(-(s as i32)) * zeta_tail(s as u32, k_max));
        total += term;
        last = term.norm();
        s += 2;
    }
    (total, 2.0 * last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_tail_matches_direct_summation() {
        for &s in &[2u32, 3, 4, 7, 12, 30] {
            for &k in &[0u64, 5, 32, 100] {
                let direct: f64 = ((k + 1)..(k + 2_000_000))
                    .rev()
                    .map(|j| (j as f64).powi(-(s as i32)))
                    .sum::<f64>()
                    + (k as f64 + 2_000_000.0 - 0.5).powi(1 - s as i32) / (s as f64 - 1.0);
                let got = zeta_tail(s, k);
                assert!(
                    ((got - direct) / direct).abs() < 1e-10,
                    "s={s} k={k}: {got} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn laurent_tail_of_inverse_fourth_power() {
        let beta = 0.7;
        let w = Complex64::new(1.3, -0.05);
        let k_max = 40;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 31];
        coeffs[4] = Complex64::new(1.0, 0.0);
        let (tail, bound) = laurent_tail(&coeffs, w, beta, k_max);

        let mut direct = Complex64::new(0.0, 0.0);
        for k in ((k_max + 1)..200_000).rev() {
            let ik = Complex64::new(0.0, k as f64 * beta);
            direct += (w + ik).powi(-4) + (w - ik).powi(-4);
        }
        // remaining k > 2e5 contributes ~ 2 / (3 beta^4 K^3) ~ 1e-16
        assert!((tail - direct).norm() < 1e-14, "{tail} vs {direct}");
        assert!(bound < 1e-15);
    }
}
