//! Globally adaptive 21-point Gauss-Kronrod quadrature for vector-valued
//! complex integrands on a set of initial panels.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

// Kronrod nodes (positive half, centre last) and weights; Gauss weights for
// the embedded 10-point rule at the odd Kronrod nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_634_576,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [Complex64; N],
    error: f64,
    abs_sum: f64,
    abs: [f64; N],
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

// Rounding is accounted for separately through `abs_integral`, so the
// usual `50 eps |f|` floor is only used to stop refinement.
fn rescale_error(err: f64, res_asc: f64) -> f64 {
    if res_asc != 0.0 && err != 0.0 {
        let ratio = (200.0 * err / res_asc).powf(1.5);
        if ratio < 1.0 {
            return res_asc * ratio;
        }
        return res_asc;
    }
    err
}

fn gk21<const N: usize, F>(f: &F, a: f64, b: f64) -> Panel<N>
where
    F: Fn(f64) -> [Complex64; N],
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let zero = Complex64::new(0.0, 0.0);

    let f_centre = f(centre);
    let mut kronrod = [zero; N];
    let mut gauss = [zero; N];
    let mut res_abs = [0.0f64; N];
    let mut samples: Vec<([Complex64; N], [Complex64; N], f64)> = Vec::with_capacity(10);
    for c in 0..N {
        kronrod[c] = f_centre[c] * WGK[10];
        res_abs[c] = f_centre[c].norm() * WGK[10];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let lo = f(centre - dx);
        let hi = f(centre + dx);
        for c in 0..N {
            let pair = lo[c] + hi[c];
            kronrod[c] += pair * WGK[j];
            res_abs[c] += (lo[c].norm() + hi[c].norm()) * WGK[j];
            if j % 2 == 1 {
                gauss[c] += pair * WG[j / 2];
            }
        }
        samples.push((lo, hi, WGK[j]));
    }

    let mut value = [zero; N];
    let mut error = 0.0f64;
    let mut abs_total = 0.0;
    let mut abs = [0.0; N];
    for c in 0..N {
        let mean = kronrod[c] * 0.5;
        let mut res_asc = WGK[10] * (f_centre[c] - mean).norm();
        for (lo, hi, w) in &samples {
            res_asc += w * ((lo[c] - mean).norm() + (hi[c] - mean).norm());
        }
        let scale = half.abs();
        let err = rescale_error(((kronrod[c] - gauss[c]) * half).norm(), res_asc * scale);
        value[c] = kronrod[c] * half;
        error = error.max(err);
        abs[c] = res_abs[c] * scale;
        abs_total += abs[c];
    }
    Panel {
        a,
        b,
        value,
        error,
        abs_sum: abs_total,
        abs,
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureOutcome<const N: usize> {
    pub value: [Complex64; N],
    /// Sum of per-panel truncation estimates (largest component per panel),
    /// excluding rounding.
    pub error: f64,
    /// Quadrature of `|f_c|` per component, the scale for rounding error.
    pub abs_integral: [f64; N],
    pub panels: usize,
    pub converged: bool,
}

/// Integrate over `[breaks[0], breaks.last()]` starting from the panels
/// delimited by `breaks`, bisecting the worst panel until the summed error
/// estimate drops below `tol_abs` or `max_panels` is reached.
pub fn integrate<const N: usize, F>(
    f: F,
    breaks: &[f64],
    tol_abs: f64,
    max_panels: usize,
) -> QuadratureOutcome<N>
where
    F: Fn(f64) -> [Complex64; N],
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut heap: BinaryHeap<Panel<N>> = breaks.windows(2).map(|w| gk21(&f, w[0], w[1])).collect();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    let mut converged = error <= tol_abs;

    while !converged && heap.len() < max_panels {
        let worst = heap.pop().expect("non-empty");
        let floor = 50.0 * f64::EPSILON * worst.abs_sum;
        let mid = 0.5 * (worst.a + worst.b);
        if worst.error <= floor || mid <= worst.a || mid >= worst.b {
            // rounding-limited; nothing left to gain here
            heap.push(worst);
            break;
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        converged = error <= tol_abs;
    }

    // deterministic summation order
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let zero = Complex64::new(0.0, 0.0);
    let mut value = [zero; N];
    let mut error = 0.0;
    let mut abs_integral = [0.0; N];
    for p in &panels {
        for c in 0..N {
            value[c] += p.value[c];
            abs_integral[c] += p.abs[c];
        }
        error += p.error;
    }
    QuadratureOutcome {
        value,
        error,
        abs_integral,
        panels: panels.len(),
        converged: error <= tol_abs,
    }
}
