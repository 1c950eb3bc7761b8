//! Built-in property suite behind `--verify`.

use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;

use super::config::{MethodChoice, RunConfig};
use super::run::run;
use super::table;
use crate::domain::{trajectory_point, AtomSpec, Axis, InitialState, Scenario};
use crate::dynamics::{
    analytic_relaxation, excited_population, integrate_energy, monte_carlo_relaxation,
    MonteCarloOptions,
};
use crate::rates::{
    energy_rates, equivalence_check, polarization_report, spectral_rates, RateMethod, SpectralRates,
};
use crate::spectral::{
    f_accelerated, f_static, fourier_oracle, OracleControls, ACCEL_SERIES_THRESHOLD,
    STATIC_SERIES_THRESHOLD,
};
use crate::wightman::{
    correlator_accel_mirror_xx, correlator_from_potential, correlator_static_thermal,
    ImageSumPolicy,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn within(what: &str, err: f64, tol: f64) -> Outcome {
    let msg = format!("{what}: worst {err:.3e} (tol {tol:.0e})");
    if err <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn e<T>(r: crate::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn proper_time_normalization() -> Outcome {
    let h = 1e-4;
    let mut worst = 0.0f64;
    for s in [
        Scenario::static_mirror(0.7, 2.0).unwrap(),
        Scenario::accelerated(1.3, 0.7).unwrap(),
        Scenario::accelerated(0.2, 3.0).unwrap(),
    ] {
        for tau in [-2.0, 0.0, 0.5, 3.0] {
            let d = trajectory_point(&s, tau + h).interval(&trajectory_point(&s, tau - h));
            worst = worst.max((d / (4.0 * h * h) - 1.0).abs());
        }
    }
    within("|dx/dtau|^2 - 1", worst, 1e-6)
}

fn trajectory_stationarity() -> Outcome {
    let s = Scenario::accelerated(0.9, 1.1).unwrap();
    let mut worst = 0.0f64;
    for u in [0.3, 1.0, 4.0] {
        let base = trajectory_point(&s, u).interval(&trajectory_point(&s, 0.0));
        for t0 in [-3.0, 2.0, 5.0] {
            let shifted = trajectory_point(&s, t0 + u).interval(&trajectory_point(&s, t0));
            worst = worst.max(rel(base, shifted));
        }
    }
    within("interval(t0 + u, t0) against interval(u, 0)", worst, 1e-10)
}

fn correlator_hermiticity() -> Outcome {
    let policy = ImageSumPolicy::default();
    let mut worst = 0.0f64;
    for &(z0, beta) in &[(0.5, f64::INFINITY), (1.2, 2.0), (0.3, 0.7)] {
        for u in [0.4, 1.7, 6.0] {
            let p = e(correlator_static_thermal(z0, beta, u, 0.05, &policy))?;
            let m = e(correlator_static_thermal(z0, beta, -u, 0.05, &policy))?;
            for axis in Axis::ALL {
                worst = worst.max(crel(p.component(axis).conj(), m.component(axis)));
            }
        }
    }
    for u in [0.4, 1.7, 6.0] {
        let p = e(correlator_accel_mirror_xx(1.1, 0.8, u, 0.05))?;
        let m = e(correlator_accel_mirror_xx(1.1, 0.8, -u, 0.05))?;
        worst = worst.max(crel(p.conj(), m));
    }
    within("G(-u) against conj G(u)", worst, 1e-12)
}

fn correlator_from_potential_agrees() -> Outcome {
    let policy = ImageSumPolicy::default();
    // the two regulator schemes agree only as eps -> 0
    let (z0, beta, eps) = (0.8, 3.0, 1e-9);
    let s = Scenario::static_mirror(z0, beta).unwrap();
    let mut worst = 0.0f64;
    for u in [0.3, 1.0, 2.5] {
        let x = trajectory_point(&s, u);
        let xp = trajectory_point(&s, 0.0);
        let direct = e(correlator_static_thermal(z0, beta, u, eps, &policy))?;
        for axis in Axis::ALL {
            let fd = e(correlator_from_potential(beta, &x, &xp, (axis, axis), eps))?;
            worst = worst.max(crel(fd, direct.component(axis)));
        }
    }
    let acc = Scenario::accelerated(1.0, 1.0).unwrap();
    for u in [0.4, 1.5] {
        let x = trajectory_point(&acc, u + 0.6);
        let xp = trajectory_point(&acc, 0.6);
        let fd = e(correlator_from_potential(
            f64::INFINITY,
            &x,
            &xp,
            (Axis::X, Axis::X),
            1e-10,
        ))?;
        worst = worst.max(crel(fd, e(correlator_accel_mirror_xx(1.0, 1.0, u, 1e-10))?));
    }
    within("field correlator from the potential", worst, 1e-6)
}

fn accel_small_a_limit() -> Outcome {
    let policy = ImageSumPolicy::default();
    let mut worst = 0.0f64;
    for u in [0.1, 1.0, 5.0] {
        let acc = e(correlator_accel_mirror_xx(1e-4, 0.9, u, 0.05))?;
        let stat = e(correlator_static_thermal(
            0.9,
            f64::INFINITY,
            u,
            0.05,
            &policy,
        ))?
        .component(Axis::X);
        worst = worst.max(crel(acc, stat));
    }
    within(
        "accelerated xx at a = 1e-4 against static T = 0",
        worst,
        1e-6,
    )
}

fn boundary_series_consistency() -> Outcome {
    let mut worst = 0.0f64;
    let x = STATIC_SERIES_THRESHOLD;
    let lo = e(f_static(1.0, 0.5 * x * (1.0 - 1e-9)))?;
    let hi = e(f_static(1.0, 0.5 * x * (1.0 + 1e-9)))?;
    worst = worst.max(rel(lo.f_x, hi.f_x)).max(rel(lo.f_z, hi.f_z));
    let xa = ACCEL_SERIES_THRESHOLD;
    for a in [1e-3, 5e-3] {
        let z0 = 0.5 * xa;
        let lo = e(f_accelerated(1.0, z0 * (1.0 - 1e-9), a))?.f_x;
        let hi = e(f_accelerated(1.0, z0 * (1.0 + 1e-9), a))?.f_x;
        worst = worst.max(rel(lo, hi));
    }
    within("relative jump across the series switch", worst, 1e-10)
}

fn boundary_bounded_and_limits() -> Outcome {
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..40 {
        let z0 = 0.01 * 1.25f64.powi(i);
        let f = e(f_static(1.0, z0))?;
        worst_excess = worst_excess.max(f.f_x.abs() - 1.0).max(f.f_z.abs() - 1.0);
    }
    if worst_excess > 1e-12 {
        return Err(format!("|f| exceeds 1 by {worst_excess:.3e}"));
    }
    let near = e(f_static(1.0, 0.5e-4))?;
    let far = e(f_static(1.0, 500.0))?;
    let lim = (near.f_x - 1.0).abs().max((near.f_z + 1.0).abs());
    let decay = far.f_x.abs().max(far.f_z.abs());
    if lim > 1e-6 || decay > 1e-2 {
        return Err(format!("contact error {lim:.3e}, far value {decay:.3e}"));
    }
    Ok(format!(
        "static |f| <= 1 on the grid, contact error {lim:.1e}, |f| at 500 = {decay:.1e}"
    ))
}

fn boundary_continuity_in_a() -> Outcome {
    let mut worst = 0.0f64;
    for z0 in [0.05, 0.5, 2.0, 7.0] {
        let s = e(f_static(1.0, z0))?.f_x;
        let acc = e(f_accelerated(1.0, z0, 1e-4))?.f_x;
        worst = worst.max((s - acc).abs());
    }
    within("f_x(a = 1e-4) against static f_x", worst, 1e-4)
}

fn oracle_kms() -> Outcome {
    let controls = OracleControls::default();
    let mut worst = 0.0f64;
    for (s, atom) in [
        (
            Scenario::static_mirror(0.9, 2.0).unwrap(),
            AtomSpec::isotropic(1.0, 1.0).unwrap(),
        ),
        (
            Scenario::accelerated(2.0, 1.0).unwrap(),
            AtomSpec::polarized(Axis::X, 1.0, 1.0).unwrap(),
        ),
    ] {
        let down = e(fourier_oracle(&s, &atom, 1.0, &controls))?;
        let up = e(fourier_oracle(&s, &atom, -1.0, &controls))?;
        let factor = (-s.effective_beta()).exp();
        for (d, u) in down.iter().zip(&up) {
            if d.value != 0.0 {
                worst = worst.max(rel(u.value, factor * d.value));
            }
        }
    }
    within("G(-w0) against exp(-beta w0) G(w0)", worst, 1e-6)
}

fn oracle_agrees_with_closed_form() -> Outcome {
    let controls = OracleControls::default();
    let cases = [
        (
            Scenario::StaticFreeSpace,
            AtomSpec::isotropic(1.0, 1.0).unwrap(),
        ),
        (
            Scenario::static_mirror(0.4, f64::INFINITY).unwrap(),
            AtomSpec::isotropic(1.0, 1.0).unwrap(),
        ),
        (
            Scenario::static_mirror(2.0, 1.5).unwrap(),
            AtomSpec::new(1.0, 1.0, [0.2, 0.3, 0.5]).unwrap(),
        ),
        (
            Scenario::accelerated(0.5, 0.6).unwrap(),
            AtomSpec::polarized(Axis::X, 1.0, 1.0).unwrap(),
        ),
        (
            Scenario::accelerated(2.5, 3.0).unwrap(),
            AtomSpec::polarized(Axis::X, 1.0, 1.0).unwrap(),
        ),
    ];
    let mut worst = 0.0f64;
    for (s, atom) in cases {
        let c = e(spectral_rates(&s, &atom, &RateMethod::ClosedForm))?;
        let o = e(spectral_rates(
            &s,
            &atom,
            &RateMethod::Oracle(controls.clone()),
        ))?;
        for (cv, ov, err) in [
            (c.g_plus, o.g_plus, o.g_plus_error),
            (c.g_minus, o.g_minus, o.g_minus_error),
        ] {
            let tol = (controls.tol_rel * cv.abs()).max(err);
            worst = worst.max((cv - ov).abs() / tol.max(f64::MIN_POSITIVE));
        }
        if o.g_plus < -o.g_plus_error || o.g_minus < -o.g_minus_error {
            return Err(format!("negative oracle rate at {s}"));
        }
    }
    within(
        "|closed - oracle| / max(tol_rel |closed|, achieved_error)",
        worst,
        1.0,
    )
}

fn detailed_balance() -> Outcome {
    let iso = AtomSpec::isotropic(1.0, 1.0).unwrap();
    let x = AtomSpec::polarized(Axis::X, 1.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for (z0, beta) in [(0.3, 0.5), (1.0, 2.0), (4.0, 10.0)] {
        let sr = e(spectral_rates(
            &Scenario::static_mirror(z0, beta).unwrap(),
            &iso,
            &RateMethod::ClosedForm,
        ))?;
        worst = worst.max(rel(sr.a_up / sr.a_down, (-beta).exp()));
    }
    for (a, z0) in [(0.3, 0.5), (1.0, 1.0), (3.0, 4.0)] {
        let sr = e(spectral_rates(
            &Scenario::accelerated(a, z0).unwrap(),
            &x,
            &RateMethod::ClosedForm,
        ))?;
        worst = worst.max(rel(
            sr.a_up / sr.a_down,
            (-2.0 * std::f64::consts::PI / a).exp(),
        ));
    }
    within("a_up / a_down against the Boltzmann factor", worst, 1e-12)
}

fn decomposition() -> Outcome {
    let atom = AtomSpec::isotropic(1.0, 1.0).unwrap();
    for (z0, beta) in [(0.2, f64::INFINITY), (1.0, 1.0), (5.0, 0.5)] {
        let sr = e(spectral_rates(
            &Scenario::static_mirror(z0, beta).unwrap(),
            &atom,
            &RateMethod::ClosedForm,
        ))?;
        let r = energy_rates(&sr, 1.0);
        if r.vf_excited + r.rr_any_state != r.total_excited
            || r.vf_ground + r.rr_any_state != r.total_ground
        {
            return Err(format!(
                "vf + rr differs from total at z0 = {z0}, beta = {beta}"
            ));
        }
        if r.total_excited > 0.0 || r.total_ground < 0.0 {
            return Err(format!("sign violation at z0 = {z0}, beta = {beta}"));
        }
    }
    Ok("vf + rr == total exactly, signs as expected".into())
}

fn polarization_ratios() -> Outcome {
    let cases = [
        (AtomSpec::isotropic(1.0, 1.0).unwrap(), 2.0 / 3.0),
        (AtomSpec::polarized(Axis::Z, 1.0, 1.0).unwrap(), 2.0),
        (AtomSpec::new(1.0, 1.0, [0.5, 0.5, 0.0]).unwrap(), 0.0),
    ];
    let worst = cases
        .iter()
        .map(|(a, want)| (polarization_report(a).ratio - want).abs())
        .fold(0.0, f64::max);
    within("contact ratio", worst, 1e-12)
}

fn non_equivalence() -> Outcome {
    let r = e(equivalence_check(1.0, 1.0, 1.0))?;
    let inf = e(equivalence_check(1.0, f64::INFINITY, 1.7))?;
    if !r.is_nonzero(1e-3) || inf.difference != 1.7 * 1.7 {
        return Err(format!(
            "difference {} at z0 = 1, {} without mirror",
            r.difference, inf.difference
        ));
    }
    Ok(format!("difference at (1, 1, 1) = {:.6}", r.difference))
}

fn relaxation_consistency() -> Outcome {
    let sr = SpectralRates::new(0.8, 0.3).unwrap();
    let times: Vec<f64> = (0..20).map(|k| 0.25 * k as f64).collect();
    let mut worst = 0.0f64;
    for init in [
        InitialState::Excited,
        InitialState::Ground,
        InitialState::Mixed {
            excited_fraction: 0.3,
        },
    ] {
        let curve = e(analytic_relaxation(&sr, 2.0, init, &times))?;
        let pop = e(excited_population(&sr, init, &times))?;
        for (k, &t) in times.iter().enumerate() {
            worst = worst.max((curve.energy[k] - 2.0 * (pop[k] - 0.5)).abs());
            let rk4 = e(integrate_energy(&sr, 2.0, init.energy(2.0), t, 1e-3))?;
            worst = worst.max((rk4 - curve.energy[k]).abs());
            if curve.energy[k].abs() > 1.0 + 1e-15 {
                return Err(format!("energy {} outside [-w0/2, w0/2]", curve.energy[k]));
            }
        }
    }
    within("population form, energy form and RK4", worst, 1e-9)
}

fn monte_carlo_scaling() -> Outcome {
    let sr = SpectralRates::new(1.0, 0.4).unwrap();
    let times: Vec<f64> = (1..=10).map(|k| 0.3 * k as f64).collect();
    let exact = e(analytic_relaxation(&sr, 1.0, InitialState::Excited, &times))?;
    let mut points = Vec::new();
    for atoms in [1_000u64, 10_000, 100_000] {
        let mut sq = 0.0;
        let mut n = 0.0;
        for seed in 0..8 {
            let options = MonteCarloOptions {
                atoms,
                seed,
                workers: 4,
            };
            let run = e(monte_carlo_relaxation(
                &sr,
                1.0,
                InitialState::Excited,
                &times,
                options,
            ))?;
            for (m, x) in run.energy.iter().zip(&exact.energy) {
                sq += (m - x).powi(2);
                n += 1.0;
            }
        }
        points.push(((atoms as f64).log10(), (sq / n).sqrt().log10()));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let msg = format!("rms error slope {slope:.3} against -0.5");
    if (slope + 0.5).abs() < 0.15 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn scratch_dir(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("emrates-verify-{}-{tag}", std::process::id()))
}

fn cli_determinism_and_round_trip() -> Outcome {
    let text = "config_version = 1\nmethod = \"closed\"\nseed = 5\n\
                outputs = [\"spectral\", \"rates\", \"relaxation\", \"boundary_functions\", \"equivalence\"]\n\
                [atom]\npolarization = \"x\"\n[relaxation]\natoms = 5000\npoints = 6\n\
                [[sweep]]\nscenario = \"static_mirror\"\nz0 = [0.3, 3.0]\nbeta = [inf, 1.0]\n\
                [[sweep]]\nscenario = \"accelerated\"\na = [0.5, 2.0]\nz0 = 1.0\n";
    let mut config = e(
        RunConfig::parse(text).map_err(|c| crate::Error::InvalidParameter {
            name: "config",
            reason: c.to_string(),
        }),
    )?;
    config.method = MethodChoice::Closed;
    let dirs = [scratch_dir("a"), scratch_dir("b")];
    let result = (|| {
        let mut outputs = Vec::new();
        for d in &dirs {
            config.out_dir = d.clone();
            outputs.push(run(&config).map_err(|e| e.to_string())?);
        }
        for f in &outputs[0].files {
            let name = f.file_name().unwrap();
            let a = std::fs::read(f).map_err(|e| e.to_string())?;
            let b = std::fs::read(dirs[1].join(name)).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{} differs between runs", name.to_string_lossy()));
            }
            let rows = table::read_rows(&a[..]).map_err(|e| e.to_string())?;
            let columns: Vec<String> = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .from_reader(&a[..])
                .headers()
                .map_err(|e| e.to_string())?
                .iter()
                .map(String::from)
                .collect();
            let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
            let comments: Vec<String> = String::from_utf8_lossy(&a)
                .lines()
                .filter_map(|l| l.strip_prefix("# ").map(String::from))
                .collect();
            let mut again = Vec::new();
            table::write_rows(&mut again, &comments, &columns, &rows).map_err(|e| e.to_string())?;
            if again != a {
                return Err(format!("{} does not round-trip", name.to_string_lossy()));
            }
        }
        Ok(format!(
            "{} tables identical and round-trip",
            outputs[0].files.len()
        ))
    })();
    for d in &dirs {
        let _ = std::fs::remove_dir_all(d);
    }
    result
}

type Property = (&'static str, fn() -> Outcome);

const SUITE: &[Property] = &[
    (
        "domain: proper-time normalization",
        proper_time_normalization,
    ),
    (
        "domain: stationarity of the worldlines",
        trajectory_stationarity,
    ),
    ("wightman: hermiticity in the lag", correlator_hermiticity),
    (
        "wightman: correlator from the potential",
        correlator_from_potential_agrees,
    ),
    ("wightman: small-acceleration limit", accel_small_a_limit),
    (
        "spectral: series and direct branches agree",
        boundary_series_consistency,
    ),
    (
        "spectral: boundary functions bounded, contact and far limits",
        boundary_bounded_and_limits,
    ),
    (
        "spectral: continuity in the acceleration",
        boundary_continuity_in_a,
    ),
    ("spectral: KMS in the frequency domain", oracle_kms),
    (
        "spectral: closed form against oracle, positivity",
        oracle_agrees_with_closed_form,
    ),
    ("rates: detailed balance", detailed_balance),
    ("rates: vf + rr decomposition", decomposition),
    ("rates: polarization ratios at contact", polarization_ratios),
    (
        "rates: acceleration and heat are not equivalent",
        non_equivalence,
    ),
    (
        "dynamics: analytic, population and ODE forms agree",
        relaxation_consistency,
    ),
    (
        "dynamics: Monte Carlo error scales as N^-1/2",
        monte_carlo_scaling,
    ),
    (
        "cli: determinism and table round trip",
        cli_determinism_and_round_trip,
    ),
];

pub fn run_suite() -> Vec<Check> {
    SUITE
        .iter()
        .map(|&(name, f)| {
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

/// Runs the suite, printing one line per property. Returns whether every
/// property held.
pub fn run_and_report<W: Write>(mut out: W) -> io::Result<bool> {
    let mut all = true;
    for &(name, f) in SUITE {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        all &= passed;
        let tag = if passed { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{tag}  {name}  [{detail}; {:.2}s]",
            start.elapsed().as_secs_f64()
        )?;
    }
    Ok(all)
}
