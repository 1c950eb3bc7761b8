//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emrates::domain::{AtomSpec, Axis, InitialState, Scenario};
use emrates::dynamics::{analytic_relaxation, monte_carlo_relaxation, MonteCarloOptions};
use emrates::rates::{
    energy_rates, equivalence_check, polarization_report, spectral_rates, RateMethod, SpectralRates,
};
use emrates::spectral::{f_static, OracleControls};

type Outcome = Result<String, String>;

fn verdict(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// Independent evaluations of the boundary functions, written from the
// trigonometric forms without series switching.
fn fx_static_ref(x: f64) -> f64 {
    1.5 / x.powi(3) * (x * x.cos() + (x * x - 1.0) * x.sin())
}

fn fx_accel_ref(omega0: f64, z0: f64, a: f64) -> f64 {
    let x = 2.0 * omega0 * z0;
    let s = a * z0;
    let s2 = s * s;
    let p = (x * x * (1.0 + s2) - 2.0 * s2 * (1.0 + 2.0 * s2) - 1.0) / (1.0 + s2).powf(2.5);
    let q = x * (1.0 + 4.0 * s2) / (1.0 + s2).powi(2);
    let phi = x * s.asinh() / s;
    1.5 / x.powi(3) * (p * phi.sin() + q * phi.cos())
}

struct Grid {
    static_points: Vec<(f64, f64)>,
    accel_points: Vec<(f64, f64)>,
}

fn grid() -> Grid {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let static_points = (0..30)
        .map(|k| {
            let z0 = rng.gen_range(0.2..5.0);
            let beta = if k % 5 == 0 {
                f64::INFINITY
            } else {
                (rng.gen_range(0.5f64.ln()..50f64.ln())).exp()
            };
            (z0, beta)
        })
        .collect();
    let accel_points = (0..30)
        .map(|_| (rng.gen_range(0.2..5.0), rng.gen_range(0.1..3.0)))
        .collect();
    Grid {
        static_points,
        accel_points,
    }
}

fn cases(g: &Grid) -> Vec<(Scenario, AtomSpec)> {
    let iso = AtomSpec::isotropic(1.0, 1.0).unwrap();
    let x = AtomSpec::polarized(Axis::X, 1.0, 1.0).unwrap();
    let mut out: Vec<_> = g
        .static_points
        .iter()
        .map(|&(z0, beta)| (Scenario::static_mirror(z0, beta).unwrap(), iso))
        .collect();
    out.extend(
        g.accel_points
            .iter()
            .map(|&(z0, a)| (Scenario::accelerated(a, z0).unwrap(), x)),
    );
    out
}

fn boundary_limits() -> Outcome {
    let start = Instant::now();
    let near = f_static(1.0, 0.5e-4).map_err(|e| e.to_string())?;
    let far = f_static(1.0, 500.0).map_err(|e| e.to_string())?;
    let contact = (near.f_x - 1.0)
        .abs()
        .max((near.f_y - 1.0).abs())
        .max((near.f_z + 1.0).abs());
    let decay = far.f_x.abs().max(far.f_y.abs()).max(far.f_z.abs());
    let far_ref = (far.f_x - fx_static_ref(1000.0)).abs();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        contact <= 1e-6 && decay < 1e-2 && far_ref < 1e-12 && secs < 1.0,
        format!("contact error {contact:.2e}, max |f| at 500 = {decay:.2e}, {secs:.3}s"),
    )
}

fn closed_vs_oracle(rows: &[(Scenario, SpectralRates, SpectralRates)]) -> Outcome {
    let mut flagged = Vec::new();
    let mut worst = 0.0f64;
    for (s, c, o) in rows {
        for (cv, ov, err) in [
            (c.g_plus, o.g_plus, o.g_plus_error),
            (c.g_minus, o.g_minus, o.g_minus_error),
        ] {
            let tol = (1e-6 * cv.abs()).max(err);
            let ratio = (cv - ov).abs() / tol;
            worst = worst.max(ratio);
            if ratio > 1.0 {
                flagged.push(format!("{s}: closed {cv:e} oracle {ov:e} bound {tol:e}"));
            }
        }
    }
    verdict(
        flagged.is_empty(),
        format!(
            "{} points, worst |diff| / bound = {worst:.3}{}",
            rows.len(),
            if flagged.is_empty() {
                String::new()
            } else {
                format!("; {}", flagged.join("; "))
            }
        ),
    )
}

fn detailed_balance(rows: &[(Scenario, SpectralRates, SpectralRates)]) -> Outcome {
    let mut worst = 0.0f64;
    for (s, c, _) in rows {
        let beta = match *s {
            Scenario::StaticMirrorThermal { beta, .. } => beta,
            Scenario::AcceleratedMirror { a, .. } => 2.0 * PI / a,
            Scenario::StaticFreeSpace => f64::INFINITY,
        };
        if beta.is_infinite() {
            if c.a_up != 0.0 {
                return Err(format!("{s}: a_up = {} at zero temperature", c.a_up));
            }
            continue;
        }
        let want = (-beta).exp();
        worst = worst.max(((c.a_up / c.a_down - want) / want).abs());
    }
    verdict(worst <= 1e-12, format!("worst relative error {worst:.2e}"))
}

fn polarization() -> Outcome {
    let cases = [
        (
            AtomSpec::isotropic(1.0, 1.0).unwrap(),
            2.0 / 3.0,
            "isotropic",
        ),
        (AtomSpec::polarized(Axis::Z, 1.0, 1.0).unwrap(), 2.0, "z"),
        (AtomSpec::new(1.0, 1.0, [0.5, 0.5, 0.0]).unwrap(), 0.0, "xy"),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (atom, want, name) in cases {
        let report = polarization_report(&atom).ratio;
        // the same ratio from actual rates a nanometre-scale distance away
        let near = spectral_rates(
            &Scenario::static_mirror(1e-9, f64::INFINITY).unwrap(),
            &atom,
            &RateMethod::ClosedForm,
        )
        .map_err(|e| e.to_string())?;
        let rate_ratio = near.a_down / atom.gamma0();
        let err = (report - want).abs().max((rate_ratio - want).abs());
        worst = worst.max(err);
        parts.push(format!("{name} {report:.15}"));
    }
    verdict(
        worst <= 1e-12,
        format!("{}; worst error {worst:.1e}", parts.join(", ")),
    )
}

fn non_equivalence() -> Outcome {
    let r = equivalence_check(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let reference = (1.0 + 1.0 - fx_accel_ref(1.0, 1.0, 1.0)) - (1.0 - fx_static_ref(2.0));
    let mut exact = true;
    for a in [0.1, 0.7, 1.0, 2.9] {
        let inf = equivalence_check(1.0, f64::INFINITY, a).map_err(|e| e.to_string())?;
        exact &= inf.difference == a * a;
    }
    verdict(
        (r.difference - reference).abs() < 1e-12 && (r.difference - 1.4123).abs() < 5e-5 && r.is_nonzero(1e-3) && exact,
        format!(
            "difference {:.10} (independent {reference:.10}), mirror-free difference equals a^2: {exact}",
            r.difference
        ),
    )
}

fn relaxation() -> Outcome {
    let start = Instant::now();
    let atom = AtomSpec::isotropic(1.0, 1.0).unwrap();
    let mut worst_sigma = 0.0f64;
    let mut worst_at = (0.0, 0);
    let mut beyond = 0;
    let mut worst_eq = 0.0f64;
    let mut worst_eq_sigma = 0.0f64;
    for beta in [0.5, 1.0, 2.0] {
        let sr = spectral_rates(
            &Scenario::static_mirror(1.0, beta).unwrap(),
            &atom,
            &RateMethod::ClosedForm,
        )
        .map_err(|e| e.to_string())?;
        let gamma = sr.decay_rate();
        let times: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0 * 10.0 / gamma).collect();
        let curve = analytic_relaxation(&sr, 1.0, InitialState::Excited, &times)
            .map_err(|e| e.to_string())?;
        let options = MonteCarloOptions {
            atoms: 100_000,
            seed: 20_240_601,
            workers: 8,
        };
        let mc = monte_carlo_relaxation(&sr, 1.0, InitialState::Excited, &times, options)
            .map_err(|e| e.to_string())?;
        for k in 0..times.len() {
            let z = (mc.energy[k] - curve.energy[k]).abs() / mc.standard_error[k];
            beyond += usize::from(z > 3.0);
            if z > worst_sigma {
                worst_sigma = z;
                worst_at = (beta, k + 1);
            }
        }
        // two-level Gibbs average
        let (w_up, w_down) = ((-0.5 * beta).exp(), (0.5 * beta).exp());
        let gibbs = 0.5 * (w_up - w_down) / (w_up + w_down);
        worst_eq = worst_eq.max((curve.equilibrium_energy - gibbs).abs());
        let last = times.len() - 1;
        worst_eq_sigma =
            worst_eq_sigma.max((mc.energy[last] - gibbs).abs() / mc.standard_error[last]);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst_sigma <= 3.0 && worst_eq_sigma <= 3.0 && worst_eq < 1e-12 && secs < 60.0,
        format!(
            "worst deviation {worst_sigma:.2} SE at beta omega0 = {}, t_{}; {beyond} of 60 points beyond 3 SE; equilibrium {worst_eq_sigma:.2} SE \
             (analytic vs Gibbs {worst_eq:.1e}), {secs:.2}s",
            worst_at.0, worst_at.1
        ),
    )
}

fn decomposition(rows: &[(Scenario, SpectralRates, SpectralRates)], table: &Path) -> Outcome {
    let mut n = 0;
    let file = std::fs::File::open(table).map_err(|e| format!("{}: {e}", table.display()))?;
    for r in emrates::cli::table::read_rows(file).map_err(|e| e.to_string())? {
        let get = |v: Option<f64>| v.ok_or_else(|| format!("row {} incomplete", r.row));
        let rr = get(r.rr_any_state)?;
        if get(r.vf_excited)? + rr != get(r.total_excited)?
            || get(r.vf_ground)? + rr != get(r.total_ground)?
        {
            return Err(format!("table row {}: vf + rr != total", r.row));
        }
        n += 2;
    }
    for (s, c, o) in rows {
        for sr in [c, o] {
            let r = energy_rates(sr, 1.0);
            if r.vf_excited + r.rr_any_state != r.total_excited
                || r.vf_ground + r.rr_any_state != r.total_ground
            {
                return Err(format!("{s}: vf + rr != total"));
            }
            n += 2;
        }
    }
    verdict(
        true,
        format!("{n} exact identities, rr shared by both initial states"),
    )
}

const CONFIG: &str = r#"
config_version = 1
method = "both"
seed = 314159
outputs = ["spectral", "rates", "relaxation", "equivalence", "boundary_functions"]

[atom]
polarization = "x"

[[sweep]]
scenario = "static_mirror"
z0 = [0.3, 1.0, 4.0]
beta = [inf, 1.0]

[[sweep]]
scenario = "accelerated"
a = [0.4, 1.5]
z0 = [0.5, 2.0]

[[sweep]]
scenario = "free_space"

[relaxation]
atoms = 20000
points = 11
"#;

fn determinism(dir: &Path) -> Outcome {
    let config = dir.join("run.toml");
    std::fs::write(&config, CONFIG).map_err(|e| e.to_string())?;
    let mut outs = Vec::new();
    for name in ["first", "second"] {
        let out = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_emrates"))
            .arg("run")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!(
                "run failed: {}",
                String::from_utf8_lossy(&status.stderr)
            ));
        }
        outs.push(out);
    }
    let mut tables = 0;
    for entry in std::fs::read_dir(&outs[0]).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let a = std::fs::read(&path).map_err(|e| e.to_string())?;
            let b = std::fs::read(outs[1].join(path.file_name().unwrap()))
                .map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{} differs", path.display()));
            }
            tables += 1;
        }
    }
    verdict(
        tables == 6,
        format!("{tables} tables byte-identical across two runs"),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let start = Instant::now();
    let rows: Vec<(Scenario, SpectralRates, SpectralRates)> = cases(&grid())
        .into_iter()
        .map(|(s, atom)| {
            let c = spectral_rates(&s, &atom, &RateMethod::ClosedForm).expect("closed form");
            let o = spectral_rates(&s, &atom, &RateMethod::Oracle(OracleControls::default()))
                .expect("oracle");
            (s, c, o)
        })
        .collect();
    let oracle_secs = start.elapsed().as_secs_f64();

    let determinism = determinism(dir.path());
    let results: Vec<(&str, Outcome)> = vec![
        ("1 boundary-function limits", boundary_limits()),
        (
            "2 closed form against oracle",
            closed_vs_oracle(&rows).map(|m| format!("{m}, {oracle_secs:.1}s")),
        ),
        ("3 detailed balance", detailed_balance(&rows)),
        ("4 polarization ratios at contact", polarization()),
        (
            "5 non-equivalence of acceleration and heat",
            non_equivalence(),
        ),
        ("6 relaxation dynamics", relaxation()),
        (
            "7 decomposition identity",
            decomposition(&rows, &dir.path().join("first/rates.csv")),
        ),
        ("8 determinism", determinism),
    ];

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(m) => println!("PASS  criterion {name}: {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL  criterion {name}: {m}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
