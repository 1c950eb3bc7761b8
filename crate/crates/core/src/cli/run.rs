use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ConfigError, MethodChoice, Quantity, RunConfig, Units};
use super::table::{self, CompareRow, ResultRow, TableError};
use crate::domain::Scenario;
use crate::dynamics::{
    analytic_relaxation, monte_carlo_relaxation, MonteCarloOptions, MonteCarloRun, RelaxationCurve,
};
use crate::error::Error;
use crate::rates::{
    energy_rates, equivalence_check, spectral_rates, EnergyRates, EquivalenceReport, RateMethod,
    SpectralRates,
};
use crate::spectral::{f_accelerated, f_static, BoundaryFunctions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numeric {
        row: usize,
        scenario: Scenario,
        method: &'static str,
        source: Error,
    },
    Output {
        path: PathBuf,
        source: TableError,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numeric { source, .. } => match source {
                // parameters that pass config validation but not the library
                Error::InvalidParameter { .. } | Error::UnsupportedPolarization { .. } => {
                    EXIT_CONFIG
                }
                _ => EXIT_NUMERIC,
            },
            RunError::Output { .. } => EXIT_IO,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "invalid config: {e}"),
            RunError::Numeric {
                row,
                scenario,
                method,
                source,
            } => {
                write!(f, "row {row}, {scenario}, method {method}: {source}")
            }
            RunError::Output { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for RunError {}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub method: Option<MethodChoice>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub units: Option<Units>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(m) = self.method {
            config.method = m;
        }
        if let Some(o) = &self.out_dir {
            config.out_dir = o.clone();
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(u) = self.units {
            config.units = u;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub flagged: usize,
}

struct MethodResult {
    tag: &'static str,
    rates: SpectralRates,
    energy: EnergyRates,
    relaxation: Option<(RelaxationCurve, Option<MonteCarloRun>)>,
}

struct PointResult {
    scenario: Scenario,
    boundary: Option<BoundaryFunctions>,
    equivalence: Option<EquivalenceReport>,
    methods: Vec<MethodResult>,
    mc_seed: u64,
}

/// Multipliers taking natural-unit values to the reported unit mode.
#[derive(Debug, Clone, Copy)]
struct Scale {
    length: f64,
    accel: f64,
    rate: f64,
    power: f64,
    energy: f64,
    time: f64,
}

impl Scale {
    fn new(config: &RunConfig) -> Self {
        match config.units {
            Units::Natural => Scale {
                length: 1.0,
                accel: 1.0,
                rate: 1.0,
                power: 1.0,
                energy: 1.0,
                time: 1.0,
            },
            Units::Omega0 => {
                let (w, g) = (config.atom.omega0(), config.atom.gamma0());
                Scale {
                    length: w,
                    accel: 1.0 / w,
                    rate: 1.0 / g,
                    power: 1.0 / (w * g),
                    energy: 1.0 / w,
                    time: g,
                }
            }
        }
    }
}

fn methods(choice: MethodChoice) -> &'static [&'static str] {
    match choice {
        MethodChoice::Closed => &["closed"],
        MethodChoice::Oracle => &["oracle"],
        MethodChoice::Both => &["closed", "oracle"],
    }
}

fn time_grid(config: &RunConfig) -> Vec<f64> {
    let r = &config.relaxation;
    let n = (r.points - 1) as f64;
    (0..r.points).map(|k| r.t_end * k as f64 / n).collect()
}

fn compute_point(
    config: &RunConfig,
    row: usize,
    scenario: Scenario,
    times: &[f64],
) -> Result<PointResult, RunError> {
    let fail = |method: &'static str| {
        move |source: Error| RunError::Numeric {
            row,
            scenario,
            method,
            source,
        }
    };
    let omega0 = config.atom.omega0();
    let wants = |q: Quantity| config.outputs.contains(&q);

    let boundary = if wants(Quantity::BoundaryFunctions) {
        Some(match scenario {
            Scenario::StaticFreeSpace => BoundaryFunctions {
                f_x: 0.0,
                f_y: 0.0,
                f_z: 0.0,
                variant: crate::spectral::BoundaryVariant::Static {
                    omega0,
                    z0: f64::INFINITY,
                },
            },
            Scenario::StaticMirrorThermal { z0, .. } => {
                f_static(omega0, z0).map_err(fail("closed"))?
            }
            Scenario::AcceleratedMirror { a, z0 } => {
                f_accelerated(omega0, z0, a).map_err(fail("closed"))?
            }
        })
    } else {
        None
    };
    let equivalence = match scenario {
        Scenario::AcceleratedMirror { a, z0 } if wants(Quantity::Equivalence) => {
            Some(equivalence_check(omega0, z0, a).map_err(fail("closed"))?)
        }
        _ => None,
    };

    let mc_seed = config.seed.wrapping_add(row as u64);
    let needs_rates =
        wants(Quantity::Spectral) || wants(Quantity::Rates) || wants(Quantity::Relaxation);
    let needs_rates = needs_rates || config.method == MethodChoice::Both;
    let mut results = Vec::new();
    if needs_rates {
        for &tag in methods(config.method) {
            let method = match tag {
                "closed" => RateMethod::ClosedForm,
                _ => RateMethod::Oracle(config.oracle.clone()),
            };
            let rates = spectral_rates(&scenario, &config.atom, &method).map_err(fail(tag))?;
            let relaxation = if wants(Quantity::Relaxation) {
                let r = &config.relaxation;
                let curve =
                    analytic_relaxation(&rates, omega0, r.initial, times).map_err(fail(tag))?;
                let mc = if r.monte_carlo {
                    let options = MonteCarloOptions {
                        atoms: r.atoms,
                        seed: mc_seed,
                        workers: r.workers,
                    };
                    Some(
                        monte_carlo_relaxation(&rates, omega0, r.initial, times, options)
                            .map_err(fail(tag))?,
                    )
                } else {
                    None
                };
                Some((curve, mc))
            } else {
                None
            };
            results.push(MethodResult {
                tag,
                rates,
                energy: energy_rates(&rates, omega0),
                relaxation,
            });
        }
    }
    Ok(PointResult {
        scenario,
        boundary,
        equivalence,
        methods: results,
        mc_seed,
    })
}

fn base_row(row: usize, scenario: &Scenario, s: &Scale) -> ResultRow {
    let mut r = ResultRow {
        row: row as u64,
        scenario: scenario.kind().into(),
        ..Default::default()
    };
    match *scenario {
        Scenario::StaticFreeSpace => {}
        Scenario::StaticMirrorThermal { z0, beta } => {
            r.z0 = Some(z0 * s.length);
            r.beta = Some(beta * s.length);
        }
        Scenario::AcceleratedMirror { a, z0 } => {
            r.z0 = Some(z0 * s.length);
            r.a = Some(a * s.accel);
        }
    }
    r
}

const KEY: [&str; 5] = ["row", "scenario", "z0", "beta", "a"];

pub fn columns(q: Quantity) -> Vec<&'static str> {
    let rest: &[&str] = match q {
        Quantity::BoundaryFunctions => &["f_x", "f_y", "f_z"],
        Quantity::Spectral => &[
            "method",
            "g_plus",
            "g_minus",
            "a_down",
            "a_up",
            "g_plus_error",
            "g_minus_error",
        ],
        Quantity::Rates => &[
            "method",
            "vf_excited",
            "vf_ground",
            "rr_any_state",
            "total_excited",
            "total_ground",
        ],
        Quantity::Relaxation => &[
            "method",
            "t",
            "energy",
            "equilibrium_energy",
            "decay_rate",
            "mc_energy",
            "mc_standard_error",
            "mc_n1",
            "mc_n2",
            "mc_seed",
        ],
        Quantity::Equivalence => &["accelerated_factor", "thermal_factor", "difference"],
    };
    KEY.iter().chain(rest).copied().collect()
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn rows_for(q: Quantity, points: &[PointResult], s: &Scale) -> Vec<ResultRow> {
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let base = base_row(i, &p.scenario, s);
        match q {
            Quantity::BoundaryFunctions => {
                if let Some(f) = p.boundary {
                    out.push(ResultRow {
                        f_x: finite(f.f_x),
                        f_y: finite(f.f_y),
                        f_z: finite(f.f_z),
                        ..base
                    });
                }
            }
            Quantity::Equivalence => {
                if let Some(e) = p.equivalence {
                    out.push(ResultRow {
                        accelerated_factor: Some(e.accelerated_factor),
                        thermal_factor: Some(e.thermal_factor),
                        difference: Some(e.difference),
                        ..base
                    });
                }
            }
            Quantity::Spectral => {
                for m in &p.methods {
                    let r = &m.rates;
                    out.push(ResultRow {
                        method: Some(m.tag.into()),
                        g_plus: Some(r.g_plus * s.rate),
                        g_minus: Some(r.g_minus * s.rate),
                        a_down: Some(r.a_down * s.rate),
                        a_up: Some(r.a_up * s.rate),
                        g_plus_error: Some(r.g_plus_error * s.rate),
                        g_minus_error: Some(r.g_minus_error * s.rate),
                        ..base.clone()
                    });
                }
            }
            Quantity::Rates => {
                for m in &p.methods {
                    let e = &m.energy;
                    out.push(ResultRow {
                        method: Some(m.tag.into()),
                        vf_excited: Some(e.vf_excited * s.power),
                        vf_ground: Some(e.vf_ground * s.power),
                        rr_any_state: Some(e.rr_any_state * s.power),
                        total_excited: Some(e.total_excited * s.power),
                        total_ground: Some(e.total_ground * s.power),
                        ..base.clone()
                    });
                }
            }
            Quantity::Relaxation => {
                for m in &p.methods {
                    let Some((curve, mc)) = &m.relaxation else {
                        continue;
                    };
                    for (k, &t) in curve.times.iter().enumerate() {
                        let mut r = ResultRow {
                            method: Some(m.tag.into()),
                            t: Some(t * s.time),
                            energy: Some(curve.energy[k] * s.energy),
                            equilibrium_energy: Some(curve.equilibrium_energy * s.energy),
                            decay_rate: Some(curve.decay_rate * s.rate),
                            ..base.clone()
                        };
                        if let Some(mc) = mc {
                            r.mc_energy = Some(mc.energy[k] * s.energy);
                            r.mc_standard_error = Some(mc.standard_error[k] * s.energy);
                            r.mc_n1 = Some(mc.states[k].n1);
                            r.mc_n2 = Some(mc.states[k].n2);
                            r.mc_seed = Some(p.mc_seed);
                        }
                        out.push(r);
                    }
                }
            }
        }
    }
    out
}

fn compare_rows(points: &[PointResult], config: &RunConfig, s: &Scale) -> Vec<CompareRow> {
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let base = base_row(i, &p.scenario, s);
        let (Some(c), Some(o)) = (
            p.methods.iter().find(|m| m.tag == "closed"),
            p.methods.iter().find(|m| m.tag == "oracle"),
        ) else {
            continue;
        };
        for (name, closed, oracle, err) in [
            (
                "g_plus",
                c.rates.g_plus,
                o.rates.g_plus,
                o.rates.g_plus_error,
            ),
            (
                "g_minus",
                c.rates.g_minus,
                o.rates.g_minus,
                o.rates.g_minus_error,
            ),
        ] {
            let abs_diff = (closed - oracle).abs();
            let tolerance = (config.oracle.tol_rel * closed.abs()).max(err);
            out.push(CompareRow {
                row: i as u64,
                scenario: base.scenario.clone(),
                z0: base.z0,
                beta: base.beta,
                a: base.a,
                quantity: name.into(),
                closed: closed * s.rate,
                oracle: oracle * s.rate,
                abs_diff: abs_diff * s.rate,
                achieved_error: err * s.rate,
                tolerance: tolerance * s.rate,
                flagged: abs_diff > tolerance,
            });
        }
    }
    out
}

fn unit_description(units: Units) -> &'static str {
    match units {
        Units::Omega0 => {
            "omega0 (z0 and beta times omega0, a over omega0, rates over gamma0, \
             energies over omega0, energy rates over omega0*gamma0, times times gamma0)"
        }
        Units::Natural => "natural (hbar = c = k_B = 1)",
    }
}

fn table_comments(config: &RunConfig, name: &str) -> Vec<String> {
    vec![
        format!("emrates {}", env!("CARGO_PKG_VERSION")),
        format!("quantity: {name}"),
        format!("units: {}", unit_description(config.units)),
        format!("method: {}", config.method.name()),
        format!("seed: {}", config.seed),
    ]
}

fn metadata(config: &RunConfig, files: &[PathBuf]) -> String {
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let o = &config.oracle;
    let r = &config.relaxation;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "auto".into());
    let mut lines = vec![
        format!("version = {}", env!("CARGO_PKG_VERSION")),
        format!("config_version = {}", super::config::CONFIG_VERSION),
        format!("created_unix = {created}"),
        format!("seed = {}", config.seed),
        format!("method = {}", config.method.name()),
        format!("units = {}", config.units.name()),
        format!("units_detail = {}", unit_description(config.units)),
        format!("atom.omega0 = {}", config.atom.omega0()),
        format!("atom.gamma0 = {}", config.atom.gamma0()),
        format!("atom.alpha = {:?}", config.atom.alpha()),
        format!("sweep_rows = {}", config.sweep.len()),
        format!("oracle.epsilon0 = {}", opt(o.epsilon0)),
        format!("oracle.levels = {}", o.levels),
        format!("oracle.window = {}", opt(o.window)),
        format!("oracle.tol_rel = {}", o.tol_rel),
        format!("oracle.tol_abs = {}", o.tol_abs),
        format!("oracle.max_panels = {}", o.max_panels),
        format!("relaxation.initial = {:?}", r.initial),
        format!("relaxation.t_end = {}", r.t_end),
        format!("relaxation.points = {}", r.points),
        format!("relaxation.monte_carlo = {}", r.monte_carlo),
        format!("relaxation.atoms = {}", r.atoms),
        format!("relaxation.workers = {}", r.workers),
    ];
    for f in files {
        lines.push(format!(
            "table = {}",
            f.file_name().unwrap_or_default().to_string_lossy()
        ));
    }
    lines.join("\n") + "\n"
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, RunError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| RunError::Output {
            path: path.to_path_buf(),
            source: TableError::Io(e),
        })
}

fn output_err(path: &Path) -> impl Fn(TableError) -> RunError + '_ {
    move |source| RunError::Output {
        path: path.to_path_buf(),
        source,
    }
}

/// Evaluates every sweep row and writes the requested tables.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    if config.units == Units::Omega0 && config.atom.gamma0() == 0.0 {
        return Err(RunError::Config(ConfigError {
            line: None,
            field: "atom.gamma0".into(),
            message: "omega0 units quote rates in gamma0, which must then be > 0".into(),
        }));
    }
    let times = time_grid(config);
    let computed: Vec<Result<PointResult, RunError>> = config
        .sweep
        .par_iter()
        .enumerate()
        .map(|(i, s)| compute_point(config, i, *s, &times))
        .collect();
    let points = computed.into_iter().collect::<Result<Vec<_>, _>>()?;

    fs::create_dir_all(&config.out_dir).map_err(|e| RunError::Output {
        path: config.out_dir.clone(),
        source: TableError::Io(e),
    })?;
    let scale = Scale::new(config);
    let mut files = Vec::new();
    for &q in &config.outputs {
        let path = config.out_dir.join(format!("{}.csv", q.name()));
        let rows = rows_for(q, &points, &scale);
        let mut w = create(&path)?;
        table::write_rows(
            &mut w,
            &table_comments(config, q.name()),
            &columns(q),
            &rows,
        )
        .map_err(output_err(&path))?;
        w.flush()
            .map_err(|e| output_err(&path)(TableError::Io(e)))?;
        files.push(path);
    }
    let mut flagged = 0;
    if config.method == MethodChoice::Both {
        let path = config.out_dir.join("compare.csv");
        let rows = compare_rows(&points, config, &scale);
        flagged = rows.iter().filter(|r| r.flagged).count();
        let mut w = create(&path)?;
        table::write_compare(&mut w, &table_comments(config, "compare"), &rows)
            .map_err(output_err(&path))?;
        w.flush()
            .map_err(|e| output_err(&path)(TableError::Io(e)))?;
        files.push(path);
    }
    let meta = config.out_dir.join("metadata.txt");
    fs::write(&meta, metadata(config, &files)).map_err(|e| output_err(&meta)(TableError::Io(e)))?;

    Ok(RunSummary {
        files,
        rows: points.len(),
        flagged,
    })
}

/// Loads `path`, applies the overrides and runs.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<RunSummary, RunError> {
    let mut config = RunConfig::load(path).map_err(RunError::Config)?;
    overrides.apply(&mut config);
    run(&config)
}

/// Closed-form against oracle report for every row of the sweep.
pub fn compare_methods(config: &RunConfig) -> Result<Vec<CompareRow>, RunError> {
    let mut config = config.clone();
    config.method = MethodChoice::Both;
    config.outputs.retain(|q| *q == Quantity::Spectral);
    let computed: Vec<Result<PointResult, RunError>> = config
        .sweep
        .par_iter()
        .enumerate()
        .map(|(i, s)| compute_point(&config, i, *s, &[]))
        .collect();
    let points = computed.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(compare_rows(&points, &config, &Scale::new(&config)))
}

pub(crate) fn report<W: Write>(mut out: W, summary: &RunSummary) -> io::Result<()> {
    for f in &summary.files {
        writeln!(out, "wrote {}", f.display())?;
    }
    if summary.flagged > 0 {
        writeln!(
            out,
            "{} compare rows exceed their tolerance",
            summary.flagged
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str, dir: &Path) -> RunConfig {
        let mut c = RunConfig::parse(&format!(
            "config_version = 1\noutputs = [\"spectral\", \"rates\", \"relaxation\", \"boundary_functions\", \"equivalence\"]\n\
             seed = 11\n[atom]\npolarization = \"x\"\n[relaxation]\natoms = 2000\npoints = 5\n{extra}"
        ))
        .unwrap();
        c.out_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn writes_every_table() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            "[[sweep]]\nscenario = \"static_mirror\"\nz0 = [0.5, 1.0]\nbeta = [inf, 2.0]\n\
             [[sweep]]\nscenario = \"accelerated\"\na = 1.0\nz0 = 1.0\n",
            dir.path(),
        );
        let summary = run(&c).unwrap();
        assert_eq!(summary.rows, 5);
        assert_eq!(summary.files.len(), 5);
        let eq =
            table::read_rows(fs::File::open(dir.path().join("equivalence.csv")).unwrap()).unwrap();
        assert_eq!(eq.len(), 1);
        assert!((eq[0].difference.unwrap() - 1.4123133046589622).abs() < 1e-12);
        let relax =
            table::read_rows(fs::File::open(dir.path().join("relaxation.csv")).unwrap()).unwrap();
        assert_eq!(relax.len(), 25);
        assert!(dir.path().join("metadata.txt").exists());
    }

    #[test]
    fn omega0_units_rescale() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(
            "[[sweep]]\nscenario = \"static_mirror\"\nz0 = 1.0\nbeta = 2.0\n\
             [[sweep]]\nscenario = \"accelerated\"\na = 1.0\nz0 = 1.0\n",
            dir.path(),
        );
        c.atom = crate::domain::AtomSpec::new(2.0, 0.5, [1.0, 0.0, 0.0]).unwrap();
        c.outputs = vec![Quantity::Spectral];
        run(&c).unwrap();
        let rows =
            table::read_rows(fs::File::open(dir.path().join("spectral.csv")).unwrap()).unwrap();
        assert_eq!(rows[0].z0, Some(2.0));
        assert_eq!(rows[0].beta, Some(4.0));
        let sr = spectral_rates(
            &Scenario::static_mirror(1.0, 2.0).unwrap(),
            &c.atom,
            &RateMethod::ClosedForm,
        )
        .unwrap();
        assert_eq!(rows[0].g_plus, Some(sr.g_plus / 0.5));
    }
}
