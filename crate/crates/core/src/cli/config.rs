//! Run configuration files.
//!
//! A configuration is a TOML document. Sweep blocks expand to the cartesian
//! product of their parameter lists, in the order the blocks appear.
//!
//! ```toml
//! config_version = 1
//! method = "both"            # closed | oracle | both
//! units = "omega0"           # omega0 | natural
//! seed = 7
//! outputs = ["spectral", "rates", "relaxation", "equivalence", "boundary_functions"]
//! out_dir = "results"
//!
//! [atom]
//! omega0 = 1.0
//! gamma0 = 1.0
//! polarization = "x"         # x | y | z | isotropic, or alpha = [ax, ay, az]
//!
//! [[sweep]]
//! scenario = "static_mirror" # free_space | static_mirror | accelerated
//! z0 = [0.5, 1.0, 2.0]
//! beta = [inf, 2.0]
//!
//! [[sweep]]
//! scenario = "accelerated"
//! a = 1.0
//! z0 = { start = 0.1, stop = 10.0, count = 25, spacing = "log" }
//!
//! [oracle]
//! levels = 5
//! tol_rel = 1e-6
//!
//! [relaxation]
//! initial = "excited"        # excited | ground | excited fraction in [0, 1]
//! t_end = 10.0
//! points = 21
//! monte_carlo = true
//! atoms = 100000
//! workers = 8
//! ```

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use crate::domain::{AtomSpec, Axis, InitialState, Scenario};
use crate::spectral::OracleControls;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Closed,
    Oracle,
    Both,
}

impl MethodChoice {
    pub fn name(self) -> &'static str {
        match self {
            MethodChoice::Closed => "closed",
            MethodChoice::Oracle => "oracle",
            MethodChoice::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// Lengths and times in `1/omega0`, rates in `gamma0`.
    Omega0,
    Natural,
}

impl Units {
    pub fn name(self) -> &'static str {
        match self {
            Units::Omega0 => "omega0",
            Units::Natural => "natural",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Spectral,
    Rates,
    Relaxation,
    Equivalence,
    BoundaryFunctions,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Spectral => "spectral",
            Quantity::Rates => "rates",
            Quantity::Relaxation => "relaxation",
            Quantity::Equivalence => "equivalence",
            Quantity::BoundaryFunctions => "boundary_functions",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationSettings {
    pub initial: InitialState,
    pub t_end: f64,
    pub points: usize,
    pub monte_carlo: bool,
    pub atoms: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub atom: AtomSpec,
    pub sweep: Vec<Scenario>,
    pub outputs: Vec<Quantity>,
    pub method: MethodChoice,
    pub oracle: OracleControls,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub units: Units,
    pub relaxation: RelaxationSettings,
}

/// Diagnostic for a rejected configuration, with the 1-based source line
/// when it can be located.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    config_version: Spanned<u32>,
    method: Option<MethodChoice>,
    units: Option<Units>,
    seed: Option<u64>,
    outputs: Spanned<Vec<Quantity>>,
    out_dir: Option<PathBuf>,
    atom: RawAtom,
    sweep: Option<Spanned<Vec<Spanned<RawSweep>>>>,
    #[serde(default)]
    oracle: RawOracle,
    #[serde(default)]
    relaxation: RawRelaxation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    #[serde(default = "one")]
    omega0: f64,
    #[serde(default = "one")]
    gamma0: f64,
    polarization: Option<String>,
    alpha: Option<[f64; 3]>,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case", deny_unknown_fields)]
enum RawSweep {
    FreeSpace {},
    StaticMirror { z0: Values, beta: Option<Values> },
    Accelerated { a: Values, z0: Values },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Values {
    One(f64),
    Many(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    epsilon0: Option<f64>,
    levels: Option<usize>,
    window: Option<f64>,
    tol_rel: Option<f64>,
    tol_abs: Option<f64>,
    max_panels: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawInitial {
    Named(String),
    Fraction(f64),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRelaxation {
    initial: Option<RawInitial>,
    t_end: Option<f64>,
    points: Option<usize>,
    monte_carlo: Option<bool>,
    atoms: Option<u64>,
    workers: Option<usize>,
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())]
            .matches('\n')
            .count()
            + 1
    }

    fn err(
        &self,
        span: Option<Range<usize>>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> ConfigError {
        ConfigError {
            line: span.map(|s| self.line(s)),
            field: field.into(),
            message: message.into(),
        }
    }
}

impl Values {
    fn expand(&self) -> Result<Vec<f64>, String> {
        match *self {
            Values::One(v) => Ok(vec![v]),
            Values::Many(ref v) => Ok(v.clone()),
            Values::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                if count == 0 {
                    return Ok(Vec::new());
                }
                if !start.is_finite() || !stop.is_finite() {
                    return Err("range bounds must be finite".into());
                }
                if count == 1 {
                    return Ok(vec![start]);
                }
                let n = (count - 1) as f64;
                match spacing {
                    Spacing::Linear => Ok((0..count)
                        .map(|k| start + (stop - start) * k as f64 / n)
                        .collect()),
                    Spacing::Log => {
                        if start <= 0.0 || stop <= 0.0 {
                            return Err("log spacing needs positive bounds".into());
                        }
                        let (l0, l1) = (start.ln(), stop.ln());
                        Ok((0..count)
                            .map(|k| (l0 + (l1 - l0) * k as f64 / n).exp())
                            .collect())
                    }
                }
            }
        }
    }
}

fn parse_atom(raw: &RawAtom, src: &Source) -> Result<AtomSpec, ConfigError> {
    let alpha = match (&raw.polarization, raw.alpha) {
        (Some(_), Some(_)) => {
            return Err(src.err(
                None,
                "atom",
                "give either `polarization` or `alpha`, not both",
            ));
        }
        (Some(p), None) => match p.as_str() {
            "x" => [1.0, 0.0, 0.0],
            "y" => [0.0, 1.0, 0.0],
            "z" => [0.0, 0.0, 1.0],
            "isotropic" => [1.0 / 3.0; 3],
            other => {
                return Err(src.err(
                    None,
                    "atom.polarization",
                    format!("expected x, y, z or isotropic, got `{other}`"),
                ))
            }
        },
        (None, Some(a)) => a,
        (None, None) => [1.0 / 3.0; 3],
    };
    AtomSpec::new(raw.omega0, raw.gamma0, alpha).map_err(|e| src.err(None, "atom", e.to_string()))
}

fn expand_sweep(
    raw: Option<&Spanned<Vec<Spanned<RawSweep>>>>,
    src: &Source,
) -> Result<Vec<Scenario>, ConfigError> {
    let Some(raw) = raw else {
        return Err(src.err(None, "sweep", "at least one scenario is required"));
    };
    let mut out = Vec::new();
    for (i, block) in raw.get_ref().iter().enumerate() {
        let span = block.span();
        let values = |v: &Values, field: String| {
            v.expand()
                .map_err(|m| src.err(Some(span.clone()), field, m))
        };
        let start = out.len();
        let check = |s: Scenario, out: &mut Vec<Scenario>| {
            s.validate()
                .map_err(|e| src.err(Some(span.clone()), format!("sweep[{i}]"), e.to_string()))?;
            out.push(s);
            Ok::<_, ConfigError>(())
        };
        match block.get_ref() {
            RawSweep::FreeSpace {} => out.push(Scenario::StaticFreeSpace),
            RawSweep::StaticMirror { z0, beta } => {
                let zs = values(z0, format!("sweep[{i}].z0"))?;
                let bs = match beta {
                    Some(b) => values(b, format!("sweep[{i}].beta"))?,
                    None => vec![f64::INFINITY],
                };
                for &z in &zs {
                    for &b in &bs {
                        check(Scenario::StaticMirrorThermal { z0: z, beta: b }, &mut out)?;
                    }
                }
            }
            RawSweep::Accelerated { a, z0 } => {
                let as_ = values(a, format!("sweep[{i}].a"))?;
                let zs = values(z0, format!("sweep[{i}].z0"))?;
                for &av in &as_ {
                    for &z in &zs {
                        check(Scenario::AcceleratedMirror { a: av, z0: z }, &mut out)?;
                    }
                }
            }
        }
        if out.len() == start {
            return Err(src.err(
                Some(block.span()),
                format!("sweep[{i}]"),
                "block expands to no scenarios",
            ));
        }
    }
    if out.is_empty() {
        return Err(src.err(
            Some(raw.span()),
            "sweep",
            "at least one scenario is required",
        ));
    }
    Ok(out)
}

fn parse_oracle(raw: &RawOracle, src: &Source) -> Result<OracleControls, ConfigError> {
    let d = OracleControls::default();
    let controls = OracleControls {
        epsilon0: raw.epsilon0,
        levels: raw.levels.unwrap_or(d.levels),
        window: raw.window,
        tol_rel: raw.tol_rel.unwrap_or(d.tol_rel),
        tol_abs: raw.tol_abs.unwrap_or(d.tol_abs),
        max_panels: raw.max_panels.unwrap_or(d.max_panels),
        image_policy: d.image_policy,
    };
    controls
        .validate()
        .map_err(|e| src.err(None, "oracle", e.to_string()))?;
    Ok(controls)
}

fn parse_relaxation(raw: &RawRelaxation, src: &Source) -> Result<RelaxationSettings, ConfigError> {
    let initial = match &raw.initial {
        None => InitialState::Excited,
        Some(RawInitial::Named(s)) => match s.as_str() {
            "excited" => InitialState::Excited,
            "ground" => InitialState::Ground,
            other => {
                return Err(src.err(
                    None,
                    "relaxation.initial",
                    format!("expected excited, ground or a fraction, got `{other}`"),
                ))
            }
        },
        Some(RawInitial::Fraction(p)) => InitialState::mixed(*p)
            .map_err(|e| src.err(None, "relaxation.initial", e.to_string()))?,
    };
    let t_end = raw.t_end.unwrap_or(10.0);
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(src.err(
            None,
            "relaxation.t_end",
            format!("must be finite and > 0, got {t_end}"),
        ));
    }
    let points = raw.points.unwrap_or(21);
    if points < 2 {
        return Err(src.err(None, "relaxation.points", "need at least two time points"));
    }
    let atoms = raw.atoms.unwrap_or(100_000);
    let workers = raw.workers.unwrap_or(8);
    if atoms == 0 || workers == 0 {
        return Err(src.err(None, "relaxation", "atoms and workers must be >= 1"));
    }
    Ok(RelaxationSettings {
        initial,
        t_end,
        points,
        monte_carlo: raw.monte_carlo.unwrap_or(true),
        atoms,
        workers,
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let src = Source { text };
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| src.line(s)),
            field: "config".into(),
            message: e.message().to_string(),
        })?;

        if *raw.config_version.get_ref() != CONFIG_VERSION {
            return Err(src.err(
                Some(raw.config_version.span()),
                "config_version",
                format!(
                    "unsupported version {}, expected {CONFIG_VERSION}",
                    raw.config_version.get_ref()
                ),
            ));
        }
        let atom = parse_atom(&raw.atom, &src)?;
        let sweep = expand_sweep(raw.sweep.as_ref(), &src)?;

        let mut outputs = raw.outputs.get_ref().clone();
        outputs.sort();
        outputs.dedup();
        if outputs.is_empty() {
            return Err(src.err(
                Some(raw.outputs.span()),
                "outputs",
                "request at least one quantity",
            ));
        }
        let accelerated = sweep
            .iter()
            .any(|s| matches!(s, Scenario::AcceleratedMirror { .. }));
        if accelerated {
            let alpha = atom.alpha();
            if alpha[Axis::Y.index()] != 0.0 || alpha[Axis::Z.index()] != 0.0 {
                return Err(src.err(
                    None,
                    "atom",
                    format!("accelerated scenarios need x-polarization, got alpha = {alpha:?}"),
                ));
            }
        }
        if outputs.contains(&Quantity::Equivalence) && !accelerated {
            return Err(src.err(
                Some(raw.outputs.span()),
                "outputs",
                "`equivalence` needs at least one accelerated scenario",
            ));
        }

        Ok(RunConfig {
            atom,
            sweep,
            outputs,
            method: raw.method.unwrap_or(MethodChoice::Closed),
            oracle: parse_oracle(&raw.oracle, &src)?,
            out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from("results")),
            seed: raw.seed.unwrap_or(0),
            units: raw.units.unwrap_or(Units::Omega0),
            relaxation: parse_relaxation(&raw.relaxation, &src)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            field: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }
}
