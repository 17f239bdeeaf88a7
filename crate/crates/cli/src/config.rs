//! Line-based `key = value` run configuration.
//!
//! ```text
//! # infinite well, 512 points
//! potential = infinite_well
//! grid.n_points = 512
//! gap.pairs = 0-1, 0-2, 1-2
//! ```
//!
//! Every key has a documented default (see [`KEYS`]) except `seed` and
//! `potential.values`. Unknown and repeated keys are rejected.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use bipartite_core::evolution::EvolutionParams;
use bipartite_core::hamiltonian::PotentialSpec;
use bipartite_core::{Grid1D, PhysicalConstants};

/// A configuration problem tied to a line of the document when possible.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl ConfigError {
    pub fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

type Parsed<T> = std::result::Result<T, ConfigError>;

/// Recognised keys with their defaults and meaning.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    (
        "potential",
        Some("infinite_well"),
        "infinite_well | harmonic | double_well | tabulated",
    ),
    ("potential.omega", Some("1"), "harmonic angular frequency"),
    ("potential.barrier_height", Some("50"), "double_well barrier height"),
    (
        "potential.barrier_half_width",
        Some("0.05"),
        "double_well barrier half width",
    ),
    (
        "potential.values",
        None,
        "tabulated U(x_i), comma separated, one per grid point",
    ),
    ("grid.x_min", Some("0"), "left wall"),
    ("grid.x_max", Some("1"), "right wall"),
    ("grid.n_points", Some("256"), "grid points including both walls (≥ 3)"),
    ("constants.hbar", Some("1"), "reduced Planck constant"),
    ("constants.mass", Some("1"), "particle mass"),
    ("evolution.dt", Some("0.001"), "time step"),
    ("evolution.n_steps", Some("1000"), "number of steps"),
    (
        "evolution.record_every",
        Some("100"),
        "snapshot stride in steps (default capped at n_steps)",
    ),
    ("levels", Some("5"), "retained eigenstates K"),
    (
        "initial.state",
        Some("product"),
        "product | wave | particle | random_hermitian",
    ),
    (
        "initial.amplitudes",
        Some("1, 1, 1"),
        "real level amplitudes of the product state (default cut to `levels`)",
    ),
    (
        "gap.pairs",
        Some("0-1, 0-2, 1-2"),
        "level pairs n-m (0-based; default cut to `levels`)",
    ),
    ("duality.modes", Some("screen"), "screen | slits"),
    (
        "duality.lambdas",
        Some("0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1"),
        "interpolation parameters in [0, 1]",
    ),
    ("screen.fringes", Some("6"), "fringes across the grid for screen modes"),
    ("slits.separation", Some("0.4"), "slit centre distance"),
    ("slits.width", Some("0.05"), "Gaussian slit width"),
    ("collapse.samples", Some("100000"), "collapse draws M"),
    ("seed", None, "generator seed; required for sampling and random states"),
    ("output_dir", Some("out"), "directory for CSV files and the manifest"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// `ψ0 ψ0*` with `ψ0 ∝ Σ_n a_n ψ_n`.
    Product,
    /// Coherent two-level kernel on levels 0 and 1.
    Wave,
    /// Diagonal two-level mixture on levels 0 and 1.
    Particle,
    /// Seeded random Hermitian coefficients over all retained levels.
    RandomHermitian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeFamily {
    Screen { fringes: usize },
    Slits { separation: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub grid: Grid1D,
    pub constants: PhysicalConstants,
    pub evolution: EvolutionParams,
    pub levels: usize,
    pub initial: InitialState,
    pub amplitudes: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    pub modes: ModeFamily,
    pub lambdas: Vec<f64>,
    pub collapse_samples: usize,
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    echo: Vec<(String, String)>,
}

impl RunConfig {
    /// Every key with its effective value, in [`KEYS`] order.
    pub fn echo(&self) -> &[(String, String)] {
        &self.echo
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.set_echo("seed", seed.to_string());
    }

    pub fn set_output_dir(&mut self, dir: PathBuf) {
        self.set_echo("output_dir", dir.display().to_string());
        self.output_dir = dir;
    }

    fn set_echo(&mut self, key: &str, value: String) {
        if let Some(e) = self.echo.iter_mut().find(|(k, _)| k == key) {
            e.1 = value;
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Document {
    entries: HashMap<String, Entry>,
}

impl Document {
    fn parse(text: &str) -> Parsed<Self> {
        let mut entries: HashMap<String, Entry> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::new(Some(line), format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::new(Some(line), "missing key before `=`"));
            }
            if value.is_empty() {
                return Err(ConfigError::new(Some(line), format!("missing value for `{key}`")));
            }
            if !KEYS.iter().any(|(k, _, _)| *k == key) {
                return Err(ConfigError::new(Some(line), format!("unknown key `{key}`")));
            }
            if let Some(prev) = entries.get(key) {
                return Err(ConfigError::new(
                    Some(line),
                    format!("duplicate key `{key}` (lines {} and {line})", prev.line),
                ));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self { entries })
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn raw(&self, key: &str) -> Option<(&str, Option<usize>)> {
        if let Some(e) = self.entries.get(key) {
            return Some((e.value.as_str(), Some(e.line)));
        }
        KEYS.iter()
            .find(|(k, _, _)| *k == key)
            .and_then(|(_, d, _)| d.map(|d| (d, None)))
    }

    fn get<T>(&self, key: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Parsed<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => parse(v)
                .map(Some)
                .ok_or_else(|| ConfigError::new(line, format!("`{key}` expects {what}, got `{v}`"))),
        }
    }

    fn required<T>(&self, key: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Parsed<T> {
        self.get(key, what, parse)?
            .ok_or_else(|| ConfigError::new(None, format!("`{key}` is required")))
    }

    fn f64(&self, key: &str) -> Parsed<f64> {
        self.required(key, "a finite number", parse_f64)
    }

    fn usize(&self, key: &str) -> Parsed<usize> {
        self.required(key, "a non-negative integer", |v| v.parse().ok())
    }

    fn f64_list(&self, key: &str) -> Parsed<Option<Vec<f64>>> {
        self.get(key, "a comma-separated list of finite numbers", |v| {
            v.split(',').map(|s| parse_f64(s.trim())).collect()
        })
    }
}

fn parse_f64(v: &str) -> Option<f64> {
    v.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_pair(v: &str) -> Option<(usize, usize)> {
    let (n, m) = v.split_once('-')?;
    Some((n.trim().parse().ok()?, m.trim().parse().ok()?))
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Parsed<RunConfig> {
    let doc = Document::parse(text)?;
    let at = |key: &str| doc.line(key);
    let core_err = |key: &str, e: bipartite_core::Error| ConfigError::new(at(key), format!("`{key}`: {e}"));

    let n_points = doc.usize("grid.n_points")?;
    if n_points < 3 {
        return Err(ConfigError::new(
            at("grid.n_points"),
            format!("n_points ≥ 3 required, got {n_points}"),
        ));
    }
    let grid = Grid1D::new(doc.f64("grid.x_min")?, doc.f64("grid.x_max")?, n_points).map_err(|e| {
        core_err(
            if at("grid.x_max").is_some() {
                "grid.x_max"
            } else {
                "grid.x_min"
            },
            e,
        )
    })?;

    let hbar = doc.f64("constants.hbar")?;
    let mass = doc.f64("constants.mass")?;
    let constants = PhysicalConstants::new(hbar, mass)
        .map_err(|e| core_err(if hbar > 0.0 { "constants.mass" } else { "constants.hbar" }, e))?;

    let potential = match doc
        .required("potential", "a potential name", |v| Some(v.to_string()))?
        .as_str()
    {
        "infinite_well" => PotentialSpec::InfiniteWell,
        "harmonic" => PotentialSpec::Harmonic {
            omega: doc.f64("potential.omega")?,
        },
        "double_well" => PotentialSpec::DoubleWell {
            barrier_height: doc.f64("potential.barrier_height")?,
            barrier_half_width: doc.f64("potential.barrier_half_width")?,
        },
        "tabulated" => PotentialSpec::Tabulated(
            doc.f64_list("potential.values")?
                .ok_or_else(|| ConfigError::new(at("potential"), "tabulated potential requires `potential.values`"))?,
        ),
        other => {
            return Err(ConfigError::new(
                at("potential"),
                format!("`potential` expects infinite_well, harmonic, double_well or tabulated, got `{other}`"),
            ))
        }
    };
    potential.validate(&grid).map_err(|e| {
        let key = match potential {
            PotentialSpec::Harmonic { .. } => "potential.omega",
            PotentialSpec::DoubleWell { .. } if at("potential.barrier_half_width").is_some() => {
                "potential.barrier_half_width"
            }
            PotentialSpec::Tabulated(_) => "potential.values",
            _ => "potential",
        };
        core_err(key, e)
    })?;

    let n_steps = doc.usize("evolution.n_steps")?;
    let mut record_every = doc.usize("evolution.record_every")?;
    if at("evolution.record_every").is_none() {
        record_every = record_every.min(n_steps.max(1));
    }
    let evolution = EvolutionParams::new(doc.f64("evolution.dt")?, n_steps, record_every).map_err(|e| {
        let key = ["evolution.record_every", "evolution.n_steps", "evolution.dt"]
            .into_iter()
            .find(|k| at(k).is_some())
            .unwrap_or("evolution.dt");
        core_err(key, e)
    })?;

    let levels = doc.usize("levels")?;
    if levels == 0 || levels > grid.interior() {
        return Err(ConfigError::new(
            at("levels"),
            format!(
                "levels must lie in 1..={} (interior points), got {levels}",
                grid.interior()
            ),
        ));
    }

    let initial = match doc
        .required("initial.state", "a state name", |v| Some(v.to_string()))?
        .as_str()
    {
        "product" => InitialState::Product,
        "wave" => InitialState::Wave,
        "particle" => InitialState::Particle,
        "random_hermitian" => InitialState::RandomHermitian,
        other => {
            return Err(ConfigError::new(
                at("initial.state"),
                format!("`initial.state` expects product, wave, particle or random_hermitian, got `{other}`"),
            ))
        }
    };
    if matches!(initial, InitialState::Wave | InitialState::Particle) && levels < 2 {
        return Err(ConfigError::new(
            at("levels"),
            "wave and particle states need levels ≥ 2",
        ));
    }
    let mut amplitudes = doc.f64_list("initial.amplitudes")?.unwrap_or_default();
    if at("initial.amplitudes").is_none() {
        amplitudes.truncate(levels);
    }
    if initial == InitialState::Product {
        if amplitudes.len() > levels {
            return Err(ConfigError::new(
                at("initial.amplitudes"),
                format!("{} amplitudes exceed the {levels} retained levels", amplitudes.len()),
            ));
        }
        if amplitudes.iter().all(|a| *a == 0.0) {
            return Err(ConfigError::new(at("initial.amplitudes"), "amplitudes are all zero"));
        }
    }

    let mut pairs = doc
        .get("gap.pairs", "a comma-separated list of n-m pairs", |v| {
            v.split(',').map(|s| parse_pair(s.trim())).collect::<Option<Vec<_>>>()
        })?
        .unwrap_or_default();
    if at("gap.pairs").is_none() {
        pairs.retain(|(n, m)| *n < levels && *m < levels);
    }
    if let Some((n, m)) = pairs.iter().find(|(n, m)| *n >= levels || *m >= levels) {
        return Err(ConfigError::new(
            at("gap.pairs"),
            format!("pair {n}-{m} is outside the {levels} retained levels"),
        ));
    }

    let modes = match doc
        .required("duality.modes", "a mode family", |v| Some(v.to_string()))?
        .as_str()
    {
        "screen" => ModeFamily::Screen {
            fringes: doc.usize("screen.fringes")?,
        },
        "slits" => ModeFamily::Slits {
            separation: doc.f64("slits.separation")?,
            width: doc.f64("slits.width")?,
        },
        other => {
            return Err(ConfigError::new(
                at("duality.modes"),
                format!("`duality.modes` expects screen or slits, got `{other}`"),
            ))
        }
    };
    let lambdas = doc.f64_list("duality.lambdas")?.unwrap_or_default();
    if let Some(l) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(ConfigError::new(
            at("duality.lambdas"),
            format!("lambda {l} outside [0, 1]"),
        ));
    }

    let collapse_samples = doc.usize("collapse.samples")?;
    if collapse_samples == 0 {
        return Err(ConfigError::new(at("collapse.samples"), "collapse.samples must be ≥ 1"));
    }
    let seed = doc.get("seed", "an unsigned 64-bit integer", |v| v.parse::<u64>().ok())?;
    let output_dir = PathBuf::from(doc.required("output_dir", "a path", |v| Some(v.to_string()))?);

    let echo = KEYS
        .iter()
        .map(|(k, _, _)| {
            let v = doc.raw(k).map(|(v, _)| v.to_string()).unwrap_or_else(|| "none".into());
            (k.to_string(), v)
        })
        .collect();

    Ok(RunConfig {
        potential,
        grid,
        constants,
        evolution,
        levels,
        initial,
        amplitudes,
        pairs,
        modes,
        lambdas,
        collapse_samples,
        seed,
        output_dir,
        echo,
    })
}
