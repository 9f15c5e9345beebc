//! Experiment configuration: flat `key = value` files, environment overrides
//! and command-line flags, resolved in that order of increasing precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use gibbsdim::orbits::default_checkpoints;
use gibbsdim::{DigitMeasure, IneqParams, MeasureSource, PartitionSource, PartitionSpec};

/// Every recognized key, in echo order.
pub const KEYS: &[&str] = &[
    "partition",
    "measure",
    "model",
    "orbits",
    "length",
    "seed",
    "checkpoints",
    "threads",
    "output",
    "alpha",
    "delta",
    "eta",
    "k0",
    "k_lo",
    "k_hi",
    "n_lo",
    "n_hi",
    "window_start",
    "position",
    "log_digits",
    "depth_cap",
    "checks",
    "criteria",
];

pub const ENV_THREADS: &str = "GIBBSDIM_THREADS";
pub const ENV_SEED: &str = "GIBBSDIM_SEED";

/// Where a setting came from, for error messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { line: usize },
    Env(&'static str),
    Flag(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Origin,
    pub message: String,
}

impl ConfigError {
    fn new(origin: Origin, message: impl Into<String>) -> ConfigError {
        ConfigError {
            origin,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Origin::Default => write!(f, "{}", self.message),
            Origin::File { line } => write!(f, "config line {line}: {}", self.message),
            Origin::Env(name) => write!(f, "{name}: {}", self.message),
            Origin::Flag(flag) => write!(f, "--{flag}: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// One `key = value` line of a config file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parses a config file body. Unknown keys, duplicate keys and lines
/// without `=` are errors carrying their 1-based line number.
pub fn parse_config(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let at = Origin::File { line };
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::new(at.clone(), format!("expected `key = value`, got `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::new(at, format!("unknown key `{key}`")));
        }
        if let Some(first) = entries.iter().find(|e| e.key == key) {
            return Err(ConfigError::new(
                at,
                format!("duplicate key `{key}` (first set on line {})", first.line),
            ));
        }
        entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    Ok(entries)
}

/// Raw settings with their origins; later layers replace earlier ones.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, (String, Origin)>,
    base_dir: Option<PathBuf>,
}

impl Settings {
    pub fn new() -> Settings {
        Settings::default()
    }

    /// Layers a config file; relative table paths later resolve against `base_dir`.
    pub fn with_file(mut self, text: &str, base_dir: &Path) -> Result<Settings, ConfigError> {
        for e in parse_config(text)? {
            self.values.insert(e.key, (e.value, Origin::File { line: e.line }));
        }
        self.base_dir = Some(base_dir.to_path_buf());
        Ok(self)
    }

    /// Layers `GIBBSDIM_THREADS` and `GIBBSDIM_SEED` from `lookup`.
    pub fn with_env(mut self, lookup: impl Fn(&str) -> Option<String>) -> Settings {
        for (name, key) in [(ENV_THREADS, "threads"), (ENV_SEED, "seed")] {
            if let Some(v) = lookup(name) {
                self.values.insert(key.to_string(), (v, Origin::Env(name)));
            }
        }
        self
    }

    /// Layers a command-line flag for `key`.
    pub fn with_flag(mut self, key: &str, value: Option<&str>) -> Settings {
        if let Some(v) = value {
            let flag = key.replace('_', "-");
            self.values.insert(key.to_string(), (v.to_string(), Origin::Flag(flag)));
        }
        self
    }

    fn get(&self, key: &str) -> Option<(&str, Origin)> {
        self.values.get(key).map(|(v, o)| (v.as_str(), o.clone()))
    }

    fn origin(&self, key: &str) -> Origin {
        self.get(key).map(|(_, o)| o).unwrap_or(Origin::Default)
    }

    fn parsed<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, origin)) => parse(v).map_err(|m| ConfigError::new(origin, format!("{key}: {m}"))),
        }
    }

    fn optional<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        self.parsed(key, None, |v| parse(v).map(Some))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    PiecewiseLinear,
    GaussMap,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::PiecewiseLinear => write!(f, "pl"),
            Model::GaussMap => write!(f, "gauss"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub partition: PartitionSource,
    pub measure: MeasureSource,
    pub model: Model,
    pub orbits: usize,
    pub length: u64,
    pub seed: u64,
    pub checkpoints: Vec<u64>,
    pub threads: Option<usize>,
    pub output: PathBuf,
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
    pub k0: Option<u64>,
    pub k_range: (u64, u64),
    pub n_range: (u64, u64),
    /// First depth of the case-split maximum.
    pub window_start: u64,
    pub position: u64,
    pub log_digits: Vec<f64>,
    pub depth_cap: usize,
    pub checks: bool,
    pub criteria: Vec<u32>,
    /// Directory that relative table paths resolve against.
    pub base_dir: PathBuf,
    origins: BTreeMap<&'static str, Origin>,
}

/// Non-negative integer, also accepting exact scientific forms such as `1e5`.
pub fn parse_count(v: &str) -> Result<u64, String> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(format!("`{v}` is not a non-negative integer")),
    }
}

fn parse_real(v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("`{v}` is not a finite number")),
    }
}

fn parse_list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn parse_switch(v: &str) -> Result<bool, String> {
    match v {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{v}` is not on/off")),
    }
}

impl ExperimentConfig {
    pub fn resolve(s: &Settings) -> Result<ExperimentConfig, ConfigError> {
        let partition: PartitionSource = s.parsed("partition", PartitionSource::Gauss, |v| {
            v.parse().map_err(|e| format!("{e}"))
        })?;
        let measure: MeasureSource = s.parsed("measure", MeasureSource::LogSquare, |v| {
            v.parse().map_err(|e| format!("{e}"))
        })?;
        let model = s.parsed("model", Model::PiecewiseLinear, |v| match v {
            "pl" => Ok(Model::PiecewiseLinear),
            "gauss" => Ok(Model::GaussMap),
            _ => Err(format!("`{v}` is not pl or gauss")),
        })?;
        let orbits = s.parsed("orbits", 100, |v| match parse_count(v)? {
            0 => Err("must be at least 1".into()),
            n => usize::try_from(n).map_err(|_| "too large".to_string()),
        })?;
        let length = s.parsed("length", 100_000, |v| match parse_count(v)? {
            0 => Err("must be at least 1".into()),
            n => Ok(n),
        })?;
        let seed = s.parsed("seed", 0, parse_count)?;
        let checkpoints = s.parsed("checkpoints", default_checkpoints(length), |v| {
            let c = parse_list(v, parse_count)?;
            if c[0] == 0 || c.windows(2).any(|w| w[0] >= w[1]) {
                return Err("checkpoints must be positive and strictly increasing".into());
            }
            Ok(c)
        })?;
        if let Some(&last) = checkpoints.last() {
            if last > length {
                let key = if s.get("checkpoints").is_some() {
                    "checkpoints"
                } else {
                    "length"
                };
                return Err(ConfigError::new(
                    s.origin(key),
                    format!("length {length} is below the last checkpoint {last}"),
                ));
            }
        }
        let threads = s.optional("threads", |v| match parse_count(v)? {
            0 => Err("must be at least 1".into()),
            n => usize::try_from(n).map_err(|_| "too large".to_string()),
        })?;
        let output = s.parsed("output", PathBuf::from("gibbsdim-out"), |v| {
            if v.is_empty() {
                Err("empty path".into())
            } else {
                Ok(PathBuf::from(v))
            }
        })?;
        let default_alpha = match &partition {
            PartitionSource::PowerLaw { alpha } => *alpha,
            _ => 2.0,
        };
        let alpha = s.parsed("alpha", default_alpha, parse_real)?;
        let delta = s.parsed("delta", 0.1, parse_real)?;
        let eta = s.parsed("eta", 0.05, parse_real)?;
        if let Err(e) = IneqParams::new(alpha, delta, eta) {
            let key = ["delta", "eta", "alpha"]
                .into_iter()
                .find(|k| s.get(k).is_some())
                .unwrap_or("delta");
            return Err(ConfigError::new(s.origin(key), e.to_string()));
        }
        let k0 = s.optional("k0", |v| match parse_count(v)? {
            0 => Err("must be at least 1".into()),
            n => Ok(n),
        })?;
        let k_lo = s.parsed("k_lo", 2, parse_count)?;
        let k_hi = s.parsed("k_hi", 10_000, parse_count)?;
        if k_lo < 2 || k_hi < k_lo {
            return Err(ConfigError::new(
                s.origin(if s.get("k_lo").is_some() { "k_lo" } else { "k_hi" }),
                format!("k range [{k_lo}, {k_hi}] must satisfy 2 <= k_lo <= k_hi"),
            ));
        }
        let n_lo = s.parsed("n_lo", 1, parse_count)?;
        let n_hi = s.parsed("n_hi", 10_000, parse_count)?;
        if n_hi < n_lo {
            return Err(ConfigError::new(
                s.origin(if s.get("n_lo").is_some() { "n_lo" } else { "n_hi" }),
                format!("n range [{n_lo}, {n_hi}] is empty"),
            ));
        }
        let window_start = s.parsed("window_start", (length / 10).max(2), |v| match parse_count(v)? {
            n if n < 2 => Err("must be at least 2".into()),
            n => Ok(n),
        })?;
        let position = s.parsed("position", 10_000, |v| match parse_count(v)? {
            0 => Err("must be at least 1".into()),
            n => Ok(n),
        })?;
        let log_digits = s.parsed("log_digits", vec![1e9, 1e12], |v| {
            let l = parse_list(v, parse_real)?;
            if l.iter().any(|&x| x < 0.0) {
                return Err("log digits must be >= 0".into());
            }
            Ok(l)
        })?;
        let depth_cap = s.parsed("depth_cap", 8, |v| match parse_count(v)? {
            n if n as usize > gibbsdim::estimators::MAX_BALL_DEPTH => {
                Err(format!("must not exceed {}", gibbsdim::estimators::MAX_BALL_DEPTH))
            }
            n => Ok(n as usize),
        })?;
        let checks = s.parsed("checks", true, parse_switch)?;
        let criteria = s.parsed("criteria", (1..=12).collect(), |v| {
            if v == "all" {
                return Ok((1..=12).collect());
            }
            let c = parse_list(v, |x| match x.parse::<u32>() {
                Ok(n @ 1..=12) => Ok(n),
                _ => Err(format!("`{x}` is not a criterion number 1-12")),
            })?;
            Ok(c)
        })?;
        let origins = KEYS.iter().map(|&k| (k, s.origin(k))).collect();
        Ok(ExperimentConfig {
            partition,
            measure,
            model,
            orbits,
            length,
            seed,
            checkpoints,
            threads,
            output,
            alpha,
            delta,
            eta,
            k0,
            k_range: (k_lo, k_hi),
            n_range: (n_lo, n_hi),
            window_start,
            position,
            log_digits,
            depth_cap,
            checks,
            criteria,
            base_dir: s.base_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
            origins,
        })
    }

    pub fn origin(&self, key: &str) -> Origin {
        self.origins.get(key).cloned().unwrap_or(Origin::Default)
    }

    pub fn ineq_params(&self) -> IneqParams {
        IneqParams::new(self.alpha, self.delta, self.eta).expect("validated at resolve time")
    }

    /// Loads the partition, reporting failures against the `partition` setting.
    pub fn load_partition(&self) -> Result<PartitionSpec, ConfigError> {
        self.partition
            .load(&self.base_dir)
            .map_err(|e| ConfigError::new(self.origin("partition"), format!("partition: {e}")))
    }

    /// Loads the measure, reporting failures against the `measure` setting.
    pub fn load_measure(&self) -> Result<DigitMeasure, ConfigError> {
        self.measure
            .load(&self.base_dir)
            .map_err(|e| ConfigError::new(self.origin("measure"), format!("measure: {e}")))
    }

    /// Every setting that can change results, as `key=value`, `; `-separated,
    /// in [`KEYS`] order. `threads` is left out: it never changes output bytes.
    pub fn echo(&self) -> String {
        let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        let mut parts = vec![
            format!("partition={}", self.partition),
            format!("measure={}", self.measure),
            format!("model={}", self.model),
            format!("orbits={}", self.orbits),
            format!("length={}", self.length),
            format!("seed={}", self.seed),
            format!("checkpoints={}", list(&self.checkpoints)),
            format!("output={}", self.output.display()),
            format!("alpha={}", self.alpha),
            format!("delta={}", self.delta),
            format!("eta={}", self.eta),
            format!("k0={}", self.k0.map_or_else(|| "scan".to_string(), |k| k.to_string())),
            format!("k_lo={}", self.k_range.0),
            format!("k_hi={}", self.k_range.1),
            format!("n_lo={}", self.n_range.0),
            format!("n_hi={}", self.n_range.1),
            format!("window_start={}", self.window_start),
            format!("position={}", self.position),
            format!(
                "log_digits={}",
                self.log_digits
                    .iter()
                    .map(|x| format!("{x:e}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            format!("depth_cap={}", self.depth_cap),
            format!("checks={}", if self.checks { "on" } else { "off" }),
        ];
        parts.push(format!(
            "criteria={}",
            self.criteria.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
        ));
        parts.join("; ")
    }
}
