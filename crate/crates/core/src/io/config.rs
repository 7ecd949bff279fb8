//! Flat `key = value` run configuration.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::Rational64;

use crate::dynamics::{DynamicsParams, Kernel, Mode};
use crate::light::LightField;
use crate::system::ParticleSystem;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid value for `{key}`: {reason}")]
    Value { key: String, reason: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("cannot read {path}: {reason}")]
    Read { path: String, reason: String },
}

fn bad(key: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Value { key: key.to_string(), reason: reason.to_string() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialShape {
    Line(usize),
    Hexagon(u32),
    Snapshot(PathBuf),
}

impl InitialShape {
    pub fn build(&self) -> Result<ParticleSystem, ConfigError> {
        let system = match self {
            InitialShape::Line(n) => ParticleSystem::line(*n).map_err(|e| bad("initial", e))?,
            InitialShape::Hexagon(r) => ParticleSystem::hexagon(*r),
            InitialShape::Snapshot(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| ConfigError::Read { path: path.display().to_string(), reason: e.to_string() })?;
                ParticleSystem::from_snapshot(&text).map_err(|e| bad("initial", e))?
            }
        };
        if !system.is_connected() {
            return Err(bad("initial", "configuration is not connected"));
        }
        Ok(system)
    }
}

impl fmt::Display for InitialShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialShape::Line(n) => write!(f, "line:{n}"),
            InitialShape::Hexagon(r) => write!(f, "hexagon:{r}"),
            InitialShape::Snapshot(p) => write!(f, "snapshot:{}", p.display()),
        }
    }
}

impl FromStr for InitialShape {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, arg) = s.split_once(':').ok_or("expected line:N, hexagon:R or snapshot:PATH")?;
        match kind.trim() {
            "line" => arg.trim().parse().map(InitialShape::Line).map_err(|e| format!("line size: {e}")),
            "hexagon" => arg.trim().parse().map(InitialShape::Hexagon).map_err(|e| format!("hexagon radius: {e}")),
            "snapshot" => Ok(InitialShape::Snapshot(PathBuf::from(arg.trim()))),
            other => Err(format!("unknown shape `{other}`")),
        }
    }
}

/// Accepts `p/q`, integers and plain decimals such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational64, String> {
    let s = s.trim();
    if let Ok(r) = s.parse::<Rational64>() {
        return Ok(r);
    }
    let (int, frac) = s.split_once('.').ok_or_else(|| format!("`{s}` is not a number"))?;
    if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("`{s}` is not a number"));
    }
    let denom = 10i64.pow(frac.len() as u32);
    let whole = format!("{int}{frac}");
    let numer: i64 = whole.parse().map_err(|_| format!("`{s}` is not a number"))?;
    Ok(Rational64::new(numer, denom))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

/// Every key with its default and meaning.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("initial", "hexagon:5", "line:N, hexagon:R or snapshot:PATH"),
    ("lambda", "4", "bias toward gaining neighbors, > 0"),
    ("dim_prob", "1/4", "move probability of a particle in shadow, in (0, 1]"),
    ("kernel", "uniform6", "uniform6 or uniform_valid"),
    ("mode", "phototax", "phototax or compression"),
    ("light", "true", "light sources below the system on or off"),
    ("iterations", "1000000", "iterations per trial"),
    ("record_interval", "10000", "iterations between trajectory rows"),
    ("snapshot_interval", "0", "iterations between snapshot files, 0 for start and end only"),
    ("seed", "0", "seed of trial 0; trial i uses seed + i"),
    ("trials", "1", "independent trials"),
    ("output_dir", "out", "directory for CSV, snapshot and summary files"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub initial: InitialShape,
    pub lambda: f64,
    pub dim_prob: Rational64,
    pub kernel: Kernel,
    pub mode: Mode,
    pub light_enabled: bool,
    pub iterations: u64,
    pub record_interval: u64,
    pub snapshot_interval: u64,
    pub seed: u64,
    pub trials: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = RunConfig {
            initial: InitialShape::Hexagon(5),
            lambda: 4.0,
            dim_prob: Rational64::new(1, 4),
            kernel: Kernel::Uniform6,
            mode: Mode::Phototax,
            light_enabled: true,
            iterations: 0,
            record_interval: 1,
            snapshot_interval: 0,
            seed: 0,
            trials: 1,
            output_dir: PathBuf::new(),
        };
        for (k, v, _) in KEYS {
            cfg.set(k, v).expect("defaults parse");
        }
        cfg
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let (key, v) = (key.trim(), value.trim());
        match key {
            "initial" => self.initial = v.parse().map_err(|e| bad(key, e))?,
            "lambda" => self.lambda = v.parse().map_err(|e| bad(key, e))?,
            "dim_prob" => self.dim_prob = parse_rational(v).map_err(|e| bad(key, e))?,
            "kernel" => self.kernel = v.parse().map_err(|e| bad(key, e))?,
            "mode" => self.mode = v.parse().map_err(|e| bad(key, e))?,
            "light" => self.light_enabled = parse_bool(v).map_err(|e| bad(key, e))?,
            "iterations" => self.iterations = parse_count(v).map_err(|e| bad(key, e))?,
            "record_interval" => self.record_interval = parse_count(v).map_err(|e| bad(key, e))?,
            "snapshot_interval" => self.snapshot_interval = parse_count(v).map_err(|e| bad(key, e))?,
            "seed" => self.seed = v.parse().map_err(|e| bad(key, e))?,
            "trials" => self.trials = parse_count(v).map_err(|e| bad(key, e))? as usize,
            "output_dir" => self.output_dir = PathBuf::from(v),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Lines of `key = value`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), reason: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.trial_params(0).validate().map_err(|e| {
            let key = if self.lambda.is_finite() && self.lambda > 0.0 { "dim_prob" } else { "lambda" };
            bad(key, e)
        })?;
        if self.record_interval == 0 {
            return Err(bad("record_interval", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(bad("trials", "must be at least 1"));
        }
        Ok(())
    }

    pub fn light(&self) -> LightField {
        LightField { enabled: self.light_enabled }
    }

    pub fn trial_params(&self, trial: usize) -> DynamicsParams {
        DynamicsParams {
            lambda: self.lambda,
            dim_prob: self.dim_prob,
            kernel: self.kernel,
            mode: self.mode,
            seed: self.seed.wrapping_add(trial as u64),
        }
    }

    /// The configuration as parseable text.
    pub fn to_text(&self) -> String {
        let dp = if self.dim_prob.is_integer() {
            self.dim_prob.numer().to_string()
        } else {
            format!("{}/{}", self.dim_prob.numer(), self.dim_prob.denom())
        };
        [
            ("initial", self.initial.to_string()),
            ("lambda", self.lambda.to_string()),
            ("dim_prob", dp),
            ("kernel", self.kernel.to_string()),
            ("mode", self.mode.to_string()),
            ("light", self.light_enabled.to_string()),
            ("iterations", self.iterations.to_string()),
            ("record_interval", self.record_interval.to_string()),
            ("snapshot_interval", self.snapshot_interval.to_string()),
            ("seed", self.seed.to_string()),
            ("trials", self.trials.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
        ]
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
    }
}

/// Integer counts, also written as `30e6` or with `_` separators.
fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.replace('_', "");
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let m: u64 = m.parse().map_err(|_| format!("`{s}` is not a count"))?;
            let e: u32 = e.parse().map_err(|_| format!("`{s}` is not a count"))?;
            10u64.checked_pow(e).and_then(|p| p.checked_mul(m)).ok_or_else(|| format!("`{s}` overflows"))
        }
        None => Err(format!("`{s}` is not a count")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.initial, InitialShape::Hexagon(5));
        assert_eq!(cfg.dim_prob, Rational64::new(1, 4));
        assert_eq!(cfg.iterations, 1_000_000);
        assert!(cfg.validate().is_ok());
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn parses_file_text() {
        let cfg = RunConfig::parse(
            "# compression run\ninitial = line:100\nmode = compression\niterations = 5e6\ndim_prob = 0.5\nlight=off\n",
        )
        .unwrap();
        assert_eq!(cfg.initial, InitialShape::Line(100));
        assert_eq!(cfg.mode, Mode::CompressionOnly);
        assert_eq!(cfg.iterations, 5_000_000);
        assert_eq!(cfg.dim_prob, Rational64::new(1, 2));
        assert!(!cfg.light_enabled);
        assert_eq!(cfg.trial_params(3).seed, 3);
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::parse("lambda = fast").unwrap_err();
        assert!(e.to_string().contains("`lambda`"));
        assert_eq!(RunConfig::parse("colour = red"), Err(ConfigError::UnknownKey("colour".into())));
        assert_eq!(RunConfig::parse("\njust words"), Err(ConfigError::Syntax { line: 2 }));
        let mut cfg = RunConfig::default();
        cfg.set("record_interval", "0").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("record_interval"));
        cfg = RunConfig::default();
        cfg.set("lambda", "-1").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("lambda"));
        cfg = RunConfig::default();
        cfg.set("dim_prob", "3/2").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("dim_prob"));
        assert!(RunConfig::parse("initial = blob:3").unwrap_err().to_string().contains("initial"));
    }

    #[test]
    fn rationals_and_counts() {
        assert_eq!(parse_rational("1/4"), Ok(Rational64::new(1, 4)));
        assert_eq!(parse_rational("1"), Ok(Rational64::from_integer(1)));
        assert_eq!(parse_rational("0.125"), Ok(Rational64::new(1, 8)));
        assert!(parse_rational("abc").is_err());
        assert_eq!(parse_count("30e6"), Ok(30_000_000));
        assert_eq!(parse_count("1_000"), Ok(1000));
        assert!(parse_count("-3").is_err());
    }
}
