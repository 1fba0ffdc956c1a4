use std::path::{Path, PathBuf};

use normsol::params::two_star;
use normsol::ProblemParams;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {msg}")]
    Invalid { key: String, msg: String },
    #[error("cannot read {path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("cannot parse {path}: {msg}")]
    Parse { path: PathBuf, msg: String },
}

impl ConfigError {
    fn invalid(key: &str, msg: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.into(), msg: msg.into() }
    }

    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) | ConfigError::Invalid { key: k, .. } => Some(k),
            _ => None,
        }
    }
}

/// Every setting a run can take, as read from a file or from flags. `None`
/// means "not given"; defaults are applied by [`Settings::resolve`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub dim: Option<usize>,
    pub q: Option<f64>,
    pub a: Option<f64>,
    pub mu: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub r_max: Option<f64>,
    pub nodes: Option<usize>,
    pub stretch: Option<f64>,
    pub check: Option<String>,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
    pub points: Option<usize>,
    pub eps: Option<f64>,
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
    pub width: Option<f64>,
}

fn float(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(ConfigError::invalid(key, "expected a number")),
    }
}

fn count(key: &str, v: &toml::Value) -> Result<usize, ConfigError> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(ConfigError::invalid(key, "expected a non-negative integer")),
    }
}

fn string(key: &str, v: &toml::Value) -> Result<String, ConfigError> {
    v.as_str().map(str::to_owned).ok_or_else(|| ConfigError::invalid(key, "expected a string"))
}

impl Settings {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| ConfigError::Parse { path: path.into(), msg: e.to_string() })?;
        let mut s = Settings::default();
        for (key, v) in &table {
            let k = key.as_str();
            match k {
                "N" => s.dim = Some(count(k, v)?),
                "q" => s.q = Some(float(k, v)?),
                "a" => s.a = Some(float(k, v)?),
                "mu" => s.mu = Some(float(k, v)?),
                "seed" => s.seed = Some(count(k, v)? as u64),
                "output_dir" => s.output_dir = Some(string(k, v)?.into()),
                "r_max" => s.r_max = Some(float(k, v)?),
                "n" => s.nodes = Some(count(k, v)?),
                "stretch" => s.stretch = Some(float(k, v)?),
                "check" => s.check = Some(string(k, v)?),
                "mu_min" => s.mu_min = Some(float(k, v)?),
                "mu_max" => s.mu_max = Some(float(k, v)?),
                "points" => s.points = Some(count(k, v)?),
                "eps" => s.eps = Some(float(k, v)?),
                "eps_min" => s.eps_min = Some(float(k, v)?),
                "eps_max" => s.eps_max = Some(float(k, v)?),
                "width" => s.width = Some(float(k, v)?),
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.into(), msg: e.to_string() })?;
        Self::from_toml(&text, path)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: Settings) -> Settings {
        Settings {
            dim: over.dim.or(self.dim),
            q: over.q.or(self.q),
            a: over.a.or(self.a),
            mu: over.mu.or(self.mu),
            seed: over.seed.or(self.seed),
            output_dir: over.output_dir.or(self.output_dir),
            r_max: over.r_max.or(self.r_max),
            nodes: over.nodes.or(self.nodes),
            stretch: over.stretch.or(self.stretch),
            check: over.check.or(self.check),
            mu_min: over.mu_min.or(self.mu_min),
            mu_max: over.mu_max.or(self.mu_max),
            points: over.points.or(self.points),
            eps: over.eps.or(self.eps),
            eps_min: over.eps_min.or(self.eps_min),
            eps_max: over.eps_max.or(self.eps_max),
            width: over.width.or(self.width),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let dim = self.dim.unwrap_or(3);
        if dim < 3 {
            return Err(ConfigError::invalid("N", format!("{dim} is below 3; the critical exponent needs N >= 3")));
        }
        let q = self.q.unwrap_or(2.5);
        let ts = two_star(dim);
        if !(q > 2.0 && q < ts) {
            return Err(ConfigError::invalid("q", format!("{q} must lie in (2, 2* = {ts})")));
        }
        let a = self.a.unwrap_or(1.0);
        if !(a > 0.0 && a.is_finite()) {
            return Err(ConfigError::invalid("a", format!("{a} must be positive")));
        }
        let mu = self.mu.unwrap_or(1e-4);
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(ConfigError::invalid("mu", format!("{mu} must be non-negative")));
        }
        let params = ProblemParams::new(dim, q, a, mu).map_err(|e| ConfigError::invalid("q", e.to_string()))?;
        let positive = |key: &str, v: Option<f64>| -> Result<Option<f64>, ConfigError> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => {
                    Err(ConfigError::invalid(key, format!("{x} must be positive")))
                }
                other => Ok(other),
            }
        };
        let grid = GridSpec {
            r_max: positive("r_max", self.r_max)?.unwrap_or(40.0),
            nodes: self.nodes.unwrap_or(20_000),
            stretch: self.stretch.unwrap_or(1.0005),
        };
        if grid.nodes < 16 {
            return Err(ConfigError::invalid("n", "a grid needs at least 16 nodes"));
        }
        if !(grid.stretch >= 1.0) {
            return Err(ConfigError::invalid("stretch", "must be at least 1"));
        }
        let (mu_min, mu_max) = (positive("mu_min", self.mu_min)?, positive("mu_max", self.mu_max)?);
        if let (Some(lo), Some(hi)) = (mu_min, mu_max) {
            if lo >= hi {
                return Err(ConfigError::invalid("mu_min", format!("{lo} is not below mu_max = {hi}")));
            }
        }
        let (eps_min, eps_max) = (positive("eps_min", self.eps_min)?, positive("eps_max", self.eps_max)?);
        if let (Some(lo), Some(hi)) = (eps_min, eps_max) {
            if lo >= hi {
                return Err(ConfigError::invalid("eps_min", format!("{lo} is not below eps_max = {hi}")));
            }
        }
        let points = self.points.unwrap_or(7);
        if points < 5 {
            return Err(ConfigError::invalid("points", "fits need at least 5 points"));
        }
        let check = match self.check {
            Some(c) => Some(c.parse::<Check>().map_err(|m| ConfigError::invalid("check", m))?),
            None => None,
        };
        Ok(RunConfig {
            params,
            grid,
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            seed: self.seed.unwrap_or(0),
            check,
            mu_min,
            mu_max,
            points,
            eps: positive("eps", self.eps)?.unwrap_or(1e-2),
            eps_min: eps_min.unwrap_or(1e-4),
            eps_max: eps_max.unwrap_or(1e-1),
            width: positive("width", self.width)?.unwrap_or(1.0),
        })
    }
}

/// Grid used for explicitly sampled profiles (bubbles, trial functions).
/// Solver output lives on grids chosen by the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_max: f64,
    pub nodes: usize,
    pub stretch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    SmallMuScaling,
    ProfileLimit,
    Bubble,
    Rates,
    LargeMu,
    CriticalBound,
    Testfn,
    CriticalMass,
    Gap,
}

impl std::str::FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            // `lemma21` is kept as an alias of `small-mu`.
            "small-mu" | "lemma21" => Check::SmallMuScaling,
            "profile" => Check::ProfileLimit,
            "bubble" => Check::Bubble,
            "rates" => Check::Rates,
            "large-mu" => Check::LargeMu,
            "critical-bound" => Check::CriticalBound,
            "testfn" => Check::Testfn,
            "critmass" => Check::CriticalMass,
            "gap" => Check::Gap,
            other => {
                return Err(format!(
                    "`{other}` is not one of small-mu, profile, bubble, rates, large-mu, critical-bound, testfn, critmass, gap"
                ))
            }
        })
    }
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::SmallMuScaling => "small-mu",
            Check::ProfileLimit => "profile",
            Check::Bubble => "bubble",
            Check::Rates => "rates",
            Check::LargeMu => "large-mu",
            Check::CriticalBound => "critical-bound",
            Check::Testfn => "testfn",
            Check::CriticalMass => "critmass",
            Check::Gap => "gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ProblemParams,
    pub grid: GridSpec,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub check: Option<Check>,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
    pub points: usize,
    pub eps: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub width: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Settings, ConfigError> {
        Settings::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn defaults_filled() {
        let c = Settings { dim: Some(3), q: Some(2.5), a: Some(1.0), mu: Some(1e-4), ..Default::default() }
            .resolve()
            .unwrap();
        assert_eq!(c.grid.nodes, 20_000);
        assert_eq!(c.points, 7);
        assert_eq!(c.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn rejects_q_at_or_above_critical() {
        let err = Settings { dim: Some(3), q: Some(7.0), ..Default::default() }.resolve().unwrap_err();
        assert_eq!(err.key(), Some("q"));
        let err = Settings { dim: Some(3), q: Some(6.0), ..Default::default() }.resolve().unwrap_err();
        assert_eq!(err.key(), Some("q"));
    }

    #[test]
    fn unknown_key_named() {
        let err = parse("N = 3\nqq = 2.5\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(ref k) if k == "qq"));
    }

    #[test]
    fn override_wins() {
        let file = parse("N = 3\nq = 2.5\nmu = 1e-3\n").unwrap();
        let merged = file.overridden_by(Settings { mu: Some(1e-5), ..Default::default() });
        assert_eq!(merged.mu, Some(1e-5));
        assert_eq!(merged.q, Some(2.5));
    }

    #[test]
    fn integer_accepted_for_float_key() {
        assert_eq!(parse("mu = 1\n").unwrap().mu, Some(1.0));
    }

    #[test]
    fn bad_check_rejected() {
        let err = Settings { check: Some("nope".into()), ..Default::default() }.resolve().unwrap_err();
        assert_eq!(err.key(), Some("check"));
    }
}
