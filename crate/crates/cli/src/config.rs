//! Run configuration shared by the flag parser and `run --config`.
//!
//! The JSON form is strict: unknown keys are rejected. A summary written by
//! `simulate` (or any JSON output carrying a `config` key) is accepted too and
//! reruns the command that produced it.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Inclusive grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| (self.start + i as f64 * self.step).min(self.stop)).collect()
    }

    fn check_unit(&self, what: &str) -> CliResult<()> {
        if self.start < 0.0 || self.stop > 1.0 {
            return Err(CliError::validation(format!("{what} must lie in [0, 1], got {self}")));
        }
        Ok(())
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("grid must look like start:stop:step, got {s:?}"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?} in grid: {e}"));
        let g = Grid { start: num(a)?, stop: num(b)?, step: num(c)? };
        if !(g.start.is_finite() && g.stop.is_finite() && g.step.is_finite()) {
            return Err(format!("grid {s:?} is not finite"));
        }
        if g.step <= 0.0 || g.stop < g.start {
            return Err(format!("grid {s:?} needs step > 0 and stop >= start"));
        }
        Ok(g)
    }
}

impl TryFrom<String> for Grid {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsymptoticTag {
    Asymptotic,
}

/// Mode count: an integer, or the string "asymptotic" for per-mode n → ∞ values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeSpec {
    Finite(usize),
    Asymptotic(AsymptoticTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FigureName {
    Fig1,
    SmallS,
    PageVsS,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Full,
}

/// Worker count: a positive integer or "auto".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Threads {
    #[default]
    Auto,
    Count(usize),
}

impl Threads {
    pub fn count(self) -> Option<usize> {
        match self {
            Threads::Auto => None,
            Threads::Count(n) => Some(n),
        }
    }

    /// GBS_PAGE_THREADS wins over the configured value.
    pub fn resolve(self) -> CliResult<Option<usize>> {
        match std::env::var("GBS_PAGE_THREADS") {
            Ok(v) => v.parse::<Threads>().map(Threads::count).map_err(|e| CliError::validation(format!("GBS_PAGE_THREADS: {e}"))),
            Err(_) => Ok(self.count()),
        }
    }
}

impl FromStr for Threads {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("thread count must be \"auto\" or a positive integer, got {s:?}")),
            Ok(n) => Ok(Threads::Count(n)),
        }
    }
}

impl TryFrom<String> for Threads {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Threads> for String {
    fn from(t: Threads) -> String {
        match t {
            Threads::Auto => "auto".to_string(),
            Threads::Count(n) => n.to_string(),
        }
    }
}

/// Squeezing: one strength for every mode or one per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SqueezingSpec {
    Equal(f64),
    PerMode(Vec<f64>),
}

fn default_tol() -> f64 {
    gbs_page::pagecurve::DEFAULT_TOL
}

fn default_format() -> Format {
    Format::Csv
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    pub alpha: Vec<u32>,
    pub s: f64,
    pub n: ModeSpec,
    pub r_grid: Grid,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub i_max: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub r: Option<f64>,
    pub s: SqueezingSpec,
    pub alphas: Vec<u32>,
    pub samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub threads: Threads,
    /// Also record Tr W^i for i ≤ moments in the per-sample output.
    #[serde(default)]
    pub moments: Option<usize>,
    #[serde(default)]
    pub out_prefix: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    pub alpha: u32,
    pub regime: RegimeArg,
    pub r_grid: Grid,
    #[serde(default)]
    pub s_vector: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    pub name: FigureName,
    pub scale: Scale,
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub threads: Threads,
    /// Overrides the per-point sample count implied by the scale.
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default = "default_true")]
    pub gnuplot: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Analytic(AnalyticConfig),
    Simulate(SimulateConfig),
    Limits(LimitsConfig),
    Figure(FigureConfig),
}

fn check_alpha_list(alphas: &[u32]) -> CliResult<()> {
    if alphas.is_empty() {
        return Err(CliError::validation("at least one alpha is required"));
    }
    if alphas.contains(&0) {
        return Err(CliError::validation("alpha must be >= 1 (1 = von Neumann)"));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        match self {
            RunConfig::Analytic(c) => {
                check_alpha_list(&c.alpha)?;
                c.r_grid.check_unit("r grid")?;
                if !c.s.is_finite() {
                    return Err(CliError::validation("s must be finite"));
                }
                if !(c.tol > 0.0) {
                    return Err(CliError::validation("tol must be positive"));
                }
                if c.n == ModeSpec::Finite(0) {
                    return Err(CliError::validation("n must be positive"));
                }
                if c.i_max == Some(0) {
                    return Err(CliError::validation("i-max must be positive"));
                }
            }
            RunConfig::Simulate(c) => {
                check_alpha_list(&c.alphas)?;
                if c.n == 0 || c.samples == 0 {
                    return Err(CliError::validation("n and samples must be positive"));
                }
                match (c.k, c.r) {
                    (Some(_), Some(_)) => return Err(CliError::validation("give either k or r, not both")),
                    (None, None) => return Err(CliError::validation("one of k or r is required")),
                    (None, Some(r)) if !(0.0..=1.0).contains(&r) => {
                        return Err(CliError::validation(format!("r must lie in [0, 1], got {r}")))
                    }
                    _ => {}
                }
                let k = resolved_k(c);
                if k == 0 || k > c.n {
                    return Err(CliError::validation(format!("need 1 <= k <= n, got k = {k}, n = {}", c.n)));
                }
                match &c.s {
                    SqueezingSpec::Equal(s) if !s.is_finite() => return Err(CliError::validation("s must be finite")),
                    SqueezingSpec::PerMode(v) if v.len() != c.n => {
                        return Err(CliError::validation(format!("got {} squeezing values for n = {}", v.len(), c.n)))
                    }
                    SqueezingSpec::PerMode(_) if c.moments.is_some() => {
                        return Err(CliError::validation("moments need equal squeezing"))
                    }
                    _ => {}
                }
                if c.moments == Some(0) {
                    return Err(CliError::validation("moments must be positive"));
                }
            }
            RunConfig::Limits(c) => {
                c.r_grid.check_unit("r grid")?;
                if c.alpha == 0 {
                    return Err(CliError::validation("alpha must be >= 1"));
                }
                if c.s_vector.is_some() && (c.alpha < 2 || c.regime != RegimeArg::Small) {
                    return Err(CliError::validation(
                        "--s-vector gives the unequal small-squeezing limit: needs alpha >= 2 and --regime small",
                    ));
                }
            }
            RunConfig::Figure(c) => {
                if c.samples == Some(0) {
                    return Err(CliError::validation("samples must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Parses a config file; a document with a top-level `config` key (an
    /// emitted summary) is reduced to that key first.
    pub fn from_json_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let json_err = |source| CliError::Json { path: path.to_path_buf(), source };
        let mut value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(json_err)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn resolved_k(c: &SimulateConfig) -> usize {
    match (c.k, c.r) {
        (Some(k), _) => k,
        (None, Some(r)) => (r * c.n as f64).round() as usize,
        (None, None) => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_inclusive() {
        let g: Grid = "0:1:0.25".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Grid = "0.05:0.95:0.05".parse().unwrap();
        assert_eq!(g.points().len(), 19);
        assert!((g.points()[18] - 0.95).abs() < 1e-12);
        let g: Grid = "0:1:0.02".parse().unwrap();
        assert_eq!(g.points().len(), 51);
        assert!("0:1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("1:0:0.1".parse::<Grid>().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let ok = r#"{"command":"limits","alpha":2,"regime":"large","r_grid":"0:1:0.5"}"#;
        assert!(serde_json::from_str::<RunConfig>(ok).is_ok());
        let bad = r#"{"command":"limits","alpha":2,"regime":"large","r_grid":"0:1:0.5","colour":1}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = RunConfig::Simulate(SimulateConfig {
            n: 10,
            k: None,
            r: Some(0.3),
            s: SqueezingSpec::PerMode(vec![0.1; 10]),
            alphas: vec![1, 2],
            samples: 3,
            seed: 9,
            threads: Threads::Count(2),
            moments: None,
            out_prefix: Some("x/run".into()),
        });
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let a = RunConfig::Analytic(AnalyticConfig {
            alpha: vec![1],
            s: 0.5,
            n: ModeSpec::Asymptotic(AsymptoticTag::Asymptotic),
            r_grid: "0:1:0.1".parse().unwrap(),
            tol: 1e-6,
            i_max: None,
            out: None,
            format: Format::Json,
        });
        let text = serde_json::to_string(&a).unwrap();
        assert!(text.contains("\"n\":\"asymptotic\""));
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), a);
    }

    #[test]
    fn thread_spec() {
        assert_eq!("auto".parse::<Threads>().unwrap(), Threads::Auto);
        assert_eq!("3".parse::<Threads>().unwrap(), Threads::Count(3));
        assert!("0".parse::<Threads>().is_err());
        assert!("many".parse::<Threads>().is_err());
    }
}
