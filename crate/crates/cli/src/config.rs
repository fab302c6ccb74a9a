//! Flat `key = value` run configuration with `#` comments.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use twrn_core::fading::{FadingSpec, GainDistribution};
use twrn_core::solvers::{SolverConfig, Strategy};

/// A strategy id in a run, including the selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    Fixed(Strategy),
    Popt,
}

impl StrategyChoice {
    pub fn id(&self) -> &'static str {
        match self {
            StrategyChoice::Fixed(s) => s.id(),
            StrategyChoice::Popt => "popt",
        }
    }
}

impl FromStr for StrategyChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim().to_ascii_lowercase();
        if t == "popt" {
            return Ok(StrategyChoice::Popt);
        }
        t.parse::<Strategy>()
            .map(StrategyChoice::Fixed)
            .map_err(|_| format!("unknown strategy id `{s}`"))
    }
}

/// Parsed configuration of one experiment run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub fading: FadingSpec<f64>,
    pub solver: SolverConfig<f64>,
    pub strategies: Vec<StrategyChoice>,
    pub sweep: Vec<(f64, f64)>,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fading: FadingSpec {
                mean_gain_1r: 1.0,
                mean_gain_2r: 1.0,
                mean_gain_r1: 1.0,
                mean_gain_r2: 1.0,
                n_samples: 20_000,
                seed: 1,
                distribution: GainDistribution::RayleighPowerGain,
            },
            solver: SolverConfig::default(),
            strategies: Vec::new(),
            sweep: Vec::new(),
            output_path: None,
        }
    }
}

/// A configuration problem with its source location.
#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(
                f,
                "line {}: field `{}`: {}",
                self.line, self.field, self.message
            )
        } else {
            write!(f, "field `{}`: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(line: usize, field: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| err(line, field, format!("cannot parse `{value}`: {e}")))
}

impl RunConfig {
    /// Parses the flat text format. Unknown keys are rejected so typos do
    /// not silently fall back to defaults.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(line_no, line, "expected `key = value`"));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "mean_gain_1r" => cfg.fading.mean_gain_1r = parse_num(line_no, key, value)?,
                "mean_gain_2r" => cfg.fading.mean_gain_2r = parse_num(line_no, key, value)?,
                "mean_gain_r1" => cfg.fading.mean_gain_r1 = parse_num(line_no, key, value)?,
                "mean_gain_r2" => cfg.fading.mean_gain_r2 = parse_num(line_no, key, value)?,
                "n_samples" => cfg.fading.n_samples = parse_num(line_no, key, value)?,
                "seed" => cfg.fading.seed = parse_num(line_no, key, value)?,
                "distribution" => {
                    cfg.fading.distribution = match value.to_ascii_lowercase().as_str() {
                        "rayleigh" => GainDistribution::RayleighPowerGain,
                        "static" => GainDistribution::Static,
                        other => {
                            return Err(err(
                                line_no,
                                key,
                                format!("expected `rayleigh` or `static`, got `{other}`"),
                            ))
                        }
                    }
                }
                "eps_inner" => cfg.solver.eps_inner = parse_num(line_no, key, value)?,
                "eps_outer" => cfg.solver.eps_outer = parse_num(line_no, key, value)?,
                "max_iter" => cfg.solver.max_iter = parse_num(line_no, key, value)?,
                "bracket_max" => cfg.solver.bracket_max = parse_num(line_no, key, value)?,
                "strategies" => {
                    cfg.strategies = value
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| {
                            s.parse::<StrategyChoice>()
                                .map_err(|e| err(line_no, key, e))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                }
                "sweep" => {
                    cfg.sweep = value
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|entry| parse_sweep_entry(line_no, entry.trim()))
                        .collect::<Result<Vec<_>, _>>()?;
                }
                "output_path" => cfg.output_path = Some(PathBuf::from(value)),
                other => return Err(err(line_no, other, "unknown key")),
            }
        }
        Ok(cfg)
    }

    /// Structural checks beyond field parsing.
    pub fn validate_for_sweep(&self) -> Result<(), ConfigError> {
        if self.strategies.is_empty() {
            return Err(err(0, "strategies", "at least one strategy is required"));
        }
        if self.sweep.is_empty() {
            return Err(err(0, "sweep", "at least one rate point is required"));
        }
        for &(l1, l2) in &self.sweep {
            if !(l1.is_finite() && l2.is_finite() && l1 >= 0.0 && l2 >= 0.0 && l1 + l2 > 0.0) {
                return Err(err(
                    0,
                    "sweep",
                    format!("invalid rate pair ({l1}, {l2}): rates must be nonnegative and not both zero"),
                ));
            }
        }
        if self.output_path.is_none() {
            return Err(err(0, "output_path", "an output file is required"));
        }
        self.fading
            .validate()
            .map_err(|e| err(0, "fading", e.to_string()))?;
        self.solver
            .validate()
            .map_err(|e| err(0, "solver", e.to_string()))?;
        Ok(())
    }
}

/// One sweep entry: a single value `x` (symmetric pair) or `x:y`.
fn parse_sweep_entry(line: usize, entry: &str) -> Result<(f64, f64), ConfigError> {
    match entry.split_once(':') {
        Some((a, b)) => Ok((
            parse_num(line, "sweep", a.trim())?,
            parse_num(line, "sweep", b.trim())?,
        )),
        None => {
            let v: f64 = parse_num(line, "sweep", entry)?;
            Ok((v, v))
        }
    }
}
