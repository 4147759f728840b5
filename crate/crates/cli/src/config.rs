//! JSON experiment configuration: flat schema, unknown keys rejected.

use serde::Deserialize;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    HeatGap,
    LaneEmden,
    Separable,
    ExtinctionBounds,
    EntropyRate,
    PmeRate,
    Barrier,
    PoincareSuite,
    InequalitySuite,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::HeatGap,
        Experiment::LaneEmden,
        Experiment::Separable,
        Experiment::ExtinctionBounds,
        Experiment::EntropyRate,
        Experiment::PmeRate,
        Experiment::Barrier,
        Experiment::PoincareSuite,
        Experiment::InequalitySuite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::HeatGap => "heat-gap",
            Experiment::LaneEmden => "lane-emden",
            Experiment::Separable => "separable",
            Experiment::ExtinctionBounds => "extinction-bounds",
            Experiment::EntropyRate => "entropy-rate",
            Experiment::PmeRate => "pme-rate",
            Experiment::Barrier => "barrier",
            Experiment::PoincareSuite => "poincare-suite",
            Experiment::InequalitySuite => "inequality-suite",
        }
    }

    /// Theorem anchors this experiment's checks cite.
    pub fn anchors(&self) -> &'static [&'static str] {
        match self {
            Experiment::HeatGap => &["Intrinsic.Poincare", "sect.3.1"],
            Experiment::LaneEmden => &["Elliptic.THM", "lambda.1.p"],
            Experiment::Separable => &["Separable.Solution"],
            Experiment::ExtinctionBounds => &["bounds.T", "cor55"],
            Experiment::EntropyRate => &["GWPI", "asympt.rate1", "Entr.Prod", "exp.decay.norm"],
            Experiment::PmeRate => &["asympt.rate.PME", "AP.exp", "PME.Rates"],
            Experiment::Barrier => &["Lemma.Barriers.1", "Super.Condition", "cond1abc", "Thm.Main.Intro"],
            Experiment::PoincareSuite => &["Intrinsic.Poincare", "GWPI"],
            Experiment::InequalitySuite => &[
                "conv.lambda.p",
                "exp.decay.norm",
                "Hardy.BT",
                "lemma.mean.opt",
                "thm.upper.comp",
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Flat experiment configuration. Every numeric knob is optional; each
/// experiment fills in its documented defaults. Unknown keys are an error.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// "interval" (default) or "ball".
    pub domain: Option<String>,
    pub dim: Option<u32>,
    pub extent: Option<f64>,
    pub n: Option<usize>,
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub p: Option<f64>,
    pub p_list: Option<Vec<f64>>,
    pub dt0: Option<f64>,
    pub max_steps: Option<usize>,
    pub store_every: Option<usize>,
    pub extinction_eps: Option<f64>,
    pub newton_tol: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    /// Default output directory; `--out` overrides it.
    pub out: Option<String>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Schema(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Schema(e) => write!(f, "invalid config: {e}"),
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| ConfigError::Schema(e.to_string()))?;
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if let Some(d) = &cfg.domain {
        if d != "interval" && d != "ball" {
            return Err(ConfigError::Schema(format!(
                "domain must be \"interval\" or \"ball\", got \"{d}\""
            )));
        }
    }
    for (name, v) in [
        ("extent", cfg.extent),
        ("m", cfg.m),
        ("c", cfg.c),
        ("p", cfg.p),
        ("dt0", cfg.dt0),
        ("extinction_eps", cfg.extinction_eps),
        ("newton_tol", cfg.newton_tol),
    ] {
        if let Some(v) = v {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::Schema(format!("{name} must be positive and finite")));
            }
        }
    }
    if let Some(n) = cfg.n {
        if n < 3 {
            return Err(ConfigError::Schema("n must be at least 3".into()));
        }
    }
    if let Some(list) = &cfg.p_list {
        if list.is_empty() || list.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(ConfigError::Schema(
                "p_list must be a non-empty list of positive numbers".into(),
            ));
        }
    }
    if cfg.store_every == Some(0) {
        return Err(ConfigError::Schema("store_every must be at least 1".into()));
    }
    if cfg.samples == Some(0) {
        return Err(ConfigError::Schema("samples must be at least 1".into()));
    }
    Ok(())
}

/// Overrides a numeric field by name; used by `sweep`.
pub fn set_key(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    let parse_f = |v: &str| -> Result<f64, ConfigError> {
        v.parse()
            .map_err(|_| ConfigError::Schema(format!("cannot parse \"{v}\" as a number")))
    };
    let parse_u = |v: &str| -> Result<u64, ConfigError> {
        v.parse()
            .map_err(|_| ConfigError::Schema(format!("cannot parse \"{v}\" as an integer")))
    };
    match key {
        "extent" => cfg.extent = Some(parse_f(value)?),
        "m" => cfg.m = Some(parse_f(value)?),
        "c" => cfg.c = Some(parse_f(value)?),
        "p" => cfg.p = Some(parse_f(value)?),
        "dt0" => cfg.dt0 = Some(parse_f(value)?),
        "extinction_eps" => cfg.extinction_eps = Some(parse_f(value)?),
        "newton_tol" => cfg.newton_tol = Some(parse_f(value)?),
        "n" => cfg.n = Some(parse_u(value)? as usize),
        "dim" => cfg.dim = Some(parse_u(value)? as u32),
        "max_steps" => cfg.max_steps = Some(parse_u(value)? as usize),
        "store_every" => cfg.store_every = Some(parse_u(value)? as usize),
        "seed" => cfg.seed = Some(parse_u(value)?),
        "samples" => cfg.samples = Some(parse_u(value)? as usize),
        other => {
            return Err(ConfigError::Schema(format!(
                "\"{other}\" is not a sweepable numeric field"
            )))
        }
    }
    validate(cfg)
}
