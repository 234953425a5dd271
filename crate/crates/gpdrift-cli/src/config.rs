//! JSON experiment configuration. Unknown keys are a hard error so a typo
//! cannot silently fall back to a default.

use std::collections::BTreeMap;

use gpdrift::simulate::DriftSpec;
use gpdrift::NoiseModel;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Wiener,
    Fbm { h: f64 },
    SubFbm { h: f64 },
    MixedBmFbm { h: f64 },
    TwoFbm { h1: f64, h2: f64 },
}

impl ModelSpec {
    pub fn to_model(&self) -> Result<NoiseModel, CliError> {
        let model = match *self {
            ModelSpec::Wiener => NoiseModel::Wiener,
            ModelSpec::Fbm { h } => NoiseModel::Fbm { h },
            ModelSpec::SubFbm { h } => NoiseModel::SubFbm { h },
            ModelSpec::MixedBmFbm { h } => NoiseModel::MixedBmFbm { h },
            ModelSpec::TwoFbm { h1, h2 } => NoiseModel::TwoFbm { h1, h2 },
        };
        model
            .validate()
            .map_err(|e| CliError::Config(format!("model: {e}")))?;
        Ok(model)
    }
}

pub fn model_label(model: &NoiseModel) -> String {
    match *model {
        NoiseModel::Wiener => "wiener".into(),
        NoiseModel::Fbm { h } => format!("fbm(h={h})"),
        NoiseModel::SubFbm { h } => format!("sub-fbm(h={h})"),
        NoiseModel::MixedBmFbm { h } => format!("mixed-bm-fbm(h={h})"),
        NoiseModel::TwoFbm { h1, h2 } => format!("two-fbm(h1={h1};h2={h2})"),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DriftCfg {
    Linear,
    Power { alpha: f64 },
}

impl DriftCfg {
    pub fn to_drift(&self) -> Result<DriftSpec, CliError> {
        match *self {
            DriftCfg::Linear => Ok(DriftSpec::Linear),
            DriftCfg::Power { alpha } => DriftSpec::power(alpha)
                .map_err(|e| CliError::Config(format!("drift: {e}"))),
        }
    }
}

pub fn drift_label(drift: &DriftSpec) -> String {
    match drift {
        DriftSpec::Linear => "linear".into(),
        DriftSpec::Power { alpha } => format!("power(alpha={alpha})"),
        DriftSpec::Tabulated { .. } => "tabulated".into(),
    }
}

/// One experiment run. `t`/`t_sweep` and `n`/`n_sweep` are alternatives;
/// which of the two each experiment needs is validated in its runner.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub model: ModelSpec,
    pub drift: DriftCfg,
    pub theta: f64,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub t_sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_sweep: Option<Vec<usize>>,
    pub replications: u64,
    pub master_seed: u64,
    /// Monte Carlo estimation scheme: "discrete", "continuous", or "both".
    #[serde(default)]
    pub scheme: Option<String>,
    /// Per-experiment tolerance overrides; every key has a documented default.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output_path: Option<String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        if cfg.replications < 1 {
            return Err(CliError::Config("replications must be >= 1".into()));
        }
        if let Some(sw) = &cfg.t_sweep {
            check_increasing(sw, "t_sweep")?;
        }
        if let Some(sw) = &cfg.n_sweep {
            check_increasing(sw, "n_sweep")?;
        }
        Ok(cfg)
    }

    pub fn require_t(&self) -> Result<f64, CliError> {
        match self.t {
            Some(t) if t > 0.0 => Ok(t),
            Some(t) => Err(CliError::Config(format!("t must be positive, got {t}"))),
            None => Err(CliError::Config(format!(
                "experiment {} requires \"t\"",
                self.experiment
            ))),
        }
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        match self.n {
            Some(n) if n >= 2 => Ok(n),
            Some(n) => Err(CliError::Config(format!("n must be >= 2, got {n}"))),
            None => Err(CliError::Config(format!(
                "experiment {} requires \"n\"",
                self.experiment
            ))),
        }
    }

    pub fn require_t_sweep(&self) -> Result<&[f64], CliError> {
        match self.t_sweep.as_deref() {
            Some(sw) if sw.len() >= 2 => Ok(sw),
            _ => Err(CliError::Config(format!(
                "experiment {} requires \"t_sweep\" with at least two horizons",
                self.experiment
            ))),
        }
    }

    pub fn require_n_sweep(&self) -> Result<&[usize], CliError> {
        match self.n_sweep.as_deref() {
            Some(sw) if !sw.is_empty() => Ok(sw),
            _ => Err(CliError::Config(format!(
                "experiment {} requires a nonempty \"n_sweep\"",
                self.experiment
            ))),
        }
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }
}

fn check_increasing<T: PartialOrd + std::fmt::Debug>(
    sw: &[T],
    name: &str,
) -> Result<(), CliError> {
    if sw.is_empty() {
        return Err(CliError::Config(format!("{name} must be nonempty")));
    }
    for w in sw.windows(2) {
        if !(w[1] > w[0]) {
            return Err(CliError::Config(format!(
                "{name} must be strictly increasing, got {:?} after {:?}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}
