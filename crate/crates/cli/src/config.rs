//! Experiment configuration: one TOML file with a section per concern.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sm_pricer_core::fractional::GyIntegrand;
use sm_pricer_core::sampling::WaitingTimeLaw;
use sm_pricer_core::semimarkov::SeriesConfig;
use sm_pricer_core::{Method, OptionSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub model: Option<ModelConfig>,
    pub option: Option<OptionConfig>,
    #[serde(default)]
    pub series: SeriesConfig,
    pub price: Option<PriceSection>,
    pub converge: Option<ConvergeSection>,
    pub residual: Option<ResidualSection>,
    pub sample: Option<SampleSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    Exponential,
    MittagLeffler,
}

/// Waiting-time law and per-trade log-return variance.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub law: LawKind,
    pub alpha: Option<f64>,
    pub lambda: f64,
    pub sigma2: f64,
}

impl ModelConfig {
    pub fn waiting_law(&self) -> Result<WaitingTimeLaw, CliError> {
        let law = match self.law {
            LawKind::Exponential => WaitingTimeLaw::exponential(self.lambda),
            LawKind::MittagLeffler => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| CliError::Usage("model.alpha is required for the mittag-leffler law".into()))?;
                WaitingTimeLaw::mittag_leffler(alpha, self.lambda)
            }
        };
        law.map_err(CliError::from)
    }

    /// Order of the limit model: `alpha`, or 1 for the exponential law.
    pub fn limit_alpha(&self) -> f64 {
        match self.law {
            LawKind::Exponential => 1.0,
            LawKind::MittagLeffler => self.alpha.unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Option contracts; each field takes a number or a list, and the records
/// cover every combination.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionConfig {
    pub spot: OneOrMany,
    pub strike: OneOrMany,
    pub time_to_maturity: OneOrMany,
    pub age: Option<OneOrMany>,
}

impl OptionConfig {
    pub fn contracts(&self) -> Result<Vec<OptionSpec>, CliError> {
        let ages = self.age.as_ref().map_or(vec![0.0], OneOrMany::values);
        let mut out = Vec::new();
        for &x in &self.spot.values() {
            for &k in &self.strike.values() {
                for &z in &self.time_to_maturity.values() {
                    for &y in &ages {
                        out.push(OptionSpec::new(x, k, z, y)?);
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(CliError::Usage("option section lists no contract".into()));
        }
        Ok(out)
    }

    pub fn single(&self) -> Result<OptionSpec, CliError> {
        let c = self.contracts()?;
        if c.len() != 1 {
            return Err(CliError::Usage("this command takes a single option contract".into()));
        }
        Ok(c[0])
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSection {
    pub methods: Vec<String>,
    #[serde(default = "default_paths")]
    pub n_paths: u64,
    /// Truncation tolerance of the Markov series.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub stream_id: u64,
}

fn default_paths() -> u64 {
    100_000
}

fn default_tolerance() -> f64 {
    1e-12
}

impl PriceSection {
    pub fn parsed_methods(&self) -> Result<Vec<Method>, CliError> {
        if self.methods.is_empty() {
            return Err(CliError::Usage("price.methods is empty".into()));
        }
        self.methods
            .iter()
            .map(|m| m.parse::<Method>().map_err(|_| CliError::Usage(format!("unknown method '{m}'"))))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergeVariant {
    /// Exponential waiting times against Black–Scholes.
    Markov,
    /// Mittag-Leffler waiting times against the limit price.
    MittagLeffler,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub variant: ConvergeVariant,
    pub alpha: Option<f64>,
    pub lambdas: Vec<f64>,
    /// Per-stage variances; `1 / lambda_m` when absent.
    pub sigma2s: Option<Vec<f64>>,
    /// Largest accepted `|lambda_m sigma2_m - 1|`.
    #[serde(default = "default_product_tol")]
    pub product_tol: f64,
    /// `limit-renewal` or `limit-subordination`; picked from the age when
    /// absent.
    pub target: Option<String>,
}

fn default_product_tol() -> f64 {
    1e-12
}

/// One step of the scaling sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingStage {
    pub m: usize,
    pub lambda_m: f64,
    pub sigma2_m: f64,
}

impl ConvergeSection {
    pub fn stages(&self) -> Result<Vec<ScalingStage>, CliError> {
        if self.lambdas.is_empty() {
            return Err(CliError::Usage("converge.lambdas is empty".into()));
        }
        if self.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Usage("converge.lambdas must increase".into()));
        }
        let sigma2s = match &self.sigma2s {
            Some(s) if s.len() != self.lambdas.len() => {
                return Err(CliError::Usage("converge.sigma2s and converge.lambdas differ in length".into()))
            }
            Some(s) => s.clone(),
            None => self.lambdas.iter().map(|l| 1.0 / l).collect(),
        };
        if !(self.product_tol >= 0.0) {
            return Err(CliError::Usage("converge.product_tol must be nonnegative".into()));
        }
        self.lambdas
            .iter()
            .zip(&sigma2s)
            .enumerate()
            .map(|(i, (&lambda_m, &sigma2_m))| {
                if !(lambda_m > 0.0 && sigma2_m > 0.0) {
                    return Err(CliError::Usage("stage rates and variances must be positive".into()));
                }
                if (lambda_m * sigma2_m - 1.0).abs() > self.product_tol {
                    return Err(CliError::Usage(format!(
                        "stage {}: lambda * sigma2 = {} is not within {} of 1",
                        i + 1,
                        lambda_m * sigma2_m,
                        self.product_tol
                    )));
                }
                Ok(ScalingStage {
                    m: i + 1,
                    lambda_m,
                    sigma2_m,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualSection {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub strike: f64,
    #[serde(default = "one")]
    pub maturity: f64,
    #[serde(default = "default_nx")]
    pub n_x: usize,
    #[serde(default = "default_nt")]
    pub n_t: usize,
    #[serde(default = "default_width")]
    pub width_sd: f64,
    #[serde(default = "default_ages")]
    pub ages: Vec<f64>,
    #[serde(default)]
    pub integrand: GyIntegrand,
    /// Directory for CSV dumps of the fields.
    pub field_dir: Option<PathBuf>,
    /// Build fields on all worker threads.
    #[serde(default)]
    pub parallel: bool,
}

impl Default for ResidualSection {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            strike: 1.0,
            maturity: 1.0,
            n_x: default_nx(),
            n_t: default_nt(),
            width_sd: default_width(),
            ages: default_ages(),
            integrand: GyIntegrand::default(),
            field_dir: None,
            parallel: false,
        }
    }
}

/// Smallest node count of either residual grid axis.
pub const MIN_RESIDUAL_NODES: usize = 16;

impl ResidualSection {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_t < MIN_RESIDUAL_NODES || self.n_x < MIN_RESIDUAL_NODES {
            return Err(CliError::Usage(format!(
                "residual grids need at least {MIN_RESIDUAL_NODES} points per axis (got n_x = {}, n_t = {})",
                self.n_x, self.n_t
            )));
        }
        if self.ages.iter().any(|y| !(*y > 0.0)) {
            return Err(CliError::Usage("residual.ages must be positive".into()));
        }
        Ok(())
    }
}

fn default_alpha() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn default_nx() -> usize {
    65
}
fn default_nt() -> usize {
    33
}
fn default_width() -> f64 {
    6.0
}
fn default_ages() -> Vec<f64> {
    vec![0.1, 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleTarget {
    /// Waiting times of `[model]`.
    Waiting,
    /// Residual waiting time of `[model]` at `age`.
    Residual,
    /// Stable subordinator at time `t`.
    Stable,
    /// Inverse stable subordinator at time `t`.
    InverseStable,
    /// First renewal of the limit model at `age`.
    AgedLimitRenewal,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub target: SampleTarget,
    #[serde(default = "default_paths")]
    pub n: u64,
    pub alpha: Option<f64>,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default)]
    pub age: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub stream_id: u64,
    /// Number of semi-Markov price paths of `[model]` to dump as CSV.
    #[serde(default)]
    pub paths: u64,
    pub path_dir: Option<PathBuf>,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default = "one")]
    pub spot: f64,
}

fn default_bins() -> usize {
    50
}

impl SampleSection {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(CliError::Usage(format!("sample.n = {} must be at least 2", self.n)));
        }
        if self.bins == 0 {
            return Err(CliError::Usage("sample.bins must be positive".into()));
        }
        if !(self.t > 0.0 && self.horizon > 0.0 && self.age >= 0.0 && self.spot > 0.0) {
            return Err(CliError::Usage("sample.t, horizon and spot must be positive, age nonnegative".into()));
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn model(&self) -> Result<&ModelConfig, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::Usage("missing [model] section".into()))
    }

    pub fn option(&self) -> Result<&OptionConfig, CliError> {
        self.option.as_ref().ok_or_else(|| CliError::Usage("missing [option] section".into()))
    }
}
