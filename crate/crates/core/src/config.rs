//! Run configuration for the command-line driver, read from a TOML file.
//!
//! Relative paths inside the file resolve against the file's directory.
//! Unknown keys are rejected so every setting that influences a run is
//! visible in the file itself.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bvar::SzHyper;
use crate::compare::DmOptions;
use crate::error::{Error, Result};
use crate::forecast::{BoundKind, PointSource, Support};
use crate::lp::LpConfig;
use crate::metrics::SmapeMode;
use crate::panel::{load_panel, transform, Panel, Schema, TransformOp};
use crate::tuner::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Worker threads; `None` lets the pool decide. Results never depend on it.
    #[serde(default)]
    pub threads: Option<usize>,
    pub data: DataConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub tune: TuneConfig,
    #[serde(default)]
    pub forecast: ForecastConfig,
    #[serde(default)]
    pub evaluate: Option<EvaluateConfig>,
    #[serde(default)]
    pub irf: Option<IrfConfig>,
    #[serde(default)]
    pub coherence: Option<CoherenceConfig>,
    /// Directory the config was read from.
    #[serde(skip)]
    pub base: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    pub column: String,
    pub op: TransformOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub paths: Vec<PathBuf>,
    pub endogenous: Vec<String>,
    #[serde(default)]
    pub exogenous: Vec<String>,
    #[serde(default)]
    pub transforms: Vec<TransformSpec>,
    /// Number of leading rows used for tuning and estimation; defaults to all.
    #[serde(default)]
    pub train_end: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub horizon: usize,
    /// Pinned tuple; takes precedence over a winner file.
    #[serde(default)]
    pub hyper: Option<SzHyper>,
    /// Winner file from a previous `tune`; defaults to `<out>/winner.json`.
    #[serde(default)]
    pub winner: Option<PathBuf>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { horizon: 12, hyper: None, winner: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    /// Missing keys take the default grid values.
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub origins: Option<Vec<usize>>,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    24
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig { grid: GridConfig::default(), origins: None, window: default_window() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub p: Option<Vec<usize>>,
    pub lambda0: Option<Vec<f64>>,
    pub lambda1: Option<Vec<f64>>,
    pub lambda3: Option<Vec<f64>>,
    pub lambda4: Option<Vec<f64>>,
    pub lambda5: Option<Vec<f64>>,
    pub mu5: Option<Vec<f64>>,
    pub mu6: Option<Vec<f64>>,
    pub prior_family: Option<Vec<crate::bvar::PriorFamily>>,
}

impl GridConfig {
    pub fn resolve(&self) -> Grid {
        let d = Grid::default();
        Grid {
            p: self.p.clone().unwrap_or(d.p),
            lambda0: self.lambda0.clone().unwrap_or(d.lambda0),
            lambda1: self.lambda1.clone().unwrap_or(d.lambda1),
            lambda3: self.lambda3.clone().unwrap_or(d.lambda3),
            lambda4: self.lambda4.clone().unwrap_or(d.lambda4),
            lambda5: self.lambda5.clone().unwrap_or(d.lambda5),
            mu5: self.mu5.clone().unwrap_or(d.mu5),
            mu6: self.mu6.clone().unwrap_or(d.mu6),
            prior_family: self.prior_family.clone().unwrap_or(d.prior_family),
        }
    }
}

/// Support for one variable: a named family or explicit limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundSpec {
    Kind(BoundKind),
    Range {
        #[serde(default = "neg_inf")]
        lower: f64,
        #[serde(default = "pos_inf")]
        upper: f64,
    },
}

fn neg_inf() -> f64 {
    f64::NEG_INFINITY
}

fn pos_inf() -> f64 {
    f64::INFINITY
}

impl BoundSpec {
    pub fn support(&self) -> Result<Support> {
        match *self {
            BoundSpec::Kind(k) => Ok(k.into()),
            BoundSpec::Range { lower, upper } => Support::new(lower, upper),
        }
    }
}

/// Exogenous values over the forecast horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExogMode {
    /// The last `H` training rows.
    #[default]
    Pinned,
    /// Realised values from the rows after the training window.
    Observed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastConfig {
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_stable_frac")]
    pub min_stable_frac: f64,
    #[serde(default)]
    pub point: PointSource,
    #[serde(default)]
    pub exog: ExogMode,
    /// Per-variable supports; unlisted variables are unbounded.
    #[serde(default)]
    pub bounds: BTreeMap<String, BoundSpec>,
    /// Trailing observations drawn before the fan.
    #[serde(default = "default_history")]
    pub history: usize,
}

fn default_draws() -> usize {
    1000
}

fn default_gamma() -> f64 {
    0.5
}

fn default_stable_frac() -> f64 {
    0.5
}

fn default_history() -> usize {
    36
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            draws: default_draws(),
            gamma: default_gamma(),
            min_stable_frac: default_stable_frac(),
            point: PointSource::default(),
            exog: ExogMode::default(),
            bounds: BTreeMap::new(),
            history: default_history(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    /// A `point.csv` as written by `forecast`.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    pub models: Vec<ModelFile>,
    #[serde(default = "one")]
    pub mase_period: usize,
    #[serde(default)]
    pub smape_mode: SmapeMode,
    #[serde(default = "default_murphy_alpha")]
    pub murphy_alpha: f64,
    #[serde(default = "default_conf")]
    pub murphy_conf: f64,
    #[serde(default = "default_thetas")]
    pub murphy_points: usize,
    #[serde(default)]
    pub dm: DmOptions,
    /// Parzen truncation for GW; `⌊T^{1/3}⌋` when absent.
    #[serde(default)]
    pub gw_bandwidth: Option<usize>,
    #[serde(default = "default_mcb_alpha")]
    pub mcb_alpha: f64,
}

fn one() -> usize {
    1
}

fn default_murphy_alpha() -> f64 {
    0.5
}

fn default_conf() -> f64 {
    0.95
}

fn default_thetas() -> usize {
    200
}

fn default_mcb_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrfConfig {
    /// Column driving the regime weights.
    pub switch: String,
    /// Shock columns.
    pub shocks: Vec<String>,
    /// Choose `p` by BIC up to this order instead of using `lp.p`.
    #[serde(default)]
    pub bic_max_lag: Option<usize>,
    #[serde(default)]
    pub lp: LpConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceConfig {
    /// Leading series; phase arrows point up when it leads.
    pub x: String,
    pub y: String,
    #[serde(default = "unit")]
    pub dt: f64,
    #[serde(default = "default_reps")]
    pub replications: usize,
    #[serde(default = "default_fdr")]
    pub alpha_fdr: f64,
}

fn unit() -> f64 {
    1.0
}

fn default_reps() -> usize {
    1000
}

fn default_fdr() -> f64 {
    0.10
}

impl RunConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text)?;
        cfg.base = base.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out)
    }

    /// Checks that do not need the data files.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.data.paths.is_empty() {
            return bad("data.paths is empty".into());
        }
        if self.data.endogenous.is_empty() {
            return bad("data.endogenous is empty".into());
        }
        if self.model.horizon == 0 {
            return bad("model.horizon must be a positive integer".into());
        }
        if self.data.train_end == Some(0) {
            return bad("data.train_end must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if let Some(h) = &self.model.hyper {
            h.validate().map_err(|e| Error::Config(format!("model.hyper: {e}")))?;
        }
        let f = &self.forecast;
        if f.draws == 0 {
            return bad("forecast.draws must be positive".into());
        }
        if !(f.gamma > 0.0 && f.gamma < 1.0) {
            return bad(format!("forecast.gamma {} must lie in (0, 1)", f.gamma));
        }
        if !(f.min_stable_frac > 0.0 && f.min_stable_frac <= 1.0) {
            return bad(format!("forecast.min_stable_frac {} must lie in (0, 1]", f.min_stable_frac));
        }
        for (name, b) in &f.bounds {
            if !self.data.endogenous.contains(name) {
                return bad(format!("forecast.bounds names unknown endogenous variable `{name}`"));
            }
            b.support().map_err(|e| Error::Config(format!("forecast.bounds.{name}: {e}")))?;
        }
        if let Some(e) = &self.evaluate {
            if e.models.len() < 2 {
                return bad("evaluate.models needs at least two forecast files".into());
            }
            if e.mase_period == 0 {
                return bad("evaluate.mase_period must be positive".into());
            }
        }
        if let Some(i) = &self.irf {
            i.lp.validate().map_err(|e| Error::Config(format!("irf: {e}")))?;
            if i.shocks.is_empty() {
                return bad("irf.shocks is empty".into());
            }
        }
        if let Some(c) = &self.coherence {
            if !(c.dt > 0.0 && c.dt.is_finite()) {
                return bad("coherence.dt must be positive".into());
            }
        }
        Ok(())
    }

    /// Load the panel and apply the declared transforms in order.
    pub fn panel(&self) -> Result<Panel> {
        let schema = Schema { endogenous: self.data.endogenous.clone(), exogenous: self.data.exogenous.clone() };
        let paths: Vec<PathBuf> = self.data.paths.iter().map(|p| self.resolve(p)).collect();
        let mut panel = load_panel(&paths, &schema)?;
        for t in &self.data.transforms {
            if t.op != TransformOp::None {
                panel = transform(&panel, &t.column, t.op)?;
            }
        }
        Ok(panel)
    }

    /// The panel restricted to the training window.
    pub fn train_panel(&self, panel: &Panel) -> Result<Panel> {
        match self.data.train_end {
            None => Ok(panel.clone()),
            Some(end) if end <= panel.len() => panel.rows(0, end),
            Some(end) => Err(Error::Config(format!("data.train_end {end} exceeds panel length {}", panel.len()))),
        }
    }
}
