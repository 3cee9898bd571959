//! Smooth-transition local projections with identified shocks.
//!
//! For each shock series `u_m` and horizon `h` the response `y_{t+h}` is
//! regressed on a constant, endogenous lags `y_{t−j}` interacted with the
//! regime weights `1 − F(z)` (high) and `F(z)` (low), the shock interacted the
//! same way, lagged shocks as linear controls and an optional trend.
//! `F(z) = 1 / (1 + exp(γ z))` on the standardized switching variable, lagged
//! one period by default.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::{normal_critical, Kernel};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::panel::Panel;

/// Columns with norm at or below this share of the largest column are dropped.
const PRUNE_RTOL: f64 = 1e-10;
/// Either regime holding less weight than this share of the sample is flagged.
const COLLAPSE_SHARE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    #[default]
    None,
    Linear,
}

/// HAC truncation for the coefficient standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "lag")]
pub enum NwLag {
    /// `h + 1` at horizon `h`.
    #[default]
    HorizonPlusOne,
    Fixed(usize),
}

impl NwLag {
    fn at(self, h: usize) -> usize {
        match self {
            NwLag::HorizonPlusOne => h + 1,
            NwLag::Fixed(l) => l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpConfig {
    pub p: usize,
    pub exog_lags: usize,
    pub gamma: f64,
    pub horizon: usize,
    pub trend: Trend,
    pub lag_switching: bool,
    pub conf: f64,
    pub nw_lag: NwLag,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig {
            p: 6,
            exog_lags: 4,
            gamma: 3.0,
            horizon: 24,
            trend: Trend::None,
            lag_switching: true,
            conf: 0.95,
            nw_lag: NwLag::HorizonPlusOne,
        }
    }
}

impl LpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::InvalidArgument("LP lag order must be at least 1".into()));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("curvature gamma = {} must be positive", self.gamma)));
        }
        if !(self.conf > 0.0 && self.conf < 1.0) {
            return Err(Error::InvalidArgument(format!("confidence level {} must lie in (0, 1)", self.conf)));
        }
        Ok(())
    }

    /// Band multiplier; exactly 1.96 at the 95% level.
    pub fn critical_value(&self) -> Result<f64> {
        if self.conf == 0.95 {
            Ok(1.96)
        } else {
            normal_critical(self.conf)
        }
    }

    fn first_row(&self) -> usize {
        self.p.max(self.exog_lags).max(usize::from(self.lag_switching))
    }
}

/// Standardize with the sample mean and the `n − 1` standard deviation.
pub fn standardize_switch(z: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let n = z.len();
    if n < 2 {
        return Err(Error::InsufficientData("switching variable needs at least two observations".into()));
    }
    let mu = z.iter().sum::<f64>() / n as f64;
    let var = z.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1) as f64;
    let sigma = var.sqrt();
    if !(sigma > 1e-12 * mu.abs().max(1.0)) {
        return Err(Error::ConstantSeries("switching variable".into()));
    }
    Ok((z.iter().map(|v| (v - mu) / sigma).collect(), mu, sigma))
}

/// `F(z) = 1 / (1 + exp(γ z))`, evaluated without overflow.
pub fn logistic(z: f64, gamma: f64) -> f64 {
    let a = gamma * z;
    if a > 0.0 {
        let e = (-a).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + a.exp())
    }
}

pub fn logistic_transition(z: &[f64], gamma: f64) -> Vec<f64> {
    z.iter().map(|v| logistic(*v, gamma)).collect()
}

/// Lag order in `1..=p_max` minimising the BIC of a VAR with intercept, all
/// candidates estimated on the sample starting at `p_max`.
pub fn select_lags_bic(endog: &Mat, p_max: usize) -> Result<usize> {
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    let (t, m) = endog.shape();
    if t <= p_max + 1 + m * p_max {
        return Err(Error::InsufficientData(format!("{t} observations too few for BIC search up to {p_max} lags")));
    }
    let n = t - p_max;
    let y = endog.rows(p_max, n).into_owned();
    let mut best = (f64::INFINITY, 1);
    for p in 1..=p_max {
        let x = Mat::from_fn(n, 1 + m * p, |r, c| {
            if c == 0 {
                1.0
            } else {
                let lag = (c - 1) / m + 1;
                endog[(r + p_max - lag, (c - 1) % m)]
            }
        });
        let ls = linalg::least_squares(&x, &y, 1e-12)?;
        if ls.rank < x.ncols() {
            return Err(Error::RankDeficient(format!("VAR({p}) design in BIC search")));
        }
        let resid = &y - &x * &ls.beta;
        let sigma = resid.transpose() * &resid / n as f64;
        let det = sigma.determinant();
        if !(det > 0.0) {
            return Err(Error::RankDeficient(format!("singular residual covariance at p = {p}")));
        }
        let npar = (m * (1 + m * p)) as f64;
        let bic = det.ln() + npar * (n as f64).ln() / n as f64;
        if bic < best.0 {
            best = (bic, p);
        }
    }
    Ok(best.1)
}

/// Column roles of the horizon regression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    Const,
    LagHigh { lag: usize, var: usize },
    LagLow { lag: usize, var: usize },
    ShockHigh,
    ShockLow,
    ShockLag { lag: usize },
    Trend,
}

/// Regression inputs for one shock at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LpDesign {
    pub x: Mat,
    pub y: Mat,
    /// Time index `t` of each row.
    pub rows: Vec<usize>,
    pub columns: Vec<Column>,
}

/// Design for horizon `h`: row `t` uses data dated `t` or earlier only.
pub fn lp_design(endog: &Mat, weights: &[f64], shock: &[f64], h: usize, cfg: &LpConfig) -> Result<LpDesign> {
    let (t_len, m) = endog.shape();
    if weights.len() != t_len || shock.len() != t_len {
        return Err(Error::Dimension("switch weights and shock must match the panel length".into()));
    }
    let t0 = cfg.first_row();
    if t0 + h >= t_len {
        return Err(Error::InsufficientData(format!("horizon {h} leaves no usable rows")));
    }
    let rows: Vec<usize> = (t0..t_len - h).collect();
    let mut columns = vec![Column::Const];
    for lag in 1..=cfg.p {
        for var in 0..m {
            columns.push(Column::LagHigh { lag, var });
        }
    }
    for lag in 1..=cfg.p {
        for var in 0..m {
            columns.push(Column::LagLow { lag, var });
        }
    }
    columns.push(Column::ShockHigh);
    columns.push(Column::ShockLow);
    for lag in 1..=cfg.exog_lags {
        columns.push(Column::ShockLag { lag });
    }
    if cfg.trend == Trend::Linear {
        columns.push(Column::Trend);
    }
    let x = Mat::from_fn(rows.len(), columns.len(), |r, c| {
        let t = rows[r];
        let f = if cfg.lag_switching { weights[t - 1] } else { weights[t] };
        match columns[c] {
            Column::Const => 1.0,
            Column::LagHigh { lag, var } => endog[(t - lag, var)] * (1.0 - f),
            Column::LagLow { lag, var } => endog[(t - lag, var)] * f,
            Column::ShockHigh => shock[t] * (1.0 - f),
            Column::ShockLow => shock[t] * f,
            Column::ShockLag { lag } => shock[t - lag],
            Column::Trend => (t + 1) as f64,
        }
    });
    let y = Mat::from_fn(rows.len(), m, |r, i| endog[(rows[r] + h, i)]);
    Ok(LpDesign { x, y, rows, columns })
}

/// OLS with Newey–West sandwich covariance; dropped columns get NaN.
struct HorizonEstimate {
    beta: Mat,
    /// Covariance of the (ShockHigh, ShockLow) coefficients per response.
    shock_cov: Vec<[[f64; 2]; 2]>,
    dropped: Vec<usize>,
}

fn estimate(design: &LpDesign, nw_lag: usize) -> Result<HorizonEstimate> {
    let (n, d) = design.x.shape();
    let norms: Vec<f64> = (0..d).map(|c| design.x.column(c).norm()).collect();
    let top = norms.iter().fold(0.0_f64, |a, v| a.max(*v));
    let keep: Vec<usize> = (0..d).filter(|&c| norms[c] > PRUNE_RTOL * top).collect();
    let dropped: Vec<usize> = (0..d).filter(|&c| norms[c] <= PRUNE_RTOL * top).collect();
    if keep.len() >= n {
        return Err(Error::InsufficientData(format!("{n} rows for {} regressors", keep.len())));
    }
    let xk = design.x.select_columns(&keep);
    let ls = linalg::least_squares(&xk, &design.y, 1e-10)?;
    if ls.rank < keep.len() {
        return Err(Error::RankDeficient(format!(
            "local projection design has rank {} < {} columns",
            ls.rank,
            keep.len()
        )));
    }
    let xtx_inv = linalg::spd_inverse(&(xk.transpose() * &xk), "LP cross-product")?;
    let resid = &design.y - &xk * &ls.beta;
    let pos = |col: Column| design.columns.iter().position(|c| *c == col).and_then(|i| keep.iter().position(|k| *k == i));
    let idx = [pos(Column::ShockHigh), pos(Column::ShockLow)];
    let mut shock_cov = Vec::with_capacity(design.y.ncols());
    for i in 0..design.y.ncols() {
        let mut scores = xk.clone();
        for r in 0..n {
            let e = resid[(r, i)];
            scores.row_mut(r).scale_mut(e);
        }
        // long_run_covariance demeans; OLS scores have zero mean already
        let meat = crate::compare::long_run_covariance(&scores, Kernel::Bartlett, nw_lag) * n as f64;
        let v = &xtx_inv * meat * &xtx_inv;
        let mut c = [[f64::NAN; 2]; 2];
        for (a, ia) in idx.iter().enumerate() {
            for (b, ib) in idx.iter().enumerate() {
                if let (Some(ia), Some(ib)) = (ia, ib) {
                    c[a][b] = v[(*ia, *ib)];
                }
            }
        }
        shock_cov.push(c);
    }
    let mut beta = Mat::from_element(d, design.y.ncols(), f64::NAN);
    for (r, &c) in keep.iter().enumerate() {
        beta.row_mut(c).copy_from(&ls.beta.row(r));
    }
    Ok(HorizonEstimate { beta, shock_cov, dropped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Weight `1 − F`: high values of the switching variable.
    High,
    /// Weight `F`.
    Low,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::High => "high",
            Regime::Low => "low",
        }
    }
}

/// Impulse responses indexed by (variable, shock, regime, horizon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfSurface {
    pub variables: Vec<String>,
    pub shocks: Vec<String>,
    pub switch_name: String,
    pub switch_mean: f64,
    pub switch_sd: f64,
    pub config: LpConfig,
    pub critical: f64,
    /// Length `n_var · n_shock · 2 · (H+1)`.
    pub point: Vec<f64>,
    pub se: Vec<f64>,
    /// Covariance of the high- and low-regime estimates, `n_var · n_shock · (H+1)`.
    pub cov_high_low: Vec<f64>,
    /// Share of total regime weight on the high regime, per shock.
    pub high_share: Vec<f64>,
    pub collapsed: Vec<bool>,
    /// Per shock and horizon, regressors dropped as numerically zero.
    pub dropped_columns: Vec<Vec<Vec<Column>>>,
}

/// Horizon profile with symmetric bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfProfile {
    pub point: Vec<f64>,
    pub se: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl IrfSurface {
    pub fn horizons(&self) -> usize {
        self.config.horizon + 1
    }

    fn idx(&self, var: usize, shock: usize, regime: Regime, h: usize) -> usize {
        let r = match regime {
            Regime::High => 0,
            Regime::Low => 1,
        };
        ((var * self.shocks.len() + shock) * 2 + r) * self.horizons() + h
    }

    fn check(&self, var: usize, shock: usize) -> Result<()> {
        if var >= self.variables.len() || shock >= self.shocks.len() {
            return Err(Error::InvalidArgument(format!(
                "response ({var}, {shock}) outside {} variables x {} shocks",
                self.variables.len(),
                self.shocks.len()
            )));
        }
        Ok(())
    }

    pub fn extract(&self, var: usize, shock: usize, regime: Regime) -> Result<IrfProfile> {
        self.check(var, shock)?;
        let hs = 0..self.horizons();
        let point: Vec<f64> = hs.clone().map(|h| self.point[self.idx(var, shock, regime, h)]).collect();
        let se: Vec<f64> = hs.map(|h| self.se[self.idx(var, shock, regime, h)]).collect();
        Ok(self.profile(point, se))
    }

    /// Equal-weight average of the two regime responses.
    pub fn regime_average(&self, var: usize, shock: usize) -> Result<IrfProfile> {
        let hi = self.extract(var, shock, Regime::High)?;
        let lo = self.extract(var, shock, Regime::Low)?;
        let base = (var * self.shocks.len() + shock) * self.horizons();
        let point = hi.point.iter().zip(&lo.point).map(|(a, b)| 0.5 * (a + b)).collect();
        let se = (0..self.horizons())
            .map(|h| {
                let v = 0.25 * (hi.se[h].powi(2) + lo.se[h].powi(2) + 2.0 * self.cov_high_low[base + h]);
                v.max(0.0).sqrt()
            })
            .collect();
        Ok(self.profile(point, se))
    }

    fn profile(&self, point: Vec<f64>, se: Vec<f64>) -> IrfProfile {
        let lo = point.iter().zip(&se).map(|(p, s)| p - self.critical * s).collect();
        let hi = point.iter().zip(&se).map(|(p, s)| p + self.critical * s).collect();
        IrfProfile { point, se, lo, hi }
    }
}

/// Estimate the regime-dependent responses of every endogenous variable to
/// every shock column, one model per shock.
pub fn fit_nl_lp(
    endog: &Mat,
    variables: &[String],
    switch: &[f64],
    switch_name: &str,
    shocks: &Mat,
    shock_names: &[String],
    cfg: &LpConfig,
) -> Result<IrfSurface> {
    cfg.validate()?;
    let (t, n_var) = endog.shape();
    if switch.len() != t || shocks.nrows() != t {
        return Err(Error::Dimension("switching variable and shocks must align with the panel".into()));
    }
    if variables.len() != n_var || shock_names.len() != shocks.ncols() || shocks.ncols() == 0 {
        return Err(Error::Dimension("variable or shock names do not match the data".into()));
    }
    let (z, mu, sd) = standardize_switch(switch)?;
    let f = logistic_transition(&z, cfg.gamma);
    let mut surface = fit_with_weights(endog, variables, &f, shocks, shock_names, cfg)?;
    surface.switch_name = switch_name.to_string();
    surface.switch_mean = mu;
    surface.switch_sd = sd;
    Ok(surface)
}

/// Same as [`fit_nl_lp`] with the transition weights `F` supplied directly.
/// The switch metadata is left empty.
pub fn fit_with_weights(
    endog: &Mat,
    variables: &[String],
    f: &[f64],
    shocks: &Mat,
    shock_names: &[String],
    cfg: &LpConfig,
) -> Result<IrfSurface> {
    cfg.validate()?;
    let (t, n_var) = endog.shape();
    if f.len() != t || shocks.nrows() != t {
        return Err(Error::Dimension("transition weights and shocks must align with the panel".into()));
    }
    if variables.len() != n_var || shock_names.len() != shocks.ncols() || shocks.ncols() == 0 {
        return Err(Error::Dimension("variable or shock names do not match the data".into()));
    }
    if cfg.first_row() + 1 >= t {
        return Err(Error::InsufficientData(format!("{t} observations too few for the lag structure")));
    }
    let critical = cfg.critical_value()?;
    let n_shock = shocks.ncols();
    let hz = cfg.horizon + 1;
    let mut point = vec![f64::NAN; n_var * n_shock * 2 * hz];
    let mut se = point.clone();
    let mut cov_high_low = vec![f64::NAN; n_var * n_shock * hz];
    let mut high_share = Vec::with_capacity(n_shock);
    let mut collapsed = Vec::with_capacity(n_shock);
    let mut dropped_columns = Vec::with_capacity(n_shock);

    let t0 = cfg.first_row();
    let used: Vec<f64> = (t0..t).map(|s| if cfg.lag_switching { f[s - 1] } else { f[s] }).collect();
    let low_w: f64 = used.iter().sum();
    let high_w = used.len() as f64 - low_w;
    let share = high_w / used.len() as f64;
    let is_collapsed = share.min(1.0 - share) < COLLAPSE_SHARE;
    if is_collapsed {
        log::warn!("regime collapse: high-regime weight share {share:.4}");
    }

    for m in 0..n_shock {
        let shock: Vec<f64> = shocks.column(m).iter().copied().collect();
        let per_h: Vec<HorizonEstimate> = (0..hz)
            .into_par_iter()
            .map(|h| {
                let design = lp_design(endog, f, &shock, h, cfg)?;
                estimate(&design, cfg.nw_lag.at(h))
            })
            .collect::<Result<_>>()?;
        let template = lp_design(endog, f, &shock, 0, cfg)?.columns;
        let sh = template.iter().position(|c| *c == Column::ShockHigh).expect("shock column");
        let sl = template.iter().position(|c| *c == Column::ShockLow).expect("shock column");
        let mut dropped_h = Vec::with_capacity(hz);
        for (h, est) in per_h.iter().enumerate() {
            for i in 0..n_var {
                let base = (i * n_shock + m) * 2;
                point[base * hz + h] = est.beta[(sh, i)];
                point[(base + 1) * hz + h] = est.beta[(sl, i)];
                se[base * hz + h] = est.shock_cov[i][0][0].sqrt();
                se[(base + 1) * hz + h] = est.shock_cov[i][1][1].sqrt();
                cov_high_low[(i * n_shock + m) * hz + h] = est.shock_cov[i][0][1];
            }
            dropped_h.push(est.dropped.iter().map(|c| template[*c].clone()).collect());
        }
        high_share.push(share);
        collapsed.push(is_collapsed);
        dropped_columns.push(dropped_h);
    }
    Ok(IrfSurface {
        variables: variables.to_vec(),
        shocks: shock_names.to_vec(),
        switch_name: String::new(),
        switch_mean: f64::NAN,
        switch_sd: f64::NAN,
        config: *cfg,
        critical,
        point,
        se,
        cov_high_low,
        high_share,
        collapsed,
        dropped_columns,
    })
}

/// Panel front end: responses are the endogenous block, `switch` names any
/// column and `shocks` name exogenous columns.
pub fn fit_panel(panel: &Panel, switch: &str, shocks: &[String], cfg: &LpConfig) -> Result<IrfSurface> {
    let z = panel.column(switch)?;
    let cols: Vec<Vec<f64>> = shocks.iter().map(|s| panel.column(s)).collect::<Result<_>>()?;
    let u = Mat::from_fn(panel.len(), cols.len(), |t, j| cols[j][t]);
    fit_nl_lp(panel.endog(), panel.endog_names(), &z, switch, &u, shocks, cfg)
}
