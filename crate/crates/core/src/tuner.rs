//! Expanding-window grid search over the prior hyperparameters.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bvar::{fit, ParamDraw, PriorFamily, SzHyper};
use crate::error::{Error, Result};
use crate::forecast::point_forecast;
use crate::panel::{pinned_exog, Panel};

/// Pooled multivariate RMSE, `sqrt(Σ‖e‖² / (m·|origins|))`.
pub fn mrmse(errors: &[Vec<f64>]) -> Result<f64> {
    let first = errors.first().ok_or_else(|| Error::InvalidArgument("no forecast errors".into()))?;
    let m = first.len();
    if m == 0 || errors.iter().any(|e| e.len() != m) {
        return Err(Error::Dimension("error vectors must share a positive length".into()));
    }
    let ss: f64 = errors.iter().flat_map(|e| e.iter()).map(|v| v * v).sum();
    Ok((ss / (m * errors.len()) as f64).sqrt())
}

/// Default origins: the last `window` training lengths `t` with `t + h ≤ T`.
pub fn default_origins(len: usize, horizon: usize, window: usize) -> Vec<usize> {
    if horizon >= len {
        return Vec::new();
    }
    let last = len - horizon;
    let first = last.saturating_sub(window.saturating_sub(1)).max(1);
    (first..=last).collect()
}

/// Errors `y_{t+h} − ŷ_{t+h|t}` for each origin `t` (the number of training
/// rows). Each fit sees rows `1..=t` only; the exogenous path is pinned to
/// the last `h` training rows.
pub fn origin_errors(panel: &Panel, hyper: &SzHyper, horizon: usize, origins: &[usize]) -> Result<Vec<Vec<f64>>> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    if origins.is_empty() {
        return Err(Error::InvalidArgument("origin set is empty".into()));
    }
    origins
        .iter()
        .map(|&t| {
            if t < hyper.p + 1 || t + horizon > panel.len() || horizon > t {
                return Err(Error::InsufficientData(format!(
                    "origin {t} infeasible for p={} h={horizon} T={}",
                    hyper.p,
                    panel.len()
                )));
            }
            let train = panel.rows(0, t)?;
            let post = fit(hyper, &train)?;
            let mean = ParamDraw::posterior_mean(&post)?;
            if !mean.stable {
                return Err(Error::UnstablePosterior(mean.spectral_radius));
            }
            let path = point_forecast(&mean, &train, &pinned_exog(&train, horizon)?, horizon)?;
            let actual = panel.endog().row(t + horizon - 1);
            Ok((0..panel.m()).map(|j| actual[j] - path[(horizon - 1, j)]).collect())
        })
        .collect()
}

pub fn evaluate_candidate(panel: &Panel, hyper: &SzHyper, horizon: usize, origins: &[usize]) -> Result<f64> {
    mrmse(&origin_errors(panel, hyper, horizon, origins)?)
}

/// Candidate values per hyperparameter; the search covers the cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub p: Vec<usize>,
    pub lambda0: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda3: Vec<f64>,
    pub lambda4: Vec<f64>,
    pub lambda5: Vec<f64>,
    pub mu5: Vec<f64>,
    pub mu6: Vec<f64>,
    #[serde(default = "default_families")]
    pub prior_family: Vec<PriorFamily>,
}

fn default_families() -> Vec<PriorFamily> {
    vec![PriorFamily::MnIw]
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            p: vec![1, 2, 3, 4],
            lambda0: vec![0.2, 0.4, 0.6, 0.8],
            lambda1: vec![0.05, 0.1, 0.2],
            lambda3: vec![1.0, 2.0, 3.0],
            lambda4: vec![0.1, 0.5],
            lambda5: vec![0.0, 0.5, 1.0],
            mu5: vec![0.0, 0.5, 1.0],
            mu6: vec![0.0, 0.5, 1.0],
            prior_family: default_families(),
        }
    }
}

impl Grid {
    /// Grid containing exactly one tuple.
    pub fn single(h: &SzHyper) -> Self {
        Grid {
            p: vec![h.p],
            lambda0: vec![h.lambda0],
            lambda1: vec![h.lambda1],
            lambda3: vec![h.lambda3],
            lambda4: vec![h.lambda4],
            lambda5: vec![h.lambda5],
            mu5: vec![h.mu5],
            mu6: vec![h.mu6],
            prior_family: vec![h.prior_family],
        }
    }

    /// Distinct tuples of the cartesian product in lexicographic order.
    pub fn candidates(&self) -> Vec<SzHyper> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &l0 in &self.lambda0 {
                for &l1 in &self.lambda1 {
                    for &l3 in &self.lambda3 {
                        for &l4 in &self.lambda4 {
                            for &l5 in &self.lambda5 {
                                for &m5 in &self.mu5 {
                                    for &m6 in &self.mu6 {
                                        for &fam in &self.prior_family {
                                            let mut h = SzHyper::new(p, l0, l1, l3, l4, l5, m5, m6);
                                            h.prior_family = fam;
                                            out.push(h);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.lex_cmp(b));
        out.dedup_by(|a, b| a.lex_cmp(b) == Ordering::Equal);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub grid: Grid,
    pub horizon: usize,
    /// Explicit origins; when absent the last `window` feasible ones are used.
    #[serde(default)]
    pub origins: Option<Vec<usize>>,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    24
}

impl GridSpec {
    pub fn new(grid: Grid, horizon: usize) -> Self {
        GridSpec { grid, horizon, origins: None, window: default_window() }
    }

    pub fn resolve_origins(&self, panel: &Panel) -> Result<Vec<usize>> {
        let origins = match &self.origins {
            Some(o) => o.clone(),
            None => default_origins(panel.len(), self.horizon, self.window),
        };
        if origins.is_empty() {
            return Err(Error::InsufficientData("no feasible forecast origins".into()));
        }
        if let Some(&bad) = origins.iter().find(|&&t| t == 0 || t + self.horizon > panel.len()) {
            return Err(Error::InvalidArgument(format!(
                "origin {bad} + horizon {} exceeds panel length {}",
                self.horizon,
                panel.len()
            )));
        }
        Ok(origins)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub hyper: SzHyper,
    /// `+∞` for failed candidates.
    pub score: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: SzHyper,
    pub score: f64,
    pub horizon: usize,
    pub origins: Vec<usize>,
    pub leaderboard: Vec<LeaderboardEntry>,
}

/// Exhaustive search. Ties on the score go to the lexicographically smaller
/// tuple; candidates that fail at any origin score `+∞`.
pub fn grid_search(panel: &Panel, spec: &GridSpec) -> Result<TuneResult> {
    let candidates = spec.grid.candidates();
    if candidates.is_empty() {
        return Err(Error::Config("hyperparameter grid is empty".into()));
    }
    let origins = spec.resolve_origins(panel)?;
    let mut leaderboard: Vec<LeaderboardEntry> = candidates
        .par_iter()
        .map(|h| match evaluate_candidate(panel, h, spec.horizon, &origins) {
            Ok(score) if score.is_finite() => LeaderboardEntry { hyper: *h, score, failure: None },
            Ok(score) => LeaderboardEntry { hyper: *h, score: f64::INFINITY, failure: Some(format!("non-finite score {score}")) },
            Err(e) => LeaderboardEntry { hyper: *h, score: f64::INFINITY, failure: Some(e.to_string()) },
        })
        .collect();
    leaderboard.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.hyper.lex_cmp(&b.hyper)));
    let top = &leaderboard[0];
    if !top.score.is_finite() {
        return Err(Error::AllCandidatesFailed);
    }
    Ok(TuneResult { best: top.hyper, score: top.score, horizon: spec.horizon, origins, leaderboard })
}
