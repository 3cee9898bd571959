//! Synthetic VAR-X data generator for tests, examples and smoke runs.

use rand_distr::{Distribution, StandardNormal};

use crate::bvar::{stability, stream_rng};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::panel::{Panel, YearMonth};

/// `y_t = μ + Σ Φ_l y_{t−l} + Γ x_t + u_t`, `u_t ~ N(0, Σ)`, with each
/// exogenous column an independent Gaussian AR(1).
#[derive(Debug, Clone, PartialEq)]
pub struct VarDgp {
    pub mu: Vec<f64>,
    pub phi: Vec<Mat>,
    pub gamma: Mat,
    pub sigma: Mat,
    pub exog_rho: f64,
    pub exog_sd: f64,
    /// Discarded warm-up steps before the first returned row.
    pub burn: usize,
}

impl VarDgp {
    pub fn new(mu: Vec<f64>, phi: Vec<Mat>, gamma: Mat, sigma: Mat) -> Result<Self> {
        let m = mu.len();
        if m == 0 || phi.is_empty() {
            return Err(Error::InvalidArgument("generator needs m >= 1 and p >= 1".into()));
        }
        if phi.iter().any(|f| f.shape() != (m, m)) || gamma.nrows() != m || sigma.shape() != (m, m) {
            return Err(Error::Dimension("generator blocks disagree on m".into()));
        }
        linalg::noise_factor(&sigma, "generator Sigma")?;
        Ok(VarDgp { mu, phi, gamma, sigma, exog_rho: 0.7, exog_sd: 1.0, burn: 200 })
    }

    /// A fixed stable generator with `m` endogenous variables, `p` lags and
    /// `k` exogenous regressors.
    pub fn toy(m: usize, p: usize, k: usize) -> Self {
        let mu = (0..m).map(|j| 0.1 * (j + 1) as f64).collect();
        let phi = (1..=p)
            .map(|lag| {
                Mat::from_fn(m, m, |i, j| {
                    if lag == 1 {
                        if i == j {
                            0.4
                        } else {
                            0.05 / m as f64
                        }
                    } else if i == j {
                        0.15 / lag as f64
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        let gamma = Mat::from_fn(m, k, |i, q| 0.3 - 0.1 * ((i + 2 * q) % 4) as f64);
        let sigma = Mat::from_fn(m, m, |i, j| if i == j { 0.5 } else { 0.1 });
        VarDgp::new(mu, phi, gamma, sigma).expect("toy generator is well formed")
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn p(&self) -> usize {
        self.phi.len()
    }

    pub fn k(&self) -> usize {
        self.gamma.ncols()
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(stability::classify(&self.phi)?.0)
    }

    /// `t` rows of `(endog, exog)` after the warm-up.
    pub fn simulate_blocks(&self, t: usize, seed: u64) -> Result<(Mat, Mat)> {
        let (m, p, k) = (self.m(), self.p(), self.k());
        let chol = linalg::noise_factor(&self.sigma, "generator Sigma")?;
        let mut rng = stream_rng(seed, u64::MAX);
        let n = self.burn + t;
        let mut y = Mat::zeros(n + p, m);
        let mut x = Mat::zeros(n + p, k);
        let innov_sd = self.exog_sd * (1.0 - self.exog_rho * self.exog_rho).max(0.0).sqrt();
        for r in p..n + p {
            for q in 0..k {
                let e: f64 = StandardNormal.sample(&mut rng);
                x[(r, q)] = self.exog_rho * x[(r - 1, q)] + innov_sd * e;
            }
            let z: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            for i in 0..m {
                let mut v = self.mu[i];
                for (l, f) in self.phi.iter().enumerate() {
                    for j in 0..m {
                        v += f[(i, j)] * y[(r - l - 1, j)];
                    }
                }
                for q in 0..k {
                    v += self.gamma[(i, q)] * x[(r, q)];
                }
                for j in 0..=i {
                    v += chol[(i, j)] * z[j];
                }
                y[(r, i)] = v;
            }
        }
        let start = p + self.burn;
        Ok((y.rows(start, t).into_owned(), x.rows(start, t).into_owned()))
    }

    /// Simulated panel with names `y1..`, `x1..` starting January 2000.
    pub fn simulate(&self, t: usize, seed: u64) -> Result<Panel> {
        let (y, x) = self.simulate_blocks(t, seed)?;
        Panel::from_blocks(y, x)
    }

    /// Simulated panel with explicit start month and names.
    pub fn simulate_named(
        &self,
        t: usize,
        seed: u64,
        start: YearMonth,
        endog_names: Vec<String>,
        exog_names: Vec<String>,
    ) -> Result<Panel> {
        let (y, x) = self.simulate_blocks(t, seed)?;
        Panel::from_start(start, y, x, endog_names, exog_names)
    }
}
