//! Sims–Zha style matrix-normal / inverse-Wishart prior.
//!
//! The prior on the `d×m` coefficient matrix is `B | Σ ~ MN(B0, V0, Σ)` with a
//! diagonal row covariance `V0 = λ0²Ω0`, and `Σ ~ IW(Ψ0, ν0)`. Coefficient
//! groups get these prior standard deviations (before the `Σ` column scaling):
//!
//! ```text
//! lag l of variable j     λ0·λ1 / (s_j · l^λ3)
//! intercept               λ0·λ4
//! exogenous regressor q   λ0·λ5 / s_q
//! ```
//!
//! where `s_j` is the residual standard deviation of a univariate AR(p) fit.
//! Standard deviations are floored at [`STD_FLOOR`] so that zero tightness
//! values (λ5 = 0 is common) stay a proper, if dogmatic, prior.
//!
//! Sum-of-coefficients (μ5) and initial-conditions (μ6) shrinkage enter as
//! dummy observations appended to the data.

use super::design::{DesignMatrices, Layout};
use super::hyper::{PriorFamily, SzHyper};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::panel::Panel;

/// Smallest prior standard deviation used for any coefficient.
pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MniwPrior {
    /// Prior mean `B0` (d×m).
    pub b0: Mat,
    /// Prior row covariance `λ0²Ω0` (d×d, SPD).
    pub row_cov: Mat,
    /// Inverse-Wishart scale `Ψ0` (m×m).
    pub psi0: Mat,
    /// Inverse-Wishart degrees of freedom `ν0`.
    pub nu0: f64,
    /// Dummy observations appended to the data, if any.
    pub dummy: Option<DesignMatrices>,
    pub layout: Layout,
}

impl MniwPrior {
    pub fn new(b0: Mat, row_cov: Mat, psi0: Mat, nu0: f64, dummy: Option<DesignMatrices>, layout: Layout) -> Result<Self> {
        let d = layout.d();
        let m = layout.m;
        if b0.shape() != (d, m) || row_cov.shape() != (d, d) || psi0.shape() != (m, m) {
            return Err(Error::Dimension("prior blocks do not match the regressor layout".into()));
        }
        if !(nu0 > m as f64 + 1.0) {
            return Err(Error::InvalidArgument(format!("nu0 = {nu0} must exceed m + 1 = {}", m + 1)));
        }
        if let Some(dm) = &dummy {
            if dm.layout != layout {
                return Err(Error::Dimension("dummy observations use a different layout".into()));
            }
        }
        crate::linalg::cholesky(&row_cov, "prior row covariance")?;
        crate::linalg::cholesky(&psi0, "prior scale Psi0")?;
        Ok(MniwPrior { b0, row_cov, psi0, nu0, dummy, layout })
    }

    pub fn dummy_rows(&self) -> usize {
        self.dummy.as_ref().map_or(0, |d| d.rows())
    }
}

/// Optional overrides for quantities the tuple does not pin down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorOptions {
    /// Defaults to `m + 2`.
    pub nu0: Option<f64>,
    pub std_floor: f64,
}

impl Default for PriorOptions {
    fn default() -> Self {
        PriorOptions { nu0: None, std_floor: STD_FLOOR }
    }
}

/// Residual standard deviation of an OLS AR(`p`) fit with intercept.
pub fn ar_residual_sd(series: &[f64], p: usize) -> Result<f64> {
    let n = series.len();
    if n <= 2 * p + 1 {
        return Err(Error::InsufficientData(format!(
            "AR({p}) scale estimate needs more than {} observations, have {n}",
            2 * p + 1
        )));
    }
    let rows = n - p;
    let x = Mat::from_fn(rows, p + 1, |r, c| if c == 0 { 1.0 } else { series[r + p - c] });
    let y = Mat::from_fn(rows, 1, |r, _| series[r + p]);
    let scale = series.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    let beta = crate::linalg::least_squares(&x, &y, 1e-12)?.beta;
    let resid = &y - &x * beta;
    let ssr = resid.norm_squared();
    let sd = (ssr / (rows - p - 1) as f64).sqrt();
    if !(sd > 1e-12 * scale) {
        return Err(Error::DegenerateScale(String::new()));
    }
    Ok(sd)
}

fn named_scale(series: &[f64], p: usize, name: &str) -> Result<f64> {
    ar_residual_sd(series, p).map_err(|e| match e {
        Error::DegenerateScale(_) => Error::DegenerateScale(name.to_string()),
        other => other,
    })
}

pub fn build_prior(hyper: &SzHyper, train: &Panel) -> Result<MniwPrior> {
    build_prior_with(hyper, train, &PriorOptions::default())
}

pub fn build_prior_with(hyper: &SzHyper, train: &Panel, opts: &PriorOptions) -> Result<MniwPrior> {
    hyper.validate()?;
    if hyper.prior_family != PriorFamily::MnIw {
        return Err(Error::UnimplementedFamily(hyper.prior_family.to_string()));
    }
    let p = hyper.p;
    let layout = Layout::new(train.m(), p, train.k());
    let (m, k, d) = (layout.m, layout.k, layout.d());
    if train.len() <= p {
        return Err(Error::InsufficientData(format!("{} rows cannot support {p} lags", train.len())));
    }

    let endog = train.endog();
    let exog = train.exog();
    let s_endog: Vec<f64> = (0..m)
        .map(|j| {
            let col: Vec<f64> = endog.column(j).iter().copied().collect();
            named_scale(&col, p, &train.endog_names()[j])
        })
        .collect::<Result<_>>()?;
    let s_exog: Vec<f64> = (0..k)
        .map(|q| {
            let col: Vec<f64> = exog.column(q).iter().copied().collect();
            named_scale(&col, p, &train.exog_names()[q])
        })
        .collect::<Result<_>>()?;

    let floor = opts.std_floor;
    let sd = |v: f64| v.max(floor);
    let mut row_cov = Mat::zeros(d, d);
    row_cov[(0, 0)] = sd(hyper.lambda0 * hyper.lambda4).powi(2);
    for lag in 1..=p {
        let decay = (lag as f64).powf(hyper.lambda3);
        for (j, s) in s_endog.iter().enumerate().take(m) {
            let r = layout.lag_row(lag, j);
            row_cov[(r, r)] = sd(hyper.lambda0 * hyper.lambda1 / (s * decay)).powi(2);
        }
    }
    for (q, s) in s_exog.iter().enumerate().take(k) {
        let r = layout.exog_row(q);
        row_cov[(r, r)] = sd(hyper.lambda0 * hyper.lambda5 / s).powi(2);
    }

    // Random-walk prior mean.
    let mut b0 = Mat::zeros(d, m);
    for j in 0..m {
        b0[(layout.lag_row(1, j), j)] = 1.0;
    }

    let nu0 = opts.nu0.unwrap_or(m as f64 + 2.0);
    let mut psi0 = Mat::zeros(m, m);
    for j in 0..m {
        psi0[(j, j)] = s_endog[j] * s_endog[j] * (nu0 - m as f64 - 1.0);
    }

    let ybar: Vec<f64> = (0..m).map(|j| (0..p).map(|i| endog[(i, j)]).sum::<f64>() / p as f64).collect();
    let mut dy: Vec<Vec<f64>> = Vec::new();
    let mut dz: Vec<Vec<f64>> = Vec::new();
    if hyper.mu5 > 0.0 {
        for j in 0..m {
            let w = hyper.mu5 * ybar[j];
            let mut yr = vec![0.0; m];
            yr[j] = w;
            let mut zr = vec![0.0; d];
            for lag in 1..=p {
                zr[layout.lag_row(lag, j)] = w;
            }
            dy.push(yr);
            dz.push(zr);
        }
    }
    if hyper.mu6 > 0.0 {
        let yr: Vec<f64> = ybar.iter().map(|v| hyper.mu6 * v).collect();
        let mut zr = vec![0.0; d];
        zr[0] = hyper.mu6;
        for lag in 1..=p {
            for j in 0..m {
                zr[layout.lag_row(lag, j)] = hyper.mu6 * ybar[j];
            }
        }
        dy.push(yr);
        dz.push(zr);
    }
    let dummy = if dy.is_empty() {
        None
    } else {
        let n = dy.len();
        let y = Mat::from_fn(n, m, |i, j| dy[i][j]);
        let z = Mat::from_fn(n, d, |i, j| dz[i][j]);
        Some(DesignMatrices::new(y, z, layout)?)
    };

    MniwPrior::new(b0, row_cov, psi0, nu0, dummy, layout)
}
