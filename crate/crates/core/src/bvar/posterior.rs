use serde::{Deserialize, Serialize};

use super::design::{DesignMatrices, Layout};
use super::prior::MniwPrior;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Closed-form MN–IW posterior `B | Σ ~ MN(B̄, Ω̄, Σ)`, `Σ ~ IW(Ψ̄, ν̄)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MniwPosterior {
    #[serde(with = "crate::linalg::row_major")]
    pub b_bar: Mat,
    /// Posterior row covariance Ω̄ (the inverse of the posterior precision).
    #[serde(with = "crate::linalg::row_major")]
    pub omega_bar: Mat,
    #[serde(with = "crate::linalg::row_major")]
    pub psi_bar: Mat,
    pub nu_bar: f64,
    /// Ω̄⁻¹ = V0⁻¹ + ZᵀZ.
    #[serde(with = "crate::linalg::row_major")]
    pub precision: Mat,
    /// Rows of data, dummy observations included, that entered the update.
    pub t_eff: usize,
    pub layout: Layout,
}

impl MniwPosterior {
    /// Posterior mean of Σ, `Ψ̄ / (ν̄ − m − 1)`.
    pub fn sigma_mean(&self) -> Result<Mat> {
        let m = self.layout.m as f64;
        let denom = self.nu_bar - m - 1.0;
        if denom <= 0.0 {
            return Err(Error::InvalidArgument(format!("posterior mean of Sigma undefined for nu = {}", self.nu_bar)));
        }
        Ok(&self.psi_bar / denom)
    }

    /// Reuse this posterior as the prior for a further update.
    pub fn as_prior(&self) -> Result<MniwPrior> {
        MniwPrior::new(
            self.b_bar.clone(),
            self.omega_bar.clone(),
            self.psi_bar.clone(),
            self.nu_bar,
            None,
            self.layout,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Conjugate update of `prior` with `design` (prior dummy rows are appended).
pub fn posterior_update(prior: &MniwPrior, design: &DesignMatrices) -> Result<MniwPosterior> {
    if prior.layout != design.layout {
        return Err(Error::Dimension(format!(
            "prior layout {:?} does not match design layout {:?}",
            prior.layout, design.layout
        )));
    }
    let data = match &prior.dummy {
        Some(dm) => design.stack(dm)?,
        None => design.clone(),
    };
    let (y, z) = (&data.y, &data.z);

    let prior_prec = linalg::spd_inverse_fast(&prior.row_cov, "prior row covariance")?;
    let ztz = z.transpose() * z;
    let mut precision = &prior_prec + &ztz;
    linalg::symmetrize(&mut precision);
    let chol = linalg::cholesky(&precision, "posterior precision")?;

    let rhs = &prior_prec * &prior.b0 + z.transpose() * y;
    let b_bar = chol.solve(&rhs);

    let resid = y - z * &b_bar;
    let dev = &b_bar - &prior.b0;
    let mut psi_bar = &prior.psi0 + resid.transpose() * &resid + dev.transpose() * &prior_prec * &dev;
    linalg::symmetrize(&mut psi_bar);
    linalg::cholesky(&psi_bar, "posterior scale Psi")?;

    let mut omega_bar = chol.inverse();
    linalg::symmetrize(&mut omega_bar);

    Ok(MniwPosterior {
        b_bar,
        omega_bar,
        psi_bar,
        nu_bar: prior.nu0 + data.rows() as f64,
        precision,
        t_eff: data.rows(),
        layout: prior.layout,
    })
}

/// Prior construction, design and update in one step.
pub fn fit(hyper: &super::SzHyper, train: &crate::panel::Panel) -> Result<MniwPosterior> {
    let prior = super::build_prior(hyper, train)?;
    let design = super::build_design(train, hyper.p)?;
    posterior_update(&prior, &design)
}
