//! Wald-type equal-predictive-accuracy tests on loss differentials.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::hac::{long_run_covariance, Kernel};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Relative eigenvalue cut-off below which the HAC matrix counts as singular.
const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldTestResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub kernel: Kernel,
    pub lag: usize,
    pub correction: String,
    /// Zero long-run variance: no information to test with.
    pub degenerate: bool,
    /// The HAC matrix was singular and a pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

/// Upper tail of the chi-square distribution.
pub fn chi2_sf(x: f64, dof: usize) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let d = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    d.sf(x).clamp(0.0, 1.0)
}

struct Quadratic {
    value: f64,
    degenerate: bool,
    pseudo: bool,
}

/// `d̄ᵀ Ω⁻¹ d̄` through a symmetric eigendecomposition, dropping null
/// directions. A mean with mass in the null space of `Ω` gives `+∞`.
fn quadratic_form(mean: &nalgebra::DVector<f64>, omega: &Mat, data_scale: f64) -> Quadratic {
    let eig = omega.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let scale = mean.amax();
    // variances at rounding level relative to the data count as zero
    if !(top > (1e-12 * data_scale).powi(2)) {
        let zero = !(scale > 1e-12 * data_scale);
        return Quadratic { value: if zero { 0.0 } else { f64::INFINITY }, degenerate: true, pseudo: false };
    }
    let mut value = 0.0;
    let mut pseudo = false;
    let mut null_mass = 0.0;
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        let proj = eig.eigenvectors.column(i).dot(mean);
        if ev > SINGULAR_RTOL * top {
            value += proj * proj / ev;
        } else {
            pseudo = true;
            null_mass = f64::max(null_mass, proj.abs());
        }
    }
    if pseudo && null_mass > 1e-10 * scale {
        log::warn!("loss differential has a non-zero mean in a zero-variance direction");
    }
    Quadratic { value, degenerate: false, pseudo }
}

fn wald(d: &Mat, kernel: Kernel, lag: usize, factor: f64, correction: String) -> Result<WaldTestResult> {
    let (t, r) = d.shape();
    if r == 0 {
        return Err(Error::InvalidArgument("no loss differentials".into()));
    }
    if t <= r {
        return Err(Error::InsufficientData(format!("{t} periods for {r} differentials")));
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite loss differential".into()));
    }
    let mean = d.row_mean().transpose();
    let omega = long_run_covariance(d, kernel, lag);
    let q = quadratic_form(&mean, &omega, d.amax());
    let statistic = t as f64 * q.value * factor;
    let p_value = if q.degenerate && q.value == 0.0 { 1.0 } else { chi2_sf(statistic, r) };
    Ok(WaldTestResult {
        statistic,
        dof: r,
        p_value,
        kernel,
        lag,
        correction,
        degenerate: q.degenerate,
        pseudo_inverse: q.pseudo,
    })
}

/// How the `k` models' losses are turned into `k − 1` differentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `L_i − L_{i+1}`.
    #[default]
    Adjacent,
    /// `L_1 − L_i`.
    AllVsFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DmOptions {
    /// Block length; the HAC uses rectangular weights up to lag `q − 1`.
    pub q: usize,
    pub pairing: Pairing,
    /// Apply the `(T + 1 − 2q + q(q−1)/T) / T` small-sample factor.
    pub small_sample: bool,
}

impl Default for DmOptions {
    fn default() -> Self {
        DmOptions { q: 1, pairing: Pairing::Adjacent, small_sample: true }
    }
}

pub fn loss_differentials(losses: &Mat, pairing: Pairing) -> Result<Mat> {
    let (t, k) = losses.shape();
    if k < 2 {
        return Err(Error::InvalidArgument("need losses from at least two models".into()));
    }
    Ok(Mat::from_fn(t, k - 1, |r, c| match pairing {
        Pairing::Adjacent => losses[(r, c)] - losses[(r, c + 1)],
        Pairing::AllVsFirst => losses[(r, 0)] - losses[(r, c + 1)],
    }))
}

/// Multivariate Diebold–Mariano test on a `T×k` loss matrix.
pub fn dm_multivariate(losses: &Mat, opts: &DmOptions) -> Result<WaldTestResult> {
    if opts.q == 0 {
        return Err(Error::InvalidArgument("block length q must be at least 1".into()));
    }
    let d = loss_differentials(losses, opts.pairing)?;
    let t = d.nrows() as f64;
    let q = opts.q as f64;
    let (factor, label) = if opts.small_sample {
        let c = (t + 1.0 - 2.0 * q + q * (q - 1.0) / t) / t;
        (c, format!("small-sample factor {c:.6}"))
    } else {
        (1.0, "none".to_string())
    };
    wald(&d, Kernel::Rectangular, opts.q - 1, factor, label)
}

/// Default Parzen truncation `⌊T^{1/3}⌋`.
pub fn gw_bandwidth(t: usize) -> usize {
    let mut l = (t as f64).cbrt().floor() as usize;
    // guard against cbrt rounding just below an integer
    while ((l + 1) * (l + 1) * (l + 1)) <= t {
        l += 1;
    }
    l
}

/// Unconditional multivariate Giacomini–White test on a `T×r` differential matrix.
pub fn gw_unconditional(diffs: &Mat, bandwidth: Option<usize>) -> Result<WaldTestResult> {
    let lag = bandwidth.unwrap_or_else(|| gw_bandwidth(diffs.nrows()));
    wald(diffs, Kernel::Parzen, lag, 1.0, "none".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_losses_are_degenerate() {
        let l = Mat::from_fn(30, 2, |t, _| (t as f64).sin().abs());
        let r = dm_multivariate(&l, &DmOptions::default()).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.statistic, 0.0);
        let g = gw_unconditional(&Mat::zeros(30, 1), None).unwrap();
        assert!(g.degenerate);
        assert_eq!(g.p_value, 1.0);
    }

    #[test]
    fn constant_nonzero_gap_rejects() {
        let l = Mat::from_fn(30, 2, |t, c| (t as f64).sin().abs() + c as f64);
        let r = dm_multivariate(&l, &DmOptions::default()).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn scalar_statistic_by_hand() {
        let d = [0.5, -0.2, 0.9, 0.1, 0.4, -0.3];
        let t = 6.0;
        let mean = d.iter().sum::<f64>() / t;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t;
        let g = gw_unconditional(&Mat::from_column_slice(6, 1, &d), Some(0)).unwrap();
        assert!((g.statistic - t * mean * mean / var).abs() < 1e-12);
        let losses = Mat::from_fn(6, 2, |r, c| if c == 0 { d[r] } else { 0.0 });
        let dm = dm_multivariate(&losses, &DmOptions::default()).unwrap();
        let c = (t - 1.0) / t;
        assert!((dm.statistic - c * t * mean * mean / var).abs() < 1e-12);
        assert_eq!(dm.dof, 1);
    }

    #[test]
    fn pairings() {
        let l = Mat::from_row_slice(1, 3, &[1.0, 2.0, 4.0]);
        assert_eq!(loss_differentials(&l, Pairing::Adjacent).unwrap(), Mat::from_row_slice(1, 2, &[-1.0, -2.0]));
        assert_eq!(loss_differentials(&l, Pairing::AllVsFirst).unwrap(), Mat::from_row_slice(1, 2, &[-1.0, -3.0]));
    }

    #[test]
    fn bandwidths() {
        assert_eq!(gw_bandwidth(64), 4);
        assert_eq!(gw_bandwidth(100), 4);
        assert_eq!(gw_bandwidth(125), 5);
        assert_eq!(gw_bandwidth(27), 3);
    }

    #[test]
    fn scale_invariance() {
        let l = Mat::from_fn(40, 3, |t, c| ((t * (c + 2)) as f64 * 0.37).sin() + 0.1 * c as f64);
        let a = dm_multivariate(&l, &DmOptions { q: 2, ..Default::default() }).unwrap();
        let b = dm_multivariate(&(&l * 7.5), &DmOptions { q: 2, ..Default::default() }).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-10 * a.statistic.max(1.0));
        let d = loss_differentials(&l, Pairing::Adjacent).unwrap();
        let g1 = gw_unconditional(&d, None).unwrap();
        let g2 = gw_unconditional(&(&d * 0.01), None).unwrap();
        assert!((g1.statistic - g2.statistic).abs() < 1e-10 * g1.statistic.max(1.0));
    }
}
