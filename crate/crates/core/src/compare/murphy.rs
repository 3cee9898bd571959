//! Murphy diagrams: elementary extremal scores over a threshold grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::hac::{newey_west_var, nw_bandwidth};
use crate::error::{Error, Result};

/// Elementary score of forecast `x` for outcome `y` at threshold `theta`
/// for the `alpha`-expectile. Lower is better.
pub fn extremal_score(x: f64, y: f64, theta: f64, alpha: f64) -> f64 {
    if y <= theta && theta < x {
        (alpha - 1.0) * (y - theta)
    } else if x <= theta && theta < y {
        alpha * (y - theta)
    } else {
        0.0
    }
}

/// Two-sided standard-normal critical value for confidence level `conf`.
pub fn normal_critical(conf: f64) -> Result<f64> {
    if !(conf > 0.0 && conf < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level {conf} must lie in (0, 1)")));
    }
    let n = Normal::standard();
    Ok(n.inverse_cdf(1.0 - (1.0 - conf) / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MurphyCurve {
    pub thetas: Vec<f64>,
    /// Mean score of A minus mean score of B; negative favours A.
    pub diff: Vec<f64>,
    pub band_lo: Vec<f64>,
    pub band_hi: Vec<f64>,
    /// HAC variance of the mean differential at each threshold.
    pub variance: Vec<f64>,
    pub alpha: f64,
    pub conf: f64,
    pub lag: usize,
}

/// Score differential curve with pointwise Newey–West bands.
pub fn murphy_diff(fa: &[f64], fb: &[f64], y: &[f64], thetas: &[f64], alpha: f64, conf: f64) -> Result<MurphyCurve> {
    let n = y.len();
    if fa.len() != n || fb.len() != n {
        return Err(Error::Dimension(format!("forecast lengths {} / {} vs {n} outcomes", fa.len(), fb.len())));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("Murphy diagram needs at least two outcomes".into()));
    }
    if thetas.is_empty() || thetas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("threshold grid must be non-empty and strictly increasing".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("expectile level {alpha} must lie in (0, 1)")));
    }
    let z = normal_critical(conf)?;
    let lag = nw_bandwidth(n).min(n - 1);
    let cells: Vec<(f64, f64)> = thetas
        .par_iter()
        .map(|&th| {
            let d: Vec<f64> = (0..n)
                .map(|t| extremal_score(fa[t], y[t], th, alpha) - extremal_score(fb[t], y[t], th, alpha))
                .collect();
            (d.iter().sum::<f64>() / n as f64, newey_west_var(&d, lag))
        })
        .collect();
    let diff: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let variance: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let half: Vec<f64> = variance.iter().map(|v| z * v.sqrt()).collect();
    Ok(MurphyCurve {
        thetas: thetas.to_vec(),
        band_lo: diff.iter().zip(&half).map(|(d, h)| d - h).collect(),
        band_hi: diff.iter().zip(&half).map(|(d, h)| d + h).collect(),
        diff,
        variance,
        alpha,
        conf,
        lag,
    })
}

/// `n` equally spaced thresholds spanning every forecast and outcome, padded
/// by 5% of the range on each side.
pub fn theta_grid(series: &[&[f64]], n: usize) -> Result<Vec<f64>> {
    let (lo, hi) = series
        .iter()
        .flat_map(|s| s.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !lo.is_finite() || n < 2 {
        return Err(Error::InvalidArgument("threshold grid needs data and at least two points".into()));
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
    let (a, b) = (lo - pad, hi + pad);
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}
