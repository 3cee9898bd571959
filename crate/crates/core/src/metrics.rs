//! Point-forecast accuracy metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A metric value plus the number of terms dropped as undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counted {
    pub value: f64,
    pub skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmapeMode {
    /// Values in `[0, 2]`.
    #[default]
    Fraction,
    /// Fraction times 100.
    Percent,
}

fn check(actual: &[f64], forecast: &[f64]) -> Result<()> {
    if actual.is_empty() {
        return Err(Error::InvalidArgument("metric needs at least one observation".into()));
    }
    if actual.len() != forecast.len() {
        return Err(Error::Dimension(format!(
            "{} actual values but {} forecasts",
            actual.len(),
            forecast.len()
        )));
    }
    Ok(())
}

fn mean_sq(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    v.map(|x| x * x).sum::<f64>() / n as f64
}

pub fn rmse(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    Ok(mean_sq(actual.iter().zip(forecast).map(|(a, f)| f - a), actual.len()).sqrt())
}

/// Symmetric MAPE. Terms with `|ŷ| + |y| = 0` contribute zero and are counted.
pub fn smape(actual: &[f64], forecast: &[f64], mode: SmapeMode) -> Result<Counted> {
    check(actual, forecast)?;
    let mut skipped = 0;
    let mut total = 0.0;
    for (a, f) in actual.iter().zip(forecast) {
        let denom = (a.abs() + f.abs()) / 2.0;
        if denom == 0.0 {
            skipped += 1;
        } else {
            total += (f - a).abs() / denom;
        }
    }
    if skipped > 0 {
        log::warn!("sMAPE: {skipped} term(s) with zero actual and forecast counted as 0");
    }
    let frac = total / actual.len() as f64;
    let value = match mode {
        SmapeMode::Fraction => frac,
        SmapeMode::Percent => frac * 100.0,
    };
    Ok(Counted { value, skipped })
}

/// Mean absolute in-sample error of the seasonal naive forecast `y_{t−S}`.
pub fn seasonal_naive_mae(insample: &[f64], period: usize) -> Result<f64> {
    if period == 0 || insample.len() <= period {
        return Err(Error::InvalidArgument(format!(
            "seasonal period {period} needs more than {period} in-sample observations, have {}",
            insample.len()
        )));
    }
    let n = insample.len() - period;
    let mae = (period..insample.len()).map(|t| (insample[t] - insample[t - period]).abs()).sum::<f64>() / n as f64;
    if mae == 0.0 {
        return Err(Error::InvalidArgument("in-sample seasonal naive forecast is perfect; MASE undefined".into()));
    }
    Ok(mae)
}

pub fn mase(actual: &[f64], forecast: &[f64], insample: &[f64], period: usize) -> Result<f64> {
    check(actual, forecast)?;
    let scale = seasonal_naive_mae(insample, period)?;
    let mae = actual.iter().zip(forecast).map(|(a, f)| (f - a).abs()).sum::<f64>() / actual.len() as f64;
    Ok(mae / scale)
}

/// `|e_t|` divided by the in-sample seasonal naive MAE.
pub fn absolute_scaled_errors(actual: &[f64], forecast: &[f64], insample: &[f64], period: usize) -> Result<Vec<f64>> {
    check(actual, forecast)?;
    let scale = seasonal_naive_mae(insample, period)?;
    Ok(actual.iter().zip(forecast).map(|(a, f)| (f - a).abs() / scale).collect())
}

pub fn theil_u1(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    let n = actual.len();
    let denom = mean_sq(actual.iter().copied(), n).sqrt() + mean_sq(forecast.iter().copied(), n).sqrt();
    if denom == 0.0 {
        return Err(Error::InvalidArgument("Theil U1 undefined when actuals and forecasts are all zero".into()));
    }
    Ok(rmse(actual, forecast)? / denom)
}

/// Median absolute percentage error in percent. Zero actuals are dropped and
/// counted.
pub fn mdape(actual: &[f64], forecast: &[f64]) -> Result<Counted> {
    check(actual, forecast)?;
    let mut ape: Vec<f64> = actual
        .iter()
        .zip(forecast)
        .filter(|(a, _)| **a != 0.0)
        .map(|(a, f)| (a - f).abs() / a.abs() * 100.0)
        .collect();
    let skipped = actual.len() - ape.len();
    if ape.is_empty() {
        return Err(Error::InvalidArgument("MdAPE undefined: every actual value is zero".into()));
    }
    if skipped > 0 {
        log::warn!("MdAPE: {skipped} zero actual value(s) excluded");
    }
    ape.sort_by(f64::total_cmp);
    let n = ape.len();
    let value = if n % 2 == 1 { ape[n / 2] } else { 0.5 * (ape[n / 2 - 1] + ape[n / 2]) };
    Ok(Counted { value, skipped })
}

/// All five metrics for one (variable, window, model) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub variable: String,
    pub horizon: usize,
    pub model: String,
    pub rmse: f64,
    pub smape: f64,
    pub mase: f64,
    pub theil_u1: f64,
    pub mdape: f64,
    pub smape_skipped: usize,
    pub mdape_skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSettings {
    pub mase_period: usize,
    pub smape_mode: SmapeMode,
}

impl Default for MetricSettings {
    fn default() -> Self {
        MetricSettings { mase_period: 1, smape_mode: SmapeMode::Fraction }
    }
}

/// Metrics that are undefined for this cell are reported as NaN.
pub fn metric_row(
    variable: &str,
    model: &str,
    actual: &[f64],
    forecast: &[f64],
    insample: &[f64],
    settings: &MetricSettings,
) -> Result<MetricRow> {
    check(actual, forecast)?;
    let or_nan = |r: Result<f64>| r.unwrap_or(f64::NAN);
    let sm = smape(actual, forecast, settings.smape_mode)?;
    let md = mdape(actual, forecast).unwrap_or(Counted { value: f64::NAN, skipped: actual.len() });
    Ok(MetricRow {
        variable: variable.to_string(),
        horizon: actual.len(),
        model: model.to_string(),
        rmse: rmse(actual, forecast)?,
        smape: sm.value,
        mase: or_nan(mase(actual, forecast, insample, settings.mase_period)),
        theil_u1: or_nan(theil_u1(actual, forecast)),
        mdape: md.value,
        smape_skipped: sm.skipped,
        mdape_skipped: md.skipped,
    })
}
