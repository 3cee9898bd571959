//! Morlet wavelet coherence with Monte Carlo significance and FDR control.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bvar::stream_rng;
use crate::error::{Error, Result};
use crate::linalg::Mat;

pub const OMEGA0: f64 = 6.0;
/// Sub-octave spacing of the default scale grid.
pub const DJ: f64 = 1.0 / 12.0;
/// Width of the scale boxcar in units of the Morlet scale decorrelation length.
const SCALE_SMOOTH: f64 = 0.6;
/// Gaussian time-smoothing kernel truncated at this many standard deviations.
const TIME_TRUNC: f64 = 3.0;

/// Ratio of equivalent Fourier period to scale for the Morlet wavelet.
pub fn fourier_factor(omega0: f64) -> f64 {
    4.0 * PI / (omega0 + (2.0 + omega0 * omega0).sqrt())
}

/// Dyadic grid `s0·2^{j·dj}` from `s0` up to `s_max` inclusive.
pub fn scales_with(s0: f64, dj: f64, s_max: f64) -> Result<Vec<f64>> {
    if !(s0 > 0.0 && dj > 0.0) || s_max < s0 {
        return Err(Error::InvalidArgument(format!("scale grid s0={s0} dj={dj} s_max={s_max}")));
    }
    let j = ((s_max / s0).log2() / dj + 1e-9).floor() as usize;
    Ok((0..=j).map(|i| s0 * 2f64.powf(i as f64 * dj)).collect())
}

/// Default grid: `s0 = 2·dt`, twelve voices per octave, up to `n·dt/4`.
pub fn scales(n: usize, dt: f64) -> Result<Vec<f64>> {
    if n < 8 {
        return Err(Error::InsufficientData(format!("{n} observations too few for a scale grid")));
    }
    scales_with(2.0 * dt, DJ, n as f64 * dt / 4.0)
}

/// Largest reliable scale at each time: the Morlet e-folding time `√2·s`
/// reaches the nearer edge.
pub fn coi(n: usize, dt: f64) -> Vec<f64> {
    (0..n).map(|t| dt * t.min(n - 1 - t) as f64 / 2f64.sqrt()).collect()
}

/// Complex coefficients on a scale × time grid, row-major by scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtField {
    pub scales: Vec<f64>,
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CwtField {
    pub fn get(&self, j: usize, t: usize) -> Complex64 {
        self.data[j * self.n + t]
    }
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::InvalidArgument("empty scale vector".into()));
    }
    if scales.iter().any(|s| !(*s > 0.0)) || scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("scales must be positive and increasing".into()));
    }
    Ok(())
}

/// Continuous wavelet transform of the demeaned series with the analytic
/// Morlet wavelet (`ω0 = 6`) and `sqrt(dt/s)` normalization, computed by FFT
/// on a zero-padded power-of-two length.
pub fn morlet_cwt(series: &[f64], scales: &[f64], dt: f64) -> Result<CwtField> {
    let n = series.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!("{n} observations; the transform needs at least 4")));
    }
    check_scales(scales)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("sampling interval dt = {dt}")));
    }
    let len = n.next_power_of_two();
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut spec: Vec<Complex64> = series.iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
    spec.resize(len, Complex64::new(0.0, 0.0));
    fwd.process(&mut spec);
    let omega: Vec<f64> = (0..len)
        .map(|k| {
            let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
            2.0 * PI * kk / (len as f64 * dt)
        })
        .collect();
    let norm = PI.powf(-0.25);
    let mut data = Vec::with_capacity(scales.len() * n);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for &s in scales {
        let amp = (2.0 * PI * s / dt).sqrt() * norm;
        for k in 0..len {
            buf[k] = if omega[k] > 0.0 {
                let a = s * omega[k] - OMEGA0;
                spec[k] * (amp * (-0.5 * a * a).exp())
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        inv.process(&mut buf);
        data.extend(buf[..n].iter().map(|c| c / len as f64));
    }
    Ok(CwtField { scales: scales.to_vec(), n, data })
}

/// Gaussian smoothing in time (std `s/dt` samples) then a boxcar across
/// scales, applied to one real or complex field.
fn smooth(field: &[Complex64], scales: &[f64], n: usize, dt: f64, dj: f64) -> Vec<Complex64> {
    let nj = scales.len();
    let mut timed = vec![Complex64::new(0.0, 0.0); nj * n];
    for (j, &s) in scales.iter().enumerate() {
        let sigma = s / dt;
        let half = ((TIME_TRUNC * sigma).ceil() as usize).min(n - 1);
        let w: Vec<f64> = (0..=half).map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp()).collect();
        let row = &field[j * n..(j + 1) * n];
        for t in 0..n {
            let lo = t.saturating_sub(half);
            let hi = (t + half).min(n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut wsum = 0.0;
            for u in lo..=hi {
                let wk = w[t.abs_diff(u)];
                acc += row[u] * wk;
                wsum += wk;
            }
            timed[j * n + t] = acc / wsum;
        }
    }
    let steps = SCALE_SMOOTH / (2.0 * dj);
    let r = (steps.round() as usize).max(1);
    let frac = steps.fract();
    // centre taps with weight 1, one fractional tap at each end
    let mut kernel = vec![1.0; 2 * r - 1];
    if frac > 0.0 {
        kernel.insert(0, frac);
        kernel.push(frac);
    }
    let c = kernel.len() / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); nj * n];
    for j in 0..nj {
        for t in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut wsum = 0.0;
            for (k, wk) in kernel.iter().enumerate() {
                let jj = j as isize + k as isize - c as isize;
                if jj >= 0 && (jj as usize) < nj {
                    acc += timed[jj as usize * n + t] * *wk;
                    wsum += wk;
                }
            }
            out[j * n + t] = acc / wsum;
        }
    }
    out
}

/// Squared coherence and phase on a scale × time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceMap {
    pub scales: Vec<f64>,
    pub periods: Vec<f64>,
    pub times: Vec<f64>,
    pub dt: f64,
    pub omega0: f64,
    /// Scale × time, in `[0, 1]`.
    #[serde(with = "crate::linalg::row_major")]
    pub r2: Mat,
    /// Scale × time, in `(−π, π]`; NaN where either power is zero.
    #[serde(with = "crate::linalg::row_major")]
    pub phase: Mat,
    pub coi: Vec<f64>,
    pub significance: Option<Significance>,
}

impl CoherenceMap {
    /// Cell lies in the reliable region (scale at most the COI boundary).
    pub fn inside_coi(&self, j: usize, t: usize) -> bool {
        self.scales[j] <= self.coi[t]
    }

    pub fn n_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub replications: usize,
    pub seed: u64,
    pub alpha_fdr: f64,
    /// Monte Carlo p-values; NaN outside the COI.
    #[serde(with = "crate::linalg::row_major")]
    pub pvals: Mat,
    pub mask: Vec<Vec<bool>>,
    #[serde(with = "crate::linalg::row_major")]
    pub qvals: Mat,
}

fn coherence_fields(wx: &CwtField, wy: &CwtField, dt: f64, dj: f64) -> (Mat, Mat) {
    let n = wx.n;
    let nj = wx.scales.len();
    let mut pxx = Vec::with_capacity(nj * n);
    let mut pyy = Vec::with_capacity(nj * n);
    let mut pxy = Vec::with_capacity(nj * n);
    for (j, &s) in wx.scales.iter().enumerate() {
        for t in 0..n {
            let a = wx.get(j, t);
            let b = wy.get(j, t);
            pxx.push(Complex64::new(a.norm_sqr() / s, 0.0));
            pyy.push(Complex64::new(b.norm_sqr() / s, 0.0));
            pxy.push(a * b.conj() / s);
        }
    }
    let sxx = smooth(&pxx, &wx.scales, n, dt, dj);
    let syy = smooth(&pyy, &wx.scales, n, dt, dj);
    let sxy = smooth(&pxy, &wx.scales, n, dt, dj);
    let mut r2 = Mat::zeros(nj, n);
    let mut phase = Mat::from_element(nj, n, f64::NAN);
    for j in 0..nj {
        for t in 0..n {
            let i = j * n + t;
            let denom = sxx[i].re * syy[i].re;
            if denom > 0.0 {
                r2[(j, t)] = (sxy[i].norm_sqr() / denom).clamp(0.0, 1.0);
                let mut ph = sxy[i].im.atan2(sxy[i].re);
                if ph <= -PI + 1e-12 {
                    ph = PI;
                }
                phase[(j, t)] = ph;
            }
        }
    }
    (r2, phase)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("series lengths {} and {} differ", x.len(), y.len())));
    }
    Ok(())
}

/// Smoothed squared coherence `|S(W_xy/s)|² / (S(|W_x|²/s)·S(|W_y|²/s))` and
/// the phase of the smoothed cross spectrum `W_x·conj(W_y)`.
pub fn coherence(x: &[f64], y: &[f64], scales: &[f64], dt: f64) -> Result<CoherenceMap> {
    check_pair(x, y)?;
    let wx = morlet_cwt(x, scales, dt)?;
    let wy = morlet_cwt(y, scales, dt)?;
    let (r2, phase) = coherence_fields(&wx, &wy, dt, grid_spacing(scales));
    let ff = fourier_factor(OMEGA0);
    Ok(CoherenceMap {
        scales: scales.to_vec(),
        periods: scales.iter().map(|s| s * ff).collect(),
        times: (0..x.len()).map(|t| t as f64 * dt).collect(),
        dt,
        omega0: OMEGA0,
        r2,
        phase,
        coi: coi(x.len(), dt),
        significance: None,
    })
}

/// Log2 spacing of a scale grid; the default for a single scale.
fn grid_spacing(scales: &[f64]) -> f64 {
    if scales.len() < 2 {
        DJ
    } else {
        (scales[1] / scales[0]).log2()
    }
}

/// Lag-1 autocorrelation and variance of the demeaned series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Fit {
    pub rho: f64,
    pub variance: f64,
}

pub fn fit_ar1(series: &[f64]) -> Result<Ar1Fit> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InsufficientData("AR(1) fit needs at least three observations".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let ss: f64 = d.iter().map(|v| v * v).sum();
    if ss == 0.0 {
        return Err(Error::ConstantSeries("coherence input".into()));
    }
    let rho = d.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / ss;
    if rho.abs() >= 1.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!("lag-1 autocorrelation {rho:.6} indicates a unit root")));
    }
    Ok(Ar1Fit { rho, variance: ss / n as f64 })
}

fn ar1_path(fit: Ar1Fit, n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    let sd = fit.variance.sqrt();
    let innov = sd * (1.0 - fit.rho * fit.rho).sqrt();
    let mut out = Vec::with_capacity(n);
    let z0: f64 = StandardNormal.sample(&mut rng);
    let mut v = sd * z0;
    out.push(v);
    for _ in 1..n {
        let e: f64 = StandardNormal.sample(&mut rng);
        v = fit.rho * v + innov * e;
        out.push(v);
    }
    out
}

/// `b` stationary AR(1) paths matching the series' lag-1 autocorrelation and
/// variance; path `i` uses RNG stream `i`.
pub fn ar1_surrogates(series: &[f64], b: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let fit = fit_ar1(series)?;
    Ok((0..b as u64).into_par_iter().map(|i| ar1_path(fit, series.len(), seed, i)).collect())
}

/// Monte Carlo p-values `(1 + #{surrogate r² ≥ observed}) / (B + 1)` against
/// independent AR(1) surrogates of `x` and `y`. Cells outside the COI are NaN.
pub fn significance(x: &[f64], y: &[f64], scales: &[f64], dt: f64, b: usize, seed: u64) -> Result<Mat> {
    check_pair(x, y)?;
    if b < 100 {
        return Err(Error::InvalidArgument(format!("{b} replications; at least 100 required")));
    }
    let observed = coherence(x, y, scales, dt)?;
    let fx = fit_ar1(x)?;
    let fy = fit_ar1(y)?;
    let n = x.len();
    let nj = scales.len();
    let dj = grid_spacing(scales);
    let counts = (0..b as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<u32>> {
            let sx = ar1_path(fx, n, seed, 2 * i);
            let sy = ar1_path(fy, n, seed, 2 * i + 1);
            let (r2, _) = coherence_fields(&morlet_cwt(&sx, scales, dt)?, &morlet_cwt(&sy, scales, dt)?, dt, dj);
            Ok((0..nj * n).map(|c| u32::from(r2[(c / n, c % n)] >= observed.r2[(c / n, c % n)])).collect())
        })
        .try_reduce(
            || vec![0u32; nj * n],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok(Mat::from_fn(nj, n, |j, t| {
        if observed.inside_coi(j, t) {
            (1.0 + counts[j * n + t] as f64) / (b as f64 + 1.0)
        } else {
            f64::NAN
        }
    }))
}

/// Benjamini–Hochberg at level `alpha` separately within each scale (row),
/// over the finite p-values of that row.
pub fn fdr_bh_per_scale(pvals: &Mat, alpha: f64) -> Result<Vec<Vec<bool>>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("FDR level {alpha} must lie in (0, 1)")));
    }
    Ok(pvals
        .row_iter()
        .map(|row| {
            let mut ps: Vec<f64> = row.iter().copied().filter(|p| p.is_finite()).collect();
            ps.sort_by(f64::total_cmp);
            let m = ps.len() as f64;
            let cutoff = ps.iter().enumerate().rev().find(|(k, p)| **p <= (*k as f64 + 1.0) / m * alpha).map(|(_, p)| *p);
            row.iter().map(|p| matches!(cutoff, Some(c) if p.is_finite() && *p <= c)).collect()
        })
        .collect())
}

/// Benjamini–Yekutieli q-values pooled over every finite cell; NaN cells
/// stay NaN.
pub fn by_pooled_qvalues(pvals: &Mat) -> Result<Mat> {
    let mut idx: Vec<usize> = (0..pvals.len()).filter(|&i| pvals[i].is_finite()).collect();
    if idx.is_empty() {
        return Err(Error::InvalidArgument("no finite p-values".into()));
    }
    idx.sort_by(|&a, &b| pvals[a].total_cmp(&pvals[b]));
    let m = idx.len();
    let harmonic: f64 = (1..=m).map(|i| 1.0 / i as f64).sum();
    let mut q = Mat::from_element(pvals.nrows(), pvals.ncols(), f64::NAN);
    let mut running = f64::INFINITY;
    for (rank, &i) in idx.iter().enumerate().rev() {
        let raw = pvals[i] * m as f64 * harmonic / (rank + 1) as f64;
        running = running.min(raw);
        q[i] = running.min(1.0);
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceOptions {
    pub dt: f64,
    pub replications: usize,
    pub alpha_fdr: f64,
    pub seed: u64,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        CoherenceOptions { dt: 1.0, replications: 1000, alpha_fdr: 0.10, seed: 0 }
    }
}

/// Coherence on the default scale grid with p-values, per-scale BH masks and
/// pooled BY q-values.
pub fn coherence_test(x: &[f64], y: &[f64], opts: &CoherenceOptions) -> Result<CoherenceMap> {
    let sc = scales(x.len(), opts.dt)?;
    let mut map = coherence(x, y, &sc, opts.dt)?;
    let pvals = significance(x, y, &sc, opts.dt, opts.replications, opts.seed)?;
    let mask = fdr_bh_per_scale(&pvals, opts.alpha_fdr)?;
    let qvals = by_pooled_qvalues(&pvals)?;
    map.significance = Some(Significance {
        replications: opts.replications,
        seed: opts.seed,
        alpha_fdr: opts.alpha_fdr,
        pvals,
        mask,
        qvals,
    });
    Ok(map)
}
