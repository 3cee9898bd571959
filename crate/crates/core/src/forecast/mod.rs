//! Point forecasts, simulated forecast paths and truncated credible intervals.

mod interval;

pub use interval::{credible_intervals, required_count, shortest_anchored, BoundKind, Interval, Support, SupportBounds};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bvar::{sample_direct, stream_rng, MniwPosterior, ParamDraw};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::panel::{ExogPath, Panel};

/// Simulated paths stored as an `S×H×m` cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawCube {
    pub s: usize,
    pub h: usize,
    pub m: usize,
    /// Index `(s·H + h)·m + j`.
    pub data: Vec<f64>,
}

impl DrawCube {
    pub fn from_fn(s: usize, h: usize, m: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(s * h * m);
        for a in 0..s {
            for b in 0..h {
                for c in 0..m {
                    data.push(f(a, b, c));
                }
            }
        }
        DrawCube { s, h, m, data }
    }

    pub fn get(&self, s: usize, h: usize, j: usize) -> f64 {
        self.data[(s * self.h + h) * self.m + j]
    }

    /// Path `s` as an `H×m` matrix.
    pub fn path(&self, s: usize) -> Mat {
        Mat::from_fn(self.h, self.m, |h, j| self.get(s, h, j))
    }

    fn from_paths(paths: Vec<Mat>, h: usize, m: usize) -> Self {
        let s = paths.len();
        let mut data = Vec::with_capacity(s * h * m);
        for p in &paths {
            for b in 0..h {
                for c in 0..m {
                    data.push(p[(b, c)]);
                }
            }
        }
        DrawCube { s, h, m, data }
    }
}

fn check_inputs(params: &ParamDraw, train: &Panel, exog: &ExogPath, h: usize) -> Result<()> {
    let layout = params.layout();
    if h == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be positive".into()));
    }
    if train.m() != layout.m || train.k() != layout.k {
        return Err(Error::Dimension(format!(
            "parameters have m={} k={}, panel m={} k={}",
            layout.m,
            layout.k,
            train.m(),
            train.k()
        )));
    }
    if train.len() < layout.p {
        return Err(Error::InsufficientData(format!("{} rows cannot seed {} lags", train.len(), layout.p)));
    }
    if exog.horizon() != h || exog.values().ncols() != layout.k {
        return Err(Error::Dimension(format!(
            "exogenous path is {}x{}, expected {}x{}",
            exog.horizon(),
            exog.values().ncols(),
            h,
            layout.k
        )));
    }
    Ok(())
}

/// Forecast recursion from the end of `train`, adding `chol · z_h` at each step
/// when a shock generator is supplied.
fn recurse(params: &ParamDraw, train: &Panel, exog: &ExogPath, h: usize, mut shock: impl FnMut() -> Option<Vec<f64>>) -> Mat {
    let layout = params.layout();
    let (m, p, k) = (layout.m, layout.p, layout.k);
    let t = train.len();
    let endog = train.endog();
    let x = exog.values();
    let mut hist = Mat::zeros(p + h, m);
    hist.rows_mut(0, p).copy_from(&endog.rows(t - p, p));
    for step in 0..h {
        let row = p + step;
        let u = shock();
        for i in 0..m {
            let mut v = params.mu[i];
            for (l, f) in params.phi.iter().enumerate() {
                for j in 0..m {
                    v += f[(i, j)] * hist[(row - l - 1, j)];
                }
            }
            for q in 0..k {
                v += params.gamma[(i, q)] * x[(step, q)];
            }
            if let Some(u) = &u {
                v += u[i];
            }
            hist[(row, i)] = v;
        }
    }
    hist.rows(p, h).into_owned()
}

fn shock_source<'a>(chol: &'a Mat, rng: &'a mut rand_chacha::ChaCha8Rng) -> impl FnMut() -> Option<Vec<f64>> + 'a {
    move || {
        let m = chol.nrows();
        let z: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut *rng)).collect();
        Some((0..m).map(|i| (0..=i).map(|j| chol[(i, j)] * z[j]).sum()).collect())
    }
}

/// Deterministic `H×m` path with all future shocks set to zero.
pub fn point_forecast(params: &ParamDraw, train: &Panel, exog: &ExogPath, h: usize) -> Result<Mat> {
    check_inputs(params, train, exog, h)?;
    if !params.stable {
        log::warn!("point forecast from explosive parameters (spectral radius {:.6})", params.spectral_radius);
    }
    Ok(recurse(params, train, exog, h, || None))
}

/// Average of one shock-simulated path per stable draw. Draw `i` uses the
/// random stream `i` of `seed`, so the set of stable draws alone determines
/// the result.
pub fn posterior_mean_forecast(
    draws: &[ParamDraw],
    train: &Panel,
    exog: &ExogPath,
    h: usize,
    min_stable_frac: f64,
    seed: u64,
) -> Result<Mat> {
    if draws.is_empty() {
        return Err(Error::InvalidArgument("no parameter draws".into()));
    }
    let stable: Vec<usize> = (0..draws.len()).filter(|&i| draws[i].stable).collect();
    let fraction = stable.len() as f64 / draws.len() as f64;
    if stable.is_empty() || fraction < min_stable_frac {
        return Err(Error::TooFewStable { stable: stable.len(), total: draws.len(), fraction, required: min_stable_frac });
    }
    for &i in &stable {
        check_inputs(&draws[i], train, exog, h)?;
    }
    let paths: Vec<Mat> = stable
        .par_iter()
        .map(|&i| {
            let chol = linalg::noise_factor(&draws[i].sigma, "draw Sigma")?;
            let mut rng = stream_rng(seed, i as u64);
            Ok(recurse(&draws[i], train, exog, h, shock_source(&chol, &mut rng)))
        })
        .collect::<Result<_>>()?;
    let mut mean = Mat::zeros(h, train.m());
    for p in &paths {
        mean += p;
    }
    Ok(mean / paths.len() as f64)
}

/// `S` shock-simulated paths from fixed parameters with shock covariance
/// `sigma` (a zero matrix gives `S` copies of the point forecast).
pub fn simulate_paths(params: &ParamDraw, sigma: &Mat, train: &Panel, exog: &ExogPath, h: usize, s: usize, seed: u64) -> Result<DrawCube> {
    check_inputs(params, train, exog, h)?;
    if s == 0 {
        return Err(Error::InvalidArgument("draw count must be at least 1".into()));
    }
    if sigma.shape() != (train.m(), train.m()) {
        return Err(Error::Dimension("shock covariance does not match m".into()));
    }
    let chol = linalg::noise_factor(sigma, "shock covariance")?;
    let paths: Vec<Mat> = (0..s)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            recurse(params, train, exog, h, shock_source(&chol, &mut rng))
        })
        .collect();
    Ok(DrawCube::from_paths(paths, h, train.m()))
}

/// Shift every path by `tuned − deterministic`, horizon by horizon.
pub fn snap_center(cube: &DrawCube, tuned: &Mat, deterministic: &Mat) -> Result<(DrawCube, Mat)> {
    if tuned.shape() != (cube.h, cube.m) || deterministic.shape() != (cube.h, cube.m) {
        return Err(Error::Dimension("snap-centering shapes disagree with the draw cube".into()));
    }
    let delta = tuned - deterministic;
    let mut out = cube.clone();
    for (idx, v) in out.data.iter_mut().enumerate() {
        let j = idx % cube.m;
        let h = (idx / cube.m) % cube.h;
        *v += delta[(h, j)];
    }
    Ok((out, delta))
}

/// Which path the intervals are anchored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSource {
    /// Shock-free path at the posterior-mean parameters.
    #[default]
    Deterministic,
    /// Average over stable posterior draws of shock-simulated paths.
    PosteriorMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastOptions {
    pub draws: usize,
    pub gamma: f64,
    pub min_stable_frac: f64,
    pub point: PointSource,
    pub seed: u64,
}

impl Default for ForecastOptions {
    fn default() -> Self {
        ForecastOptions { draws: 1000, gamma: 0.5, min_stable_frac: 0.5, point: PointSource::Deterministic, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastDistribution {
    /// Anchoring point path `H×m`.
    pub point: Mat,
    /// Shock-free path at the posterior mean.
    pub deterministic: Mat,
    pub draws: DrawCube,
    pub intervals: Vec<Interval>,
    pub snap_delta: Mat,
}

/// Full pipeline from a fitted posterior: posterior-mean parameters (which must
/// be stable), anchoring point path, simulated cube, snap-centering, intervals.
pub fn forecast(
    post: &MniwPosterior,
    train: &Panel,
    exog: &ExogPath,
    h: usize,
    bounds: &SupportBounds,
    opts: &ForecastOptions,
) -> Result<ForecastDistribution> {
    let mean = ParamDraw::posterior_mean(post)?;
    if !mean.stable {
        return Err(Error::UnstablePosterior(mean.spectral_radius));
    }
    let deterministic = point_forecast(&mean, train, exog, h)?;
    let point = match opts.point {
        PointSource::Deterministic => deterministic.clone(),
        PointSource::PosteriorMean => {
            let draws = sample_direct(post, opts.draws, opts.seed)?;
            posterior_mean_forecast(&draws, train, exog, h, opts.min_stable_frac, opts.seed.wrapping_add(1))?
        }
    };
    let raw = simulate_paths(&mean, &mean.sigma, train, exog, h, opts.draws, opts.seed)?;
    let (draws, snap_delta) = snap_center(&raw, &point, &deterministic)?;
    let intervals = credible_intervals(&draws, bounds, opts.gamma, &point)?;
    Ok(ForecastDistribution { point, deterministic, draws, intervals, snap_delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvar::Layout;

    fn scalar_params(mu: f64, phi: f64, sigma: f64) -> ParamDraw {
        let b = Mat::from_row_slice(2, 1, &[mu, phi]);
        ParamDraw::from_b(&b, Mat::from_element(1, 1, sigma), Layout::new(1, 1, 0)).unwrap()
    }

    fn scalar_panel(values: &[f64]) -> Panel {
        Panel::from_blocks(Mat::from_column_slice(values.len(), 1, values), Mat::zeros(values.len(), 0)).unwrap()
    }

    #[test]
    fn zero_parameters_give_zero_path() {
        let layout = Layout::new(2, 2, 1);
        let p = ParamDraw::from_b(&Mat::zeros(layout.d(), 2), Mat::identity(2, 2), layout).unwrap();
        let train = Panel::from_blocks(Mat::from_element(5, 2, 3.0), Mat::from_element(5, 1, 1.0)).unwrap();
        let path = point_forecast(&p, &train, &ExogPath::new(Mat::from_element(4, 1, 2.0)), 4).unwrap();
        assert_eq!(path, Mat::zeros(4, 2));
    }

    #[test]
    fn scalar_fixed_point() {
        let path = point_forecast(&scalar_params(1.0, 0.5, 1.0), &scalar_panel(&[0.0, 2.0]), &ExogPath::empty(5), 5).unwrap();
        assert!(path.iter().all(|v| *v == 2.0));
    }

    #[test]
    fn exogenous_pass_through() {
        let layout = Layout::new(2, 1, 2);
        let mut b = Mat::zeros(layout.d(), 2);
        b[(layout.exog_row(0), 0)] = 1.0;
        b[(layout.exog_row(1), 1)] = 1.0;
        let p = ParamDraw::from_b(&b, Mat::identity(2, 2), layout).unwrap();
        let train = Panel::from_blocks(Mat::from_element(3, 2, 9.0), Mat::zeros(3, 2)).unwrap();
        let path = point_forecast(&p, &train, &ExogPath::new(Mat::from_element(6, 2, 1.5)), 6).unwrap();
        assert!(path.iter().all(|v| *v == 1.5));
    }

    #[test]
    fn exog_row_mismatch() {
        let r = point_forecast(&scalar_params(0.0, 0.5, 1.0), &scalar_panel(&[1.0, 2.0]), &ExogPath::empty(3), 4);
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn noise_free_mean_forecast_matches_point() {
        let d = scalar_params(0.3, 0.7, 0.0);
        let train = scalar_panel(&[1.0, 2.0, 1.5]);
        let ex = ExogPath::empty(6);
        let pm = posterior_mean_forecast(&vec![d.clone(); 5], &train, &ex, 6, 0.5, 1).unwrap();
        let pf = point_forecast(&d, &train, &ex, 6).unwrap();
        assert!((pm - pf).amax() < 1e-15);
    }

    #[test]
    fn mean_forecast_averages_and_filters() {
        let a = scalar_params(1.0, 0.5, 0.0);
        let b = scalar_params(-1.0, 0.2, 0.0);
        let explosive = scalar_params(0.0, 1.5, 0.0);
        let train = scalar_panel(&[0.0, 1.0]);
        let ex = ExogPath::empty(3);
        let pa = point_forecast(&a, &train, &ex, 3).unwrap();
        let pb = point_forecast(&b, &train, &ex, 3).unwrap();
        let avg = posterior_mean_forecast(&[a.clone(), b], &train, &ex, 3, 0.5, 0).unwrap();
        assert!((avg - (&pa + &pb) / 2.0).amax() < 1e-15);
        let filtered = posterior_mean_forecast(&[a, explosive.clone()], &train, &ex, 3, 0.5, 0).unwrap();
        assert!((filtered - pa).amax() < 1e-15);
        let err = posterior_mean_forecast(&[explosive.clone(), explosive], &train, &ex, 3, 0.5, 0).unwrap_err();
        assert!(matches!(err, Error::TooFewStable { stable: 0, total: 2, .. }));
    }

    #[test]
    fn zero_covariance_paths_equal_point() {
        let d = scalar_params(0.2, 0.6, 1.0);
        let train = scalar_panel(&[0.0, 1.0]);
        let ex = ExogPath::empty(4);
        let cube = simulate_paths(&d, &Mat::zeros(1, 1), &train, &ex, 4, 10, 3).unwrap();
        let pf = point_forecast(&d, &train, &ex, 4).unwrap();
        for s in 0..10 {
            assert_eq!(cube.path(s), pf);
        }
    }

    #[test]
    fn one_step_spread_matches_sigma() {
        let d = scalar_params(0.0, 0.5, 1.0);
        let train = scalar_panel(&[0.0, 1.0]);
        let s = 20_000;
        let sigma = 0.7;
        let cube = simulate_paths(&d, &Mat::from_element(1, 1, sigma * sigma), &train, &ExogPath::empty(1), 1, s, 8).unwrap();
        let mean = cube.data.iter().sum::<f64>() / s as f64;
        let sd = (cube.data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s - 1) as f64).sqrt();
        assert!((sd / sigma - 1.0).abs() < 3.0 / (2.0 * s as f64).sqrt());
        let again = simulate_paths(&d, &Mat::from_element(1, 1, sigma * sigma), &train, &ExogPath::empty(1), 1, s, 8).unwrap();
        assert_eq!(cube, again);
    }

    #[test]
    fn snap_centering_is_a_translation() {
        let cube = DrawCube::from_fn(50, 3, 2, |s, h, j| (s * 7 + h * 3 + j) as f64 % 11.0);
        let det = Mat::from_fn(3, 2, |h, j| (h + j) as f64);
        let (same, delta) = snap_center(&cube, &det, &det).unwrap();
        assert_eq!(same, cube);
        assert_eq!(delta, Mat::zeros(3, 2));
        let tuned = Mat::from_fn(3, 2, |h, j| (h + j) as f64 + (h as f64 + 1.0));
        let (shifted, _) = snap_center(&cube, &tuned, &det).unwrap();
        for s in 0..50 {
            for h in 0..3 {
                for j in 0..2 {
                    assert_eq!(shifted.get(s, h, j), cube.get(s, h, j) + (h as f64 + 1.0));
                }
            }
        }
    }
}
