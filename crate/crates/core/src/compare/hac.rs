//! Long-run variance estimators.

use crate::linalg::Mat;

/// Lag kernels for HAC estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// Unit weight up to the truncation lag.
    Rectangular,
    Bartlett,
    Parzen,
}

impl Kernel {
    /// Weight of lag `j` under truncation `lag`.
    pub fn weight(self, j: usize, lag: usize) -> f64 {
        if j == 0 {
            return 1.0;
        }
        if j > lag {
            return 0.0;
        }
        let x = j as f64 / (lag + 1) as f64;
        match self {
            Kernel::Rectangular => 1.0,
            Kernel::Bartlett => 1.0 - x,
            Kernel::Parzen => {
                if x <= 0.5 {
                    1.0 - 6.0 * x * x + 6.0 * x * x * x
                } else {
                    2.0 * (1.0 - x).powi(3)
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Rectangular => "rectangular",
            Kernel::Bartlett => "bartlett",
            Kernel::Parzen => "parzen",
        }
    }
}

/// Automatic Bartlett truncation `⌊4 (N/100)^{2/9}⌋`.
pub fn nw_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Variance of the sample mean, `(γ̂0 + 2 Σ_{j≤ℓ} (1 − j/(ℓ+1)) γ̂_j) / N`,
/// with autocovariances of the demeaned series normalised by `N`.
pub fn newey_west_var(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    if n == 0 {
        return f64::NAN;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let gamma = |j: usize| (j..n).map(|t| dev[t] * dev[t - j]).sum::<f64>() / n as f64;
    let mut lrv = gamma(0);
    for j in 1..=lag.min(n - 1) {
        lrv += 2.0 * Kernel::Bartlett.weight(j, lag) * gamma(j);
    }
    (lrv / n as f64).max(0.0)
}

/// Long-run covariance `Γ0 + Σ_j w_j (Γ_j + Γ_jᵀ)` of the rows of `d`
/// (T×r), with `Γ_j = (1/T) Σ_t (d_t − d̄)(d_{t−j} − d̄)ᵀ`.
pub fn long_run_covariance(d: &Mat, kernel: Kernel, lag: usize) -> Mat {
    let (t, r) = d.shape();
    let mean = d.row_mean();
    let mut dev = d.clone();
    for mut row in dev.row_iter_mut() {
        row -= &mean;
    }
    let gamma = |j: usize| {
        let a = dev.rows(j, t - j);
        let b = dev.rows(0, t - j);
        a.transpose() * b / t as f64
    };
    let mut omega = gamma(0);
    for j in 1..=lag.min(t.saturating_sub(1)) {
        let w = kernel.weight(j, lag);
        if w == 0.0 {
            continue;
        }
        let g = gamma(j);
        omega += (&g + g.transpose()) * w;
    }
    debug_assert_eq!(omega.shape(), (r, r));
    omega
}
