//! Multiple comparisons with the best via average ranks (Nemenyi).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Studentized-range upper quantiles divided by √2, for 2..=20 algorithms.
const Q_001: [f64; 19] = [
    2.575829, 2.913494, 3.113250, 3.254686, 3.363740, 3.452213, 3.526471, 3.590339, 3.646292, 3.696021, 3.740733,
    3.781318, 3.818451, 3.852654, 3.884343, 3.913850, 3.941446, 3.967357, 3.991770,
];
const Q_005: [f64; 19] = [
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684, 3.218654, 3.268004,
    3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
];
const Q_010: [f64; 19] = [
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889, 2.977768, 3.029694,
    3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224, 3.319233,
];

/// Nemenyi critical value `q_α` for `algorithms` competitors.
pub fn nemenyi_q(algorithms: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.01).abs() < 1e-12 {
        &Q_001
    } else if (alpha - 0.05).abs() < 1e-12 {
        &Q_005
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_010
    } else {
        return Err(Error::InvalidArgument(format!("alpha {alpha} not tabulated; use 0.01, 0.05 or 0.10")));
    };
    if !(2..=20).contains(&algorithms) {
        return Err(Error::InvalidArgument(format!("{algorithms} algorithms outside the tabulated range 2..=20")));
    }
    Ok(table[algorithms - 2])
}

/// `q · sqrt(A (A+1) / (6 D))`.
pub fn critical_distance(q: f64, algorithms: usize, datasets: usize) -> f64 {
    let a = algorithms as f64;
    q * (a * (a + 1.0) / (6.0 * datasets as f64)).sqrt()
}

/// Ranks `1..=n` with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McbResult {
    pub mean_ranks: Vec<f64>,
    pub cd: f64,
    pub q_alpha: f64,
    pub alpha: f64,
    /// `[R̄_i − cd/2, R̄_i + cd/2]`.
    pub intervals: Vec<(f64, f64)>,
    /// Index of the lowest mean rank (first on ties).
    pub best: usize,
    /// Per-dataset ranks, `D×A`.
    #[serde(with = "crate::linalg::row_major")]
    pub ranks: Mat,
}

impl McbResult {
    pub fn differ(&self, i: usize, j: usize) -> bool {
        (self.mean_ranks[i] - self.mean_ranks[j]).abs() > self.cd
    }
}

/// MCB on a `D×A` score matrix (rows datasets, lower is better).
pub fn mcb(scores: &Mat, alpha: f64) -> Result<McbResult> {
    let (d, a) = scores.shape();
    if d < 2 || a < 2 {
        return Err(Error::InvalidArgument(format!("MCB needs at least 2 datasets and 2 algorithms, got {d}x{a}")));
    }
    if scores.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN score in MCB input".into()));
    }
    let q_alpha = nemenyi_q(a, alpha)?;
    let mut ranks = Mat::zeros(d, a);
    for r in 0..d {
        let row: Vec<f64> = scores.row(r).iter().copied().collect();
        for (c, v) in average_ranks(&row).into_iter().enumerate() {
            ranks[(r, c)] = v;
        }
    }
    let mean_ranks: Vec<f64> = (0..a).map(|c| ranks.column(c).sum() / d as f64).collect();
    let cd = critical_distance(q_alpha, a, d);
    let best = (0..a).fold(0, |b, i| if mean_ranks[i] < mean_ranks[b] { i } else { b });
    Ok(McbResult {
        intervals: mean_ranks.iter().map(|r| (r - cd / 2.0, r + cd / 2.0)).collect(),
        mean_ranks,
        cd,
        q_alpha,
        alpha,
        best,
        ranks,
    })
}
