use serde::{Deserialize, Serialize};

use super::DrawCube;
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Economically admissible range for one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub const UNBOUNDED: Support = Support { lower: f64::NEG_INFINITY, upper: f64::INFINITY };
    /// Percentages such as unemployment or policy rates.
    pub const RATE: Support = Support { lower: 0.0, upper: 100.0 };
    /// Non-negative levels and prices.
    pub const LEVEL: Support = Support { lower: 0.0, upper: f64::INFINITY };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || !(lower < upper) {
            return Err(Error::InvalidArgument(format!("support bounds [{lower}, {upper}] must satisfy lower < upper")));
        }
        Ok(Support { lower, upper })
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }

    pub fn shifted(&self, c: f64) -> Support {
        Support { lower: self.lower + c, upper: self.upper + c }
    }
}

/// Named default bound families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Rate,
    Level,
    #[default]
    Unbounded,
}

impl From<BoundKind> for Support {
    fn from(k: BoundKind) -> Self {
        match k {
            BoundKind::Rate => Support::RATE,
            BoundKind::Level => Support::LEVEL,
            BoundKind::Unbounded => Support::UNBOUNDED,
        }
    }
}

/// Per-variable supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportBounds(pub Vec<Support>);

impl SupportBounds {
    pub fn unbounded(m: usize) -> Self {
        SupportBounds(vec![Support::UNBOUNDED; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One marginal credible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    /// 0-based variable index.
    pub variable: usize,
    /// 1-based forecast horizon.
    pub horizon: usize,
    pub lower: f64,
    pub upper: f64,
    pub gamma: f64,
    pub gamma_eff: f64,
    /// Share of draws inside the support.
    pub rho: f64,
    pub admissible: usize,
}

/// Smallest `k` with `k / n ≥ gamma`.
pub fn required_count(n: usize, gamma: f64) -> usize {
    let mut k = ((gamma * n as f64).ceil() as usize).clamp(1, n);
    while k > 1 && (k - 1) as f64 / n as f64 >= gamma {
        k -= 1;
    }
    while k < n && (k as f64 / n as f64) < gamma {
        k += 1;
    }
    k
}

/// Shortest interval containing `anchor` that holds at least a `gamma` share of
/// `draws`. Endpoints are draw values, or `anchor` itself when it falls outside
/// the best window. Equal widths resolve to the lowest window.
pub fn shortest_anchored(draws: &[f64], anchor: f64, gamma: f64) -> Result<(f64, f64)> {
    if draws.is_empty() {
        return Err(Error::InvalidArgument("no draws to build an interval from".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    if draws.iter().any(|v| v.is_nan()) || anchor.is_nan() {
        return Err(Error::InvalidArgument("NaN among draws or point forecast".into()));
    }
    let mut x = draws.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    let k = required_count(n, gamma);
    let mut best = (f64::INFINITY, f64::NAN, f64::NAN);
    for i in 0..=n - k {
        let lo = x[i].min(anchor);
        let hi = x[i + k - 1].max(anchor);
        let w = hi - lo;
        if w < best.0 {
            best = (w, lo, hi);
        }
    }
    Ok((best.1, best.2))
}

/// Component-wise intervals for every (variable, horizon) cell of the cube.
/// Draws outside the variable's support are discarded first.
pub fn credible_intervals(cube: &DrawCube, bounds: &SupportBounds, gamma: f64, point: &Mat) -> Result<Vec<Interval>> {
    if bounds.len() != cube.m || point.shape() != (cube.h, cube.m) {
        return Err(Error::Dimension(format!(
            "cube is {}x{}x{}, bounds cover {} variables, point is {}x{}",
            cube.s,
            cube.h,
            cube.m,
            bounds.len(),
            point.nrows(),
            point.ncols()
        )));
    }
    let mut out = Vec::with_capacity(cube.m * cube.h);
    for j in 0..cube.m {
        let support = bounds.0[j];
        for h in 0..cube.h {
            let adm: Vec<f64> = (0..cube.s).map(|s| cube.get(s, h, j)).filter(|v| support.contains(*v)).collect();
            if adm.is_empty() {
                return Err(Error::NoAdmissibleDraws { variable: j, horizon: h + 1 });
            }
            let rho = adm.len() as f64 / cube.s as f64;
            let (lower, upper) = shortest_anchored(&adm, point[(h, j)], gamma)?;
            out.push(Interval {
                variable: j,
                horizon: h + 1,
                lower,
                upper,
                gamma,
                gamma_eff: if rho < 1.0 { gamma * rho } else { gamma },
                rho,
                admissible: adm.len(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive search over every endpoint pair drawn from `draws ∪ {pf}`.
    fn brute(draws: &[f64], pf: f64, gamma: f64) -> (f64, f64) {
        let n = draws.len();
        let k = (1..=n).find(|k| *k as f64 / n as f64 >= gamma).unwrap();
        let mut cand: Vec<f64> = draws.to_vec();
        cand.push(pf);
        cand.sort_by(f64::total_cmp);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for &l in cand.iter().filter(|v| **v <= pf) {
            for &u in cand.iter().filter(|v| **v >= pf) {
                let c = draws.iter().filter(|v| **v >= l && **v <= u).count();
                if c >= k && u - l < best.0 {
                    best = (u - l, l, u);
                }
            }
        }
        (best.1, best.2)
    }

    #[test]
    fn required_count_exact() {
        assert_eq!(required_count(4, 0.5), 2);
        assert_eq!(required_count(3, 0.5), 2);
        assert_eq!(required_count(10, 0.9), 9);
        assert_eq!(required_count(1, 0.5), 1);
        assert_eq!(required_count(100, 0.29), 29);
    }

    #[test]
    fn degenerate_draws() {
        assert_eq!(shortest_anchored(&[3.0; 50], 3.0, 0.5).unwrap(), (3.0, 3.0));
    }

    #[test]
    fn evenly_spaced_draws() {
        let draws: Vec<f64> = (1..=100).map(f64::from).collect();
        let (l, u) = shortest_anchored(&draws, 50.5, 0.5).unwrap();
        assert_eq!((l, u), brute(&draws, 50.5, 0.5));
        assert_eq!(u - l, 49.0);
        assert!(l <= 50.5 && 50.5 <= u);
        assert_eq!((l, u), (2.0, 51.0));
    }

    #[test]
    fn truncated_rate_example() {
        let cube = DrawCube::from_fn(4, 1, 1, |s, _, _| [-5.0, 10.0, 20.0, 30.0][s]);
        let bounds = SupportBounds(vec![Support::RATE]);
        let point = Mat::from_element(1, 1, 20.0);
        let iv = credible_intervals(&cube, &bounds, 0.5, &point).unwrap();
        assert_eq!(iv.len(), 1);
        assert_eq!(iv[0].rho, 0.75);
        assert_eq!(iv[0].admissible, 3);
        assert!((iv[0].gamma_eff - 0.375).abs() < 1e-15);
        assert_eq!((iv[0].lower, iv[0].upper), (10.0, 20.0));
    }

    #[test]
    fn anchor_outside_draws() {
        let (l, u) = shortest_anchored(&[1.0, 2.0, 3.0, 4.0], 10.0, 0.5).unwrap();
        assert_eq!((l, u), (3.0, 10.0));
    }

    #[test]
    fn zero_admissible() {
        let cube = DrawCube::from_fn(3, 2, 1, |_, _, _| -1.0);
        let r = credible_intervals(&cube, &SupportBounds(vec![Support::LEVEL]), 0.5, &Mat::zeros(2, 1));
        assert!(matches!(r, Err(Error::NoAdmissibleDraws { variable: 0, horizon: 1 })));
    }

    #[test]
    fn matches_brute_force_with_ties() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.random_range(1..40);
            let draws: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..12))).collect();
            let pf = f64::from(rng.random_range(-2..14)) + 0.5 * f64::from(rng.random_range(0..2));
            let gamma = rng.random_range(0.05..0.95);
            assert_eq!(shortest_anchored(&draws, pf, gamma).unwrap(), brute(&draws, pf, gamma));
        }
    }
}
