use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::panel::Panel;

/// Column layout of the regressor vector `[1, y_{t-1}', ..., y_{t-p}', x_t']`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub m: usize,
    pub p: usize,
    pub k: usize,
}

impl Layout {
    pub fn new(m: usize, p: usize, k: usize) -> Self {
        Layout { m, p, k }
    }

    /// Regressor dimension `1 + m·p + k`.
    pub fn d(&self) -> usize {
        1 + self.m * self.p + self.k
    }

    /// Row of the coefficient matrix for variable `j` at lag `lag` (1-based).
    pub fn lag_row(&self, lag: usize, j: usize) -> usize {
        debug_assert!(lag >= 1 && lag <= self.p && j < self.m);
        1 + (lag - 1) * self.m + j
    }

    pub fn exog_row(&self, q: usize) -> usize {
        debug_assert!(q < self.k);
        1 + self.m * self.p + q
    }
}

/// Stacked responses `Y` (rows t = p+1..T) and regressors `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrices {
    pub y: Mat,
    pub z: Mat,
    pub layout: Layout,
}

impl DesignMatrices {
    pub fn new(y: Mat, z: Mat, layout: Layout) -> Result<Self> {
        if y.nrows() != z.nrows() || y.ncols() != layout.m || z.ncols() != layout.d() {
            return Err(Error::Dimension(format!(
                "design Y {}x{} / Z {}x{} inconsistent with m={} d={}",
                y.nrows(),
                y.ncols(),
                z.nrows(),
                z.ncols(),
                layout.m,
                layout.d()
            )));
        }
        Ok(DesignMatrices { y, z, layout })
    }

    pub fn rows(&self) -> usize {
        self.y.nrows()
    }

    /// Vertical concatenation `self ⊕ other`.
    pub fn stack(&self, other: &DesignMatrices) -> Result<DesignMatrices> {
        if self.layout != other.layout {
            return Err(Error::Dimension("cannot stack designs with different layouts".into()));
        }
        let n = self.rows() + other.rows();
        let mut y = Mat::zeros(n, self.layout.m);
        let mut z = Mat::zeros(n, self.layout.d());
        y.rows_mut(0, self.rows()).copy_from(&self.y);
        y.rows_mut(self.rows(), other.rows()).copy_from(&other.y);
        z.rows_mut(0, self.rows()).copy_from(&self.z);
        z.rows_mut(self.rows(), other.rows()).copy_from(&other.z);
        Ok(DesignMatrices { y, z, layout: self.layout })
    }
}

/// Build `(Y, Z)` from a training panel for lag order `p`.
pub fn build_design(train: &Panel, p: usize) -> Result<DesignMatrices> {
    let t = train.len();
    if p == 0 {
        return Err(Error::InvalidArgument("lag order must be at least 1".into()));
    }
    if p >= t {
        return Err(Error::InsufficientData(format!("lag order {p} needs more than {t} observations")));
    }
    let layout = Layout::new(train.m(), p, train.k());
    let n = t - p;
    let endog = train.endog();
    let exog = train.exog();
    let mut y = Mat::zeros(n, layout.m);
    let mut z = Mat::zeros(n, layout.d());
    for r in 0..n {
        let row = r + p;
        for j in 0..layout.m {
            y[(r, j)] = endog[(row, j)];
        }
        z[(r, 0)] = 1.0;
        for lag in 1..=p {
            for j in 0..layout.m {
                z[(r, layout.lag_row(lag, j))] = endog[(row - lag, j)];
            }
        }
        for q in 0..layout.k {
            z[(r, layout.exog_row(q))] = exog[(row, q)];
        }
    }
    DesignMatrices::new(y, z, layout)
}
