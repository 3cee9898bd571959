//! Small dense linear-algebra helpers on top of `nalgebra`.
//!
//! Everything symmetric positive-definite goes through a Cholesky factor; no
//! general-purpose inverse is formed from an unfactored matrix.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub(crate) fn cholesky(a: &Mat, what: &str) -> Result<Cholesky<f64, Dyn>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("{what} is {}x{}, expected square", a.nrows(), a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite(what.to_string()));
    }
    Cholesky::new(a.clone()).ok_or_else(|| Error::NotPositiveDefinite(what.to_string()))
}

/// Lower Cholesky factor of a covariance that may be exactly zero.
///
/// A zero matrix yields a zero factor so that noise-free simulation is a
/// well-defined limit; anything else must be positive definite.
pub(crate) fn noise_factor(cov: &Mat, what: &str) -> Result<Mat> {
    if cov.iter().all(|v| *v == 0.0) {
        return Ok(Mat::zeros(cov.nrows(), cov.ncols()));
    }
    Ok(cholesky(cov, what)?.l())
}

pub(crate) fn symmetrize(a: &mut Mat) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

pub(crate) fn spd_inverse(a: &Mat, what: &str) -> Result<Mat> {
    let mut inv = cholesky(a, what)?.inverse();
    symmetrize(&mut inv);
    Ok(inv)
}

/// Inverse of a matrix known to be diagonal, or a Cholesky inverse otherwise.
pub(crate) fn spd_inverse_fast(a: &Mat, what: &str) -> Result<Mat> {
    let n = a.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == 0.0));
    if diagonal {
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            let v = a[(i, i)];
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NotPositiveDefinite(what.to_string()));
            }
            inv[(i, i)] = 1.0 / v;
        }
        return Ok(inv);
    }
    spd_inverse(a, what)
}

/// Least-squares solution from a column-pivoted QR factorisation.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LeastSquares {
    /// Coefficients; columns judged dependent are set to zero.
    pub beta: Mat,
    pub rank: usize,
    /// Original column indices left out of the basic solution.
    pub dropped: Vec<usize>,
}

/// Solve `min ‖X B − Y‖` for every column of `Y`. A column is treated as
/// dependent when its pivoted `R` diagonal falls below `rtol · |R_00|`.
pub(crate) fn least_squares(x: &Mat, y: &Mat, rtol: f64) -> Result<LeastSquares> {
    let (n, d) = x.shape();
    if y.nrows() != n {
        return Err(Error::Dimension(format!("design has {n} rows, response {}", y.nrows())));
    }
    if d == 0 {
        return Ok(LeastSquares { beta: Mat::zeros(0, y.ncols()), rank: 0, dropped: vec![] });
    }
    let qr = x.clone().col_piv_qr();
    let r = qr.r();
    let mut perm = Mat::identity(d, d);
    qr.p().permute_columns(&mut perm);
    let order: Vec<usize> = (0..d)
        .map(|c| (0..d).find(|&i| perm[(i, c)] == 1.0).expect("permutation column"))
        .collect();
    let lead = r[(0, 0)].abs();
    let rank = (0..r.nrows().min(d)).take_while(|&i| r[(i, i)].abs() > rtol * lead).count();
    let mut beta = Mat::zeros(d, y.ncols());
    if rank > 0 {
        let qty = qr.q().columns(0, rank).transpose() * y;
        let r11 = r.view((0, 0), (rank, rank)).into_owned();
        let sol = r11
            .solve_upper_triangular(&qty)
            .ok_or_else(|| Error::RankDeficient("triangular solve failed".into()))?;
        for (i, &c) in order.iter().take(rank).enumerate() {
            beta.row_mut(c).copy_from(&sol.row(i));
        }
    }
    let mut dropped: Vec<usize> = order[rank..].to_vec();
    dropped.sort_unstable();
    Ok(LeastSquares { beta, rank, dropped })
}

/// Row-major JSON layout for matrices: `{"rows": r, "cols": c, "data": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&Mat> for JsonMatrix {
    fn from(m: &Mat) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        JsonMatrix { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl TryFrom<JsonMatrix> for Mat {
    type Error = Error;

    fn try_from(j: JsonMatrix) -> Result<Mat> {
        if j.data.len() != j.rows * j.cols {
            return Err(Error::Dimension(format!(
                "matrix declares {}x{} but carries {} values",
                j.rows,
                j.cols,
                j.data.len()
            )));
        }
        Ok(Mat::from_row_slice(j.rows, j.cols, &j.data))
    }
}

/// `#[serde(with = "crate::linalg::row_major")]` for `DMatrix<f64>` fields.
pub mod row_major {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
        JsonMatrix::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Mat, D::Error> {
        let j = JsonMatrix::deserialize(d)?;
        Mat::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Same as [`row_major`] for a list of matrices.
pub mod row_major_vec {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[Mat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<JsonMatrix> = ms.iter().map(JsonMatrix::from).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Mat>, D::Error> {
        let v = Vec::<JsonMatrix>::deserialize(d)?;
        v.into_iter()
            .map(|j| Mat::try_from(j).map_err(serde::de::Error::custom))
            .collect()
    }
}
