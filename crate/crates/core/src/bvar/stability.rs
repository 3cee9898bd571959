use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Eigenvalues with modulus at or above `1 - STABILITY_EPS` count as unstable.
pub const STABILITY_EPS: f64 = 1e-9;

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 10_000;

/// `mp×mp` companion matrix of the lag polynomial `Φ_1, ..., Φ_p`.
pub fn companion(phi: &[Mat]) -> Result<Mat> {
    let p = phi.len();
    if p == 0 {
        return Err(Error::InvalidArgument("companion matrix needs at least one lag".into()));
    }
    let m = phi[0].nrows();
    if phi.iter().any(|f| f.shape() != (m, m)) {
        return Err(Error::Dimension("lag matrices must all be square with the same size".into()));
    }
    let mut c = Mat::zeros(m * p, m * p);
    for (l, f) in phi.iter().enumerate() {
        c.view_mut((0, l * m), (m, m)).copy_from(f);
    }
    for i in m..m * p {
        c[(i, i - m)] = 1.0;
    }
    Ok(c)
}

/// Largest eigenvalue modulus of the companion matrix.
pub fn spectral_radius(phi: &[Mat]) -> Result<f64> {
    let c = companion(phi)?;
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNonConvergence("companion matrix has non-finite entries".into()));
    }
    if c.nrows() == 1 {
        return Ok(c[(0, 0)].abs());
    }
    let schur = c
        .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::EigenNonConvergence(format!("Schur iteration on {0}x{0} companion", phi.len() * phi[0].nrows())))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `(stable, spectral_radius)` for a lag polynomial.
pub fn classify(phi: &[Mat]) -> Result<(bool, f64)> {
    let r = spectral_radius(phi)?;
    Ok((r < 1.0 - STABILITY_EPS, r))
}
