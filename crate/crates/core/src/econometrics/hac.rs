//! Newey-West heteroskedasticity and autocorrelation consistent covariance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Automatic bandwidth floor(4 (n/100)^(2/9)).
pub fn default_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Bartlett-kernel HAC covariance of OLS coefficients. Bandwidth 0 gives
/// the White (HC0) estimator. No small-sample scaling is applied.
pub fn newey_west_cov(x: &DMatrix<f64>, residuals: &DVector<f64>, bandwidth: usize) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if residuals.len() != n {
        return Err(Error::Misaligned(format!(
            "design has {n} rows, residual vector has {}",
            residuals.len()
        )));
    }
    let bread = (x.transpose() * x)
        .try_inverse()
        .ok_or_else(|| Error::Singular("X'X is not invertible".into()))?;
    newey_west_cov_with_bread(x, residuals, bandwidth, &bread)
}

/// As [`newey_west_cov`] with a precomputed (X'X)^-1.
pub fn newey_west_cov_with_bread(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    bandwidth: usize,
    bread: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (n, k) = x.shape();
    // Score rows g_t = x_t u_t.
    let mut g = x.clone();
    for (mut row, u) in g.row_iter_mut().zip(residuals.iter()) {
        row *= *u;
    }
    let mut meat = g.transpose() * &g;
    for l in 1..=bandwidth.min(n.saturating_sub(1)) {
        let w = 1.0 - l as f64 / (bandwidth as f64 + 1.0);
        let lead = g.rows(l, n - l);
        let lag = g.rows(0, n - l);
        let gamma = lead.transpose() * lag;
        meat += (&gamma + gamma.transpose()) * w;
    }
    let cov = bread * meat * bread;
    // Symmetrize away rounding noise.
    Ok(DMatrix::from_fn(k, k, |i, j| 0.5 * (cov[(i, j)] + cov[(j, i)])))
}
