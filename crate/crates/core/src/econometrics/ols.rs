//! Least squares via Householder QR.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative size of a QR diagonal entry below which a column is treated as
/// a linear combination of the columns before it.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    /// (X'X)^-1, computed from the triangular factor.
    pub xtx_inv: DMatrix<f64>,
}

impl OlsFit {
    pub fn n_obs(&self) -> usize {
        self.residuals.len()
    }

    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }

    /// Classical covariance s^2 (X'X)^-1 with s^2 = rss / (n - k).
    pub fn classical_cov(&self) -> DMatrix<f64> {
        let dof = (self.n_obs() - self.n_params()) as f64;
        &self.xtx_inv * (self.rss / dof)
    }
}

/// Least squares fit of `y` on the columns of `x`.
pub fn ols_fit(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    ols_fit_named(x, y, &[])
}

/// As [`ols_fit`]; `names` labels columns in rank-deficiency errors.
pub fn ols_fit_named(x: &DMatrix<f64>, y: &DVector<f64>, names: &[&str]) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::Misaligned(format!("design has {n} rows, response has {}", y.len())));
    }
    if k == 0 || n < k {
        return Err(Error::SeriesTooShort { needed: k.max(1), got: n });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..k {
        let col_norm = x.column(j).norm();
        if col_norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * col_norm {
            let name = names.get(j).map(|s| s.to_string()).unwrap_or_else(|| format!("x{j}"));
            return Err(Error::RankDeficient { column: j, name });
        }
    }
    let qty = qr.q().transpose() * y;
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let residuals = y - x * &coefficients;
    let rss = residuals.norm_squared();
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("triangular factor not invertible".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    Ok(OlsFit {
        coefficients,
        residuals,
        rss,
        xtx_inv,
    })
}
