//! ADF-GLS unit-root test (Elliott, Rothenberg and Stock).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::econometrics::ols::ols_fit;
use crate::error::{Error, Result};
use crate::series::TradingDaySeries;

const MIN_OBS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deterministic {
    Constant,
    Trend,
}

impl Deterministic {
    /// Local-to-unity parameter used for quasi-differencing.
    pub fn c_bar(self) -> f64 {
        match self {
            Deterministic::Constant => -7.0,
            Deterministic::Trend => -13.5,
        }
    }
}

impl fmt::Display for Deterministic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Deterministic::Constant => "constant",
            Deterministic::Trend => "trend",
        })
    }
}

impl FromStr for Deterministic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" | "c" => Ok(Deterministic::Constant),
            "trend" | "ct" => Ok(Deterministic::Trend),
            other => Err(Error::Config(format!("unknown deterministic case `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagRule {
    /// Use exactly `max_lag` augmentation lags.
    Fixed,
    /// Minimize BIC over 0..=max_lag on a common sample.
    Bic,
}

impl FromStr for LagRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" => Ok(LagRule::Fixed),
            "bic" | "ic" | "information-criterion" => Ok(LagRule::Bic),
            other => Err(Error::Config(format!("unknown lag rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitRootResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    pub deterministic: Deterministic,
    /// Rows in the final ADF regression.
    pub n_obs: usize,
}

/// Schwert upper bound floor(12 (n/100)^(1/4)).
pub fn schwert_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

pub fn adf_gls(
    s: &TradingDaySeries,
    deterministic: Deterministic,
    max_lag: Option<usize>,
    lag_rule: LagRule,
) -> Result<UnitRootResult> {
    adf_gls_values(s.values(), deterministic, max_lag, lag_rule)
}

pub fn adf_gls_values(
    y: &[f64],
    deterministic: Deterministic,
    max_lag: Option<usize>,
    lag_rule: LagRule,
) -> Result<UnitRootResult> {
    let n = y.len();
    if n < MIN_OBS {
        return Err(Error::SeriesTooShort { needed: MIN_OBS, got: n });
    }
    let max_lag = max_lag.unwrap_or_else(|| schwert_max_lag(n)).min(n / 2 - 2);
    if y.iter().all(|v| *v == y[0]) {
        return Err(Error::DegenerateInput("constant series".into()));
    }
    let yd = gls_detrend(y, deterministic)?;
    let dy: Vec<f64> = yd.windows(2).map(|w| w[1] - w[0]).collect();
    // Lags are chosen on the OLS-detrended series. On the GLS-detrended one
    // the constant is pinned near y[0], and a stationary series then keeps
    // an offset that long lag polynomials absorb, costing power.
    let lags = match lag_rule {
        LagRule::Fixed => max_lag,
        LagRule::Bic => {
            let yo = ols_detrend(y, deterministic)?;
            let dyo: Vec<f64> = yo.windows(2).map(|w| w[1] - w[0]).collect();
            select_lag_bic(&yo, &dyo, max_lag)?
        }
    };
    let (statistic, n_obs) = adf_t_ratio(&yd, &dy, lags)?;
    Ok(UnitRootResult {
        statistic,
        p_value: adf_gls_p_value(statistic, deterministic),
        lags_used: lags,
        deterministic,
        n_obs,
    })
}

/// GLS demeaned or detrended series, keeping the first observation in the
/// quasi-differenced regression.
pub fn gls_detrend(y: &[f64], deterministic: Deterministic) -> Result<Vec<f64>> {
    let n = y.len();
    let a = 1.0 + deterministic.c_bar() / n as f64;
    let k = match deterministic {
        Deterministic::Constant => 1,
        Deterministic::Trend => 2,
    };
    let z = |t: usize, j: usize| if j == 0 { 1.0 } else { (t + 1) as f64 };
    let zq = DMatrix::from_fn(n, k, |t, j| if t == 0 { z(0, j) } else { z(t, j) - a * z(t - 1, j) });
    let yq = DVector::from_fn(n, |t, _| if t == 0 { y[0] } else { y[t] - a * y[t - 1] });
    let b = ols_fit(&zq, &yq)?.coefficients;
    Ok((0..n)
        .map(|t| y[t] - (0..k).map(|j| z(t, j) * b[j]).sum::<f64>())
        .collect())
}

/// Residuals of `y` on a constant (and trend).
fn ols_detrend(y: &[f64], deterministic: Deterministic) -> Result<Vec<f64>> {
    let n = y.len();
    let k = match deterministic {
        Deterministic::Constant => 1,
        Deterministic::Trend => 2,
    };
    let z = DMatrix::from_fn(n, k, |t, j| if j == 0 { 1.0 } else { (t + 1) as f64 });
    Ok(ols_fit(&z, &DVector::from_column_slice(y))?.residuals.iter().copied().collect())
}

/// Row t of the ADF design: [yd_{t-1}, dy_{t-1}, ..., dy_{t-p}] for target dy_t.
fn design(yd: &[f64], dy: &[f64], p: usize, first: usize) -> (DMatrix<f64>, DVector<f64>) {
    let rows = dy.len() - first;
    let x = DMatrix::from_fn(rows, p + 1, |i, j| {
        let t = first + i;
        if j == 0 {
            yd[t]
        } else {
            dy[t - j]
        }
    });
    let y = DVector::from_fn(rows, |i, _| dy[first + i]);
    (x, y)
}

/// BIC lag choice over a common sample. Moment matrices are formed once and
/// each candidate's RSS comes from the leading Cholesky block.
fn select_lag_bic(yd: &[f64], dy: &[f64], max_lag: usize) -> Result<usize> {
    let (x, y) = design(yd, dy, max_lag, max_lag);
    let n = y.len() as f64;
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let yty = y.norm_squared();
    let mut best = (f64::INFINITY, 0);
    for p in 0..=max_lag {
        let k = p + 1;
        let block = xtx.view((0, 0), (k, k)).into_owned();
        let Some(chol) = block.cholesky() else {
            continue;
        };
        let w = chol
            .l()
            .solve_lower_triangular(&xty.rows(0, k).into_owned())
            .ok_or_else(|| Error::Singular("lag-selection moment matrix".into()))?;
        let rss = (yty - w.norm_squared()).max(f64::MIN_POSITIVE);
        let bic = n * (rss / n).ln() + k as f64 * n.ln();
        if bic < best.0 {
            best = (bic, p);
        }
    }
    if best.0.is_infinite() {
        return Err(Error::Singular("no admissible ADF lag order".into()));
    }
    Ok(best.1)
}

fn adf_t_ratio(yd: &[f64], dy: &[f64], p: usize) -> Result<(f64, usize)> {
    let (x, y) = design(yd, dy, p, p);
    let fit = ols_fit(&x, &y)?;
    let dof = (y.len() - (p + 1)) as f64;
    let se = (fit.rss / dof * fit.xtx_inv[(0, 0)]).sqrt();
    Ok((fit.coefficients[0] / se, y.len()))
}

const P_GRID: [f64; 19] = [
    0.001, 0.005, 0.01, 0.025, 0.05, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.95, 0.975, 0.99, 0.995,
    0.999,
];

/// Left-tail quantiles of the ADF-GLS t-ratio under the unit-root null,
/// simulated with T = 1000 and 200 000 replications.
const Q_CONSTANT: [f64; 19] = [
    -3.316, -2.815, -2.589, -2.257, -1.969, -1.650, -1.268, -0.998, -0.771, -0.545, -0.289, 0.002, 0.349, 0.840,
    1.240, 1.586, 1.992, 2.234, 2.752,
];
const Q_TREND: [f64; 19] = [
    -4.097, -3.649, -3.424, -3.119, -2.864, -2.575, -2.242, -2.007, -1.816, -1.642, -1.474, -1.298, -1.094, -0.816,
    -0.588, -0.388, -0.162, -0.005, 0.311,
];

/// Critical value at left-tail probability `p` (must be a grid point).
pub fn adf_gls_critical_value(p: f64, deterministic: Deterministic) -> Option<f64> {
    let q = quantiles(deterministic);
    P_GRID.iter().position(|g| (g - p).abs() < 1e-12).map(|i| q[i])
}

fn quantiles(deterministic: Deterministic) -> &'static [f64; 19] {
    match deterministic {
        Deterministic::Constant => &Q_CONSTANT,
        Deterministic::Trend => &Q_TREND,
    }
}

/// Left-tail p-value with ln(p) interpolated linearly in the statistic,
/// clamped to [0.001, 0.999].
pub fn adf_gls_p_value(statistic: f64, deterministic: Deterministic) -> f64 {
    let q = quantiles(deterministic);
    if statistic.is_nan() {
        return f64::NAN;
    }
    if statistic <= q[0] {
        return P_GRID[0];
    }
    if statistic >= q[q.len() - 1] {
        return P_GRID[P_GRID.len() - 1];
    }
    let i = q.partition_point(|v| *v <= statistic);
    let (x0, x1) = (q[i - 1], q[i]);
    let (l0, l1) = (P_GRID[i - 1].ln(), P_GRID[i].ln());
    (l0 + (l1 - l0) * (statistic - x0) / (x1 - x0)).exp()
}
