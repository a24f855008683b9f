//! Johansen trace and maximum-eigenvalue tests without deterministic terms.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JohansenTest {
    Trace,
    MaxEigen,
}

/// Confidence level of a critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Level {
    P90,
    #[default]
    P95,
    P99,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::P90, Level::P95, Level::P99];

    fn index(self) -> usize {
        match self {
            Level::P90 => 0,
            Level::P95 => 1,
            Level::P99 => 2,
        }
    }

    /// Level whose test size equals `alpha` (0.10, 0.05 or 0.01).
    pub fn from_significance(alpha: f64) -> Result<Self> {
        match alpha {
            a if (a - 0.10).abs() < 1e-12 => Ok(Level::P90),
            a if (a - 0.05).abs() < 1e-12 => Ok(Level::P95),
            a if (a - 0.01).abs() < 1e-12 => Ok(Level::P99),
            other => Err(Error::Config(format!("significance must be 0.10, 0.05 or 0.01, got {other}"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::P90 => "90%",
            Level::P95 => "95%",
            Level::P99 => "99%",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_end_matches('%') {
            "90" => Ok(Level::P90),
            "95" => Ok(Level::P95),
            "99" => Ok(Level::P99),
            other => Err(Error::Config(format!("unknown confidence level `{other}`"))),
        }
    }
}

// Rows indexed by g - q = 1..=6, columns 90/95/99%. The first three rows are
// the published no-deterministic-term values to one decimal; rows 4 to 6
// extend them from the MacKinnon-Haug-Michelis surfaces.
const TRACE_CV: [[f64; 3]; 6] = [
    [3.0, 4.1, 6.9],
    [9.1, 12.3, 16.4],
    [21.8, 24.3, 29.5],
    [37.0, 40.2, 46.6],
    [56.3, 60.1, 67.6],
    [79.5, 83.9, 92.7],
];
const EIGEN_CV: [[f64; 3]; 6] = [
    [3.0, 4.1, 6.9],
    [9.5, 11.2, 15.1],
    [15.7, 17.8, 22.3],
    [21.8, 24.2, 29.1],
    [27.9, 30.4, 35.7],
    [33.9, 36.6, 42.2],
];

/// Stored critical value for `g_minus_q` non-cointegrated directions.
pub fn johansen_critical_value(test: JohansenTest, g_minus_q: usize, level: Level) -> Option<f64> {
    let table = match test {
        JohansenTest::Trace => &TRACE_CV,
        JohansenTest::MaxEigen => &EIGEN_CV,
    };
    table.get(g_minus_q.checked_sub(1)?).map(|row| row[level.index()])
}

#[derive(Debug, Clone, PartialEq)]
pub struct JohansenResult {
    /// Indexed by the null q (rank <= q), q = 0..g.
    pub trace_stats: Vec<f64>,
    pub eigen_stats: Vec<f64>,
    /// Per null q: [90, 95, 99]% critical values.
    pub trace_critical: Vec<[f64; 3]>,
    pub eigen_critical: Vec<[f64; 3]>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column i pairs with eigenvalue i; first component normalized to 1.
    pub cointegration_vectors: DMatrix<f64>,
    /// Smallest q whose trace null is not rejected; g if all are rejected.
    pub selected_rank: usize,
    pub level: Level,
    /// VAR order in levels (k - 1 lagged differences).
    pub k_ar: usize,
    pub n_obs: usize,
}

impl JohansenResult {
    /// The leading cointegration vector (1, -gamma_1, -gamma_2, ...).
    pub fn leading_vector(&self) -> Vec<f64> {
        self.cointegration_vectors.column(0).iter().copied().collect()
    }
}

/// Rows n-k..n of the lagged-difference regressor block for a VAR(k).
fn lagged_differences(levels: &DMatrix<f64>, k: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (n, g) = levels.shape();
    let t0 = k; // first usable time index
    let rows = n - t0;
    let dx = |t: usize, j: usize| levels[(t, j)] - levels[(t - 1, j)];
    let d0 = DMatrix::from_fn(rows, g, |i, j| dx(t0 + i, j));
    let l1 = DMatrix::from_fn(rows, g, |i, j| levels[(t0 + i - 1, j)]);
    let z = DMatrix::from_fn(rows, g * (k - 1), |i, c| {
        let lag = c / g + 1;
        dx(t0 + i - lag, c % g)
    });
    (d0, l1, z)
}

fn residualize(y: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if z.ncols() == 0 {
        return Ok(y.clone());
    }
    let ztz = z.transpose() * z;
    let chol = ztz
        .cholesky()
        .ok_or_else(|| Error::Singular("lagged-difference moment matrix".into()))?;
    let b = chol.solve(&(z.transpose() * y));
    Ok(y - z * b)
}

pub fn johansen(levels: &DMatrix<f64>, k: usize, level: Level) -> Result<JohansenResult> {
    let (n, g) = levels.shape();
    if !(2..=6).contains(&g) {
        return Err(Error::InvalidArgument(format!("johansen needs 2 to 6 series, got {g}")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("VAR order must be at least 1".into()));
    }
    if n <= g * k + 20 {
        return Err(Error::SeriesTooShort { needed: g * k + 21, got: n });
    }
    let (d0, l1, z) = lagged_differences(levels, k);
    let t = d0.nrows();
    let r0 = residualize(&d0, &z)?;
    let r1 = residualize(&l1, &z)?;
    let tf = t as f64;
    let s00 = r0.transpose() * &r0 / tf;
    let s11 = r1.transpose() * &r1 / tf;
    let s01 = r0.transpose() * &r1 / tf;

    let s00_inv = s00
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("S00 is not positive definite".into()))?
        .inverse();
    let l = s11
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("S11 is not positive definite".into()))?
        .l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("S11 factor".into()))?;
    // L^-1 S10 S00^-1 S01 L^-T shares its eigenvalues with the Johansen problem.
    let m = &l_inv * s01.transpose() * &s00_inv * &s01 * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..g).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order
        .iter()
        .map(|&i| eig.eigenvalues[i].clamp(0.0, 1.0 - 1e-15))
        .collect();
    let lt_inv = l_inv.transpose();
    let mut vectors = DMatrix::zeros(g, g);
    for (c, &i) in order.iter().enumerate() {
        let v = &lt_inv * eig.eigenvectors.column(i);
        let lead = v[0];
        let v = if lead.abs() > f64::MIN_POSITIVE { v / lead } else { v };
        vectors.set_column(c, &v);
    }

    let logs: Vec<f64> = eigenvalues.iter().map(|l| -tf * (1.0 - l).ln()).collect();
    let eigen_stats = logs.clone();
    let trace_stats: Vec<f64> = (0..g).map(|q| logs[q..].iter().sum()).collect();
    let cv = |test, q: usize| {
        let mut row = [0.0; 3];
        for lv in Level::ALL {
            row[lv.index()] = johansen_critical_value(test, g - q, lv).expect("g <= 6");
        }
        row
    };
    let trace_critical: Vec<[f64; 3]> = (0..g).map(|q| cv(JohansenTest::Trace, q)).collect();
    let eigen_critical: Vec<[f64; 3]> = (0..g).map(|q| cv(JohansenTest::MaxEigen, q)).collect();
    let selected_rank = (0..g)
        .find(|&q| trace_stats[q] <= trace_critical[q][level.index()])
        .unwrap_or(g);
    Ok(JohansenResult {
        trace_stats,
        eigen_stats,
        trace_critical,
        eigen_critical,
        eigenvalues,
        cointegration_vectors: vectors,
        selected_rank,
        level,
        k_ar: k,
        n_obs: t,
    })
}

/// VAR order in levels (no deterministic terms) minimizing BIC over
/// 1..=max_k on a common sample.
pub fn select_var_order(levels: &DMatrix<f64>, max_k: usize) -> Result<usize> {
    let (n, g) = levels.shape();
    let max_k = max_k.max(1);
    if n <= max_k * g + 20 {
        return Err(Error::SeriesTooShort { needed: max_k * g + 21, got: n });
    }
    let rows = n - max_k;
    let y = levels.rows(max_k, rows).into_owned();
    let mut best = (f64::INFINITY, 1);
    for k in 1..=max_k {
        let x = DMatrix::from_fn(rows, g * k, |i, c| levels[(max_k + i - (c / g + 1), c % g)]);
        let xtx = x.transpose() * &x;
        let Some(chol) = xtx.cholesky() else {
            continue;
        };
        let b = chol.solve(&(x.transpose() * &y));
        let e = &y - &x * b;
        let sigma = e.transpose() * &e / rows as f64;
        let det = sigma.determinant();
        if !(det > 0.0) {
            continue;
        }
        let bic = det.ln() + (k * g * g) as f64 * (rows as f64).ln() / rows as f64;
        if bic < best.0 {
            best = (bic, k);
        }
    }
    if best.0.is_infinite() {
        return Err(Error::Singular("no admissible VAR order".into()));
    }
    Ok(best.1)
}
