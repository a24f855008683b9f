//! GARCH(1,1) by Gaussian quasi-maximum likelihood.

use nalgebra::{DMatrix, Matrix3};

use crate::econometrics::optimize::{nelder_mead, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::series::TradingDaySeries;

const MIN_OBS: usize = 250;
/// Upper bound on alpha + beta.
pub const PERSISTENCE_CAP: f64 = 0.9999;
const START_ALPHA: f64 = 0.05;
const START_BETA: f64 = 0.90;

#[derive(Debug, Clone)]
pub struct GarchFit {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Asymptotic standard errors of (omega, alpha, beta) from the inverse
    /// Hessian; `None` when the Hessian is not positive definite (typically
    /// an estimate on the boundary).
    pub std_errors: Option<[f64; 3]>,
    pub mean: f64,
    pub conditional_vol: TradingDaySeries,
    pub log_likelihood: f64,
    pub initial_log_likelihood: f64,
    pub iterations: usize,
}

impl GarchFit {
    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }
}

/// Conditional variance path started at `h0`.
pub fn garch_variance_path(eps: &[f64], omega: f64, alpha: f64, beta: f64, h0: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(eps.len());
    let mut prev = h0;
    for (t, _) in eps.iter().enumerate() {
        let cur = if t == 0 {
            h0
        } else {
            omega + alpha * eps[t - 1] * eps[t - 1] + beta * prev
        };
        h.push(cur);
        prev = cur;
    }
    h
}

fn log_likelihood(eps: &[f64], omega: f64, alpha: f64, beta: f64, h0: f64) -> f64 {
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let mut ll = 0.0;
    let mut h = h0;
    for t in 0..eps.len() {
        if t > 0 {
            h = omega + alpha * eps[t - 1] * eps[t - 1] + beta * h;
        }
        if !(h > 0.0) {
            return f64::NEG_INFINITY;
        }
        ll -= 0.5 * (ln2pi + h.ln() + eps[t] * eps[t] / h);
    }
    ll
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Unconstrained coordinates to (omega, alpha, beta).
fn to_params(theta: &[f64]) -> (f64, f64, f64) {
    let omega = theta[0].exp();
    let p = PERSISTENCE_CAP * sigmoid(theta[2]);
    let alpha = p * sigmoid(theta[1]);
    (omega, alpha, p - alpha)
}

fn to_theta(omega: f64, alpha: f64, beta: f64) -> [f64; 3] {
    let p = alpha + beta;
    [omega.ln(), logit(alpha / p), logit(p / PERSISTENCE_CAP)]
}

pub fn garch11_fit(returns: &TradingDaySeries) -> Result<GarchFit> {
    let r = returns.values();
    let n = r.len();
    if n < MIN_OBS {
        return Err(Error::SeriesTooShort { needed: MIN_OBS, got: n });
    }
    if r.iter().all(|v| *v == r[0]) {
        return Err(Error::DegenerateInput("returns are constant".into()));
    }
    let mean = r.iter().sum::<f64>() / n as f64;
    let eps: Vec<f64> = r.iter().map(|v| v - mean).collect();
    let var = eps.iter().map(|e| e * e).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return Err(Error::DegenerateInput("returns have zero variance".into()));
    }
    // Work on unit-variance data so the optimizer sees O(1) parameters.
    let sd = var.sqrt();
    let x: Vec<f64> = eps.iter().map(|e| e / sd).collect();
    let h0 = 1.0;
    let start_omega = 1.0 - START_ALPHA - START_BETA;
    let theta0 = to_theta(start_omega, START_ALPHA, START_BETA);
    let objective = |theta: &[f64]| {
        let (o, a, b) = to_params(theta);
        -log_likelihood(&x, o, a, b, h0)
    };
    let initial = -objective(&theta0);
    let opts = NelderMeadOptions {
        step: 0.5,
        ..NelderMeadOptions::default()
    };
    let m = nelder_mead(objective, &theta0, &opts);
    let best = -m.f;
    if !best.is_finite() || best < initial {
        return Err(Error::Optimizer(format!(
            "GARCH likelihood did not improve on the start point (start {initial:.6}, end {best:.6}, {} iterations)",
            m.iterations
        )));
    }
    let (omega_x, alpha, beta) = to_params(&m.x);
    let std_errors = hessian_std_errors(&x, omega_x, alpha, beta, h0).map(|se| [se[0] * var, se[1], se[2]]);

    let omega = omega_x * var;
    let h = garch_variance_path(&eps, omega, alpha, beta, var);
    let vol = TradingDaySeries::new("sigma", returns.dates().to_vec(), h.iter().map(|v| v.sqrt()).collect())?;
    // Rescaling by sd shifts the log-likelihood by -n ln(sd).
    let shift = -(n as f64) * sd.ln();
    Ok(GarchFit {
        omega,
        alpha,
        beta,
        std_errors,
        mean,
        conditional_vol: vol,
        log_likelihood: best + shift,
        initial_log_likelihood: initial + shift,
        iterations: m.iterations,
    })
}

/// Inverse of the central-difference Hessian of -ll in (omega, alpha, beta).
fn hessian_std_errors(x: &[f64], omega: f64, alpha: f64, beta: f64, h0: f64) -> Option<[f64; 3]> {
    let p = [omega, alpha, beta];
    let f = |q: &[f64; 3]| -log_likelihood(x, q[0], q[1], q[2], h0);
    let h: Vec<f64> = p.iter().map(|v| 1e-4 * v.abs().max(1e-3)).collect();
    let mut hess = Matrix3::zeros();
    for i in 0..3 {
        for j in i..3 {
            let shifted = |di: f64, dj: f64| {
                let mut q = p;
                q[i] += di * h[i];
                q[j] += dj * h[j];
                f(&q)
            };
            let v = (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0) + shifted(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let cov = DMatrix::from_iterator(3, 3, hess.iter().copied()).cholesky()?.inverse();
    let se = [cov[(0, 0)].sqrt(), cov[(1, 1)].sqrt(), cov[(2, 2)].sqrt()];
    se.iter().all(|s| s.is_finite()).then_some(se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn dated(values: Vec<f64>) -> TradingDaySeries {
        let cal = crate::calendar::BusinessCalendar::weekends_only();
        let dates = cal.business_days_from(NaiveDate::from_ymd_opt(2013, 1, 2).unwrap(), values.len());
        TradingDaySeries::new("r", dates, values).unwrap()
    }

    fn simulate(rng: &mut ChaCha8Rng, n: usize, omega: f64, alpha: f64, beta: f64) -> Vec<f64> {
        let mut h = omega / (1.0 - alpha - beta);
        let mut prev = 0.0;
        (0..n + 500)
            .map(|_| {
                h = omega + alpha * prev * prev + beta * h;
                prev = h.sqrt() * rng.sample::<f64, _>(StandardNormal);
                prev
            })
            .skip(500)
            .collect()
    }

    #[test]
    fn transforms_round_trip() {
        let t = to_theta(0.3, 0.07, 0.91);
        let (o, a, b) = to_params(&t);
        assert!((o - 0.3).abs() < 1e-12 && (a - 0.07).abs() < 1e-12 && (b - 0.91).abs() < 1e-12);
        let (_, a, b) = to_params(&[0.0, 40.0, 40.0]);
        assert!(a + b <= PERSISTENCE_CAP);
    }

    #[test]
    fn recovers_known_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let r = simulate(&mut rng, 4000, 1e-6, 0.08, 0.90);
        let fit = garch11_fit(&dated(r)).unwrap();
        let se = fit.std_errors.unwrap();
        assert!((fit.alpha - 0.08).abs() < 3.0 * se[1], "{fit:?}");
        assert!((fit.beta - 0.90).abs() < 3.0 * se[2], "{fit:?}");
        assert!((fit.omega - 1e-6).abs() < 3.0 * se[0], "{fit:?}");
        assert!(fit.log_likelihood >= fit.initial_log_likelihood);
        assert!(fit.conditional_vol.values().iter().all(|v| *v > 0.0));
    }

    #[test]
    fn iid_returns_have_small_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let r: Vec<f64> = (0..3000).map(|_| 0.02 * rng.sample::<f64, _>(StandardNormal)).collect();
        let var = {
            let m = r.iter().sum::<f64>() / r.len() as f64;
            r.iter().map(|v| (v - m).powi(2)).sum::<f64>() / r.len() as f64
        };
        let fit = garch11_fit(&dated(r)).unwrap();
        assert!(fit.alpha < 0.05, "{fit:?}");
        let rel = (fit.unconditional_variance() / var - 1.0).abs();
        assert!(rel < 0.10, "{rel}");
    }

    #[test]
    fn short_or_flat_input_rejected() {
        assert!(garch11_fit(&dated(vec![0.01; 100])).is_err());
        assert!(matches!(garch11_fit(&dated(vec![0.01; 300])), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn variance_path_positive() {
        let eps = [0.5, -2.0, 0.0, 1.0];
        let h = garch_variance_path(&eps, 1e-8, 0.0, 0.0, 1e-8);
        assert!(h.iter().all(|v| *v > 0.0));
    }
}
