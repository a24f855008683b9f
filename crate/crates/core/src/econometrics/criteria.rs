//! Information criteria and the Gaussian regression log-likelihood.

/// (AIC, BIC) for a model with `k_params` parameters fitted on `n_obs` rows.
pub fn info_criteria(log_likelihood: f64, k_params: usize, n_obs: usize) -> (f64, f64) {
    info_criteria_real(log_likelihood, k_params, n_obs as f64)
}

/// Same as [`info_criteria`] with a real-valued sample size.
pub fn info_criteria_real(log_likelihood: f64, k_params: usize, n_obs: f64) -> (f64, f64) {
    let k = k_params as f64;
    (-2.0 * log_likelihood + 2.0 * k, -2.0 * log_likelihood + k * n_obs.ln())
}

/// Concentrated Gaussian log-likelihood of a regression with residual sum
/// of squares `rss` over `n` observations.
pub fn gaussian_log_likelihood(rss: f64, n: usize) -> f64 {
    let n = n as f64;
    -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + (rss / n).ln() + 1.0)
}
