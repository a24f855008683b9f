//! Unit-root and cointegration tests, OLS with HAC errors, the ECM,
//! GARCH(1,1) and information criteria.

pub mod adf;
pub mod criteria;
pub mod ecm;
pub mod garch;
pub mod hac;
pub mod johansen;
pub mod ols;
pub mod optimize;

pub use adf::{adf_gls, adf_gls_p_value, adf_gls_values, Deterministic, LagRule, UnitRootResult};
pub use criteria::{gaussian_log_likelihood, info_criteria};
pub use ecm::{fit_ecm, significance_stars, ControlSet, EcmData, EcmFit, EcmTerm, EcmVariant};
pub use garch::{garch11_fit, GarchFit};
pub use hac::{default_bandwidth, newey_west_cov};
pub use johansen::{johansen, johansen_critical_value, select_var_order, JohansenResult, JohansenTest, Level};
pub use ols::{ols_fit, OlsFit};
