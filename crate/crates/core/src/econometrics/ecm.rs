//! Error-correction regression of the C-spread with HAC inference.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::econometrics::criteria::{gaussian_log_likelihood, info_criteria};
use crate::econometrics::hac::{default_bandwidth, newey_west_cov_with_bread};
use crate::econometrics::ols::ols_fit_named;
use crate::error::{Error, Result};
use crate::series::TradingDaySeries;

/// Regressor subsets, one per column of the daily ECM table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EcmVariant {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl EcmVariant {
    pub const ALL: [EcmVariant; 6] = [
        EcmVariant::I,
        EcmVariant::II,
        EcmVariant::III,
        EcmVariant::IV,
        EcmVariant::V,
        EcmVariant::VI,
    ];

    fn has_lags(self) -> bool {
        matches!(self, EcmVariant::I | EcmVariant::II | EcmVariant::IV | EcmVariant::VI)
    }

    fn has_psi(self) -> bool {
        self.has_lags()
    }

    fn has_dz_dr(self) -> bool {
        matches!(self, EcmVariant::II | EcmVariant::IV | EcmVariant::VI)
    }

    fn has_wti(self) -> bool {
        matches!(self, EcmVariant::III | EcmVariant::IV | EcmVariant::V | EcmVariant::VI)
    }

    fn has_market_controls(self) -> bool {
        matches!(self, EcmVariant::V | EcmVariant::VI)
    }

    pub fn needs_controls(self) -> bool {
        self.has_wti()
    }
}

impl fmt::Display for EcmVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EcmVariant::I => "I",
            EcmVariant::II => "II",
            EcmVariant::III => "III",
            EcmVariant::IV => "IV",
            EcmVariant::V => "V",
            EcmVariant::VI => "VI",
        })
    }
}

impl FromStr for EcmVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')').to_ascii_uppercase();
        EcmVariant::ALL
            .into_iter()
            .find(|v| v.to_string() == t)
            .ok_or_else(|| Error::Config(format!("unknown ECM variant `{s}` (expected I..VI)")))
    }
}

/// Control regressors, already aligned to the ECM dates.
#[derive(Debug, Clone)]
pub struct ControlSet {
    pub spx_logret: TradingDaySeries,
    pub vix_level: TradingDaySeries,
    pub wti_logret: TradingDaySeries,
    pub sigma: TradingDaySeries,
}

/// ECM inputs sharing one date index. `psi` holds the cointegration
/// residual on the same dates as `dc`; its one-period lag is taken here.
#[derive(Debug, Clone, Copy)]
pub struct EcmData<'a> {
    pub dc: &'a TradingDaySeries,
    pub dz: &'a TradingDaySeries,
    pub dr: &'a TradingDaySeries,
    pub psi: &'a TradingDaySeries,
    pub controls: Option<&'a ControlSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcmTerm {
    /// Display label, e.g. `dC(t-1)`.
    pub name: String,
    /// Coefficient symbol, e.g. `beta1`.
    pub symbol: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

impl EcmTerm {
    pub fn stars(&self) -> &'static str {
        significance_stars(self.p_value)
    }
}

/// `***`, `**`, `*` at the 1, 5 and 10% levels.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone)]
pub struct EcmFit {
    pub variant: EcmVariant,
    pub n_lags: usize,
    pub terms: Vec<EcmTerm>,
    pub residuals: TradingDaySeries,
    pub n_obs: usize,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub hac_bandwidth: usize,
}

impl EcmFit {
    pub fn term(&self, name: &str) -> Option<&EcmTerm> {
        self.terms.iter().find(|t| t.name == name || t.symbol == name)
    }
}

/// Display labels in table row order.
pub fn term_order(n_lags: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=n_lags).map(|i| format!("dC(t-{i})")).collect();
    v.extend(["dZ", "dr", "psi(t-1)", "WTI", "SPX", "VIX", "sigma", "const"].map(String::from));
    v
}

fn check_dates(reference: &TradingDaySeries, other: &TradingDaySeries) -> Result<()> {
    if reference.dates() != other.dates() {
        return Err(Error::Misaligned(format!(
            "`{}` and `{}` do not share the same dates",
            reference.label(),
            other.label()
        )));
    }
    Ok(())
}

pub fn fit_ecm(
    data: &EcmData<'_>,
    n_lags: usize,
    variant: EcmVariant,
    hac_bandwidth: Option<usize>,
) -> Result<EcmFit> {
    let dc = data.dc;
    let lags = if variant.has_lags() { n_lags } else { 0 };
    let mut columns: Vec<(String, String, Vec<f64>)> = Vec::new();
    let n = dc.len();
    let skip = n_lags.max(1);
    if n <= skip + 2 {
        return Err(Error::SeriesTooShort { needed: skip + 3, got: n });
    }
    let rows = skip..n;
    for i in 1..=lags {
        let v = dc.values();
        columns.push((format!("dC(t-{i})"), format!("beta{i}"), rows.clone().map(|t| v[t - i]).collect()));
    }
    if variant.has_dz_dr() {
        check_dates(dc, data.dz)?;
        check_dates(dc, data.dr)?;
        columns.push(("dZ".into(), "alpha1".into(), data.dz.values()[skip..].to_vec()));
        columns.push(("dr".into(), "alpha2".into(), data.dr.values()[skip..].to_vec()));
    }
    if variant.has_psi() {
        check_dates(dc, data.psi)?;
        let v = data.psi.values();
        columns.push(("psi(t-1)".into(), "alpha3".into(), rows.clone().map(|t| v[t - 1]).collect()));
    }
    if variant.needs_controls() {
        let c = data.controls.ok_or_else(|| {
            Error::InvalidArgument(format!("ECM variant {variant} requires control variables"))
        })?;
        let mut add = |name: &str, symbol: &str, s: &TradingDaySeries| -> Result<()> {
            check_dates(dc, s)?;
            columns.push((name.into(), symbol.into(), s.values()[skip..].to_vec()));
            Ok(())
        };
        add("WTI", "delta3", &c.wti_logret)?;
        if variant.has_market_controls() {
            add("SPX", "delta1", &c.spx_logret)?;
            add("VIX", "delta2", &c.vix_level)?;
            add("sigma", "delta4", &c.sigma)?;
        }
    }
    columns.push(("const".into(), "alpha0".into(), vec![1.0; n - skip]));

    let n_obs = n - skip;
    let k = columns.len();
    if n_obs <= k {
        return Err(Error::SeriesTooShort { needed: k + 1, got: n_obs });
    }
    let x = DMatrix::from_fn(n_obs, k, |i, j| columns[j].2[i]);
    let y = DVector::from_column_slice(&dc.values()[skip..]);
    let names: Vec<&str> = columns.iter().map(|c| c.0.as_str()).collect();
    let fit = ols_fit_named(&x, &y, &names)?;
    let bandwidth = hac_bandwidth.unwrap_or_else(|| default_bandwidth(n_obs));
    let cov = newey_west_cov_with_bread(&x, &fit.residuals, bandwidth, &fit.xtx_inv)?;
    let dof = (n_obs - k) as f64;
    let t_dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let terms = columns
        .iter()
        .enumerate()
        .map(|(j, (name, symbol, _))| {
            let estimate = fit.coefficients[j];
            let std_error = cov[(j, j)].max(0.0).sqrt();
            let t_stat = estimate / std_error;
            let p_value = if t_stat.is_finite() {
                2.0 * (1.0 - t_dist.cdf(t_stat.abs()))
            } else {
                f64::NAN
            };
            EcmTerm {
                name: name.clone(),
                symbol: symbol.clone(),
                estimate,
                std_error,
                t_stat,
                p_value,
            }
        })
        .collect();
    let log_likelihood = gaussian_log_likelihood(fit.rss, n_obs);
    let (aic, bic) = info_criteria(log_likelihood, k, n_obs);
    let residuals = TradingDaySeries::new("eps", dc.dates()[skip..].to_vec(), fit.residuals.iter().copied().collect())?;
    Ok(EcmFit {
        variant,
        n_lags: lags,
        terms,
        residuals,
        n_obs,
        log_likelihood,
        aic,
        bic,
        hac_bandwidth: bandwidth,
    })
}
