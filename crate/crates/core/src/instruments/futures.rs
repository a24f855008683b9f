//! December futures selection and the C-spread.

use std::collections::{BTreeMap, HashMap};

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;

use crate::calendar::{act365, add_months};
use crate::curves::DiscountCurve;
use crate::error::{Error, Result};
use crate::series::TradingDaySeries;

#[derive(Debug, Clone, PartialEq)]
pub struct FuturesQuote {
    pub contract_id: String,
    pub quote_date: NaiveDate,
    pub maturity: NaiveDate,
    pub settle_price: f64,
    pub volume: u64,
}

impl FuturesQuote {
    pub fn new(
        contract_id: impl Into<String>,
        quote_date: NaiveDate,
        maturity: NaiveDate,
        settle_price: f64,
        volume: u64,
    ) -> Result<Self> {
        let contract_id = contract_id.into();
        if maturity.month() != 12 {
            return Err(Error::InvalidArgument(format!(
                "{contract_id}: maturity {maturity} is not in December"
            )));
        }
        if !(settle_price > 0.0 && settle_price.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{contract_id}: settle price must be positive"
            )));
        }
        Ok(Self {
            contract_id,
            quote_date,
            maturity,
            settle_price,
            volume,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotProxy {
    pub quote_date: NaiveDate,
    pub price: f64,
}

impl SpotProxy {
    pub fn new(quote_date: NaiveDate, price: f64) -> Result<Self> {
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::InvalidArgument(format!("spot price on {quote_date} must be positive")));
        }
        Ok(Self { quote_date, price })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CSpreadPoint {
    pub date: NaiveDate,
    pub c_spread: f64,
    pub contract_id: String,
    /// T - t in ACT/365 years.
    pub ttm: f64,
}

/// Default roll window: one calendar month before expiry.
pub const DEFAULT_ROLL_MONTHS: u32 = 1;

/// True when `t` falls in the last calendar month before `maturity`.
pub fn in_roll_month(t: NaiveDate, maturity: NaiveDate) -> bool {
    in_roll_window(t, maturity, DEFAULT_ROLL_MONTHS)
}

/// True when `t` is within `months` calendar months of `maturity`.
pub fn in_roll_window(t: NaiveDate, maturity: NaiveDate, months: u32) -> bool {
    t >= add_months(maturity, -(months as i32))
}

/// Nearest December contract that has not expired and is not in its roll month.
pub fn select_front_december(chain: &[FuturesQuote], t: NaiveDate) -> Result<&FuturesQuote> {
    select_front_december_with_roll(chain, t, DEFAULT_ROLL_MONTHS)
}

/// As [`select_front_december`] with a roll window of `roll_months`.
pub fn select_front_december_with_roll(
    chain: &[FuturesQuote],
    t: NaiveDate,
    roll_months: u32,
) -> Result<&FuturesQuote> {
    chain
        .iter()
        .filter(|q| q.maturity.month() == 12 && q.maturity > t && !in_roll_window(t, q.maturity, roll_months))
        .min_by_key(|q| q.maturity)
        .ok_or(Error::NoEligibleContract(t))
}

/// C = ln(F/S)/tau - r(t,T), tau in ACT/365.
pub fn c_spread_point(f: f64, s: f64, t: NaiveDate, maturity: NaiveDate, curve: &DiscountCurve) -> Result<f64> {
    if !(f > 0.0 && s > 0.0) {
        return Err(Error::InvalidArgument(format!("prices must be positive (F={f}, S={s})")));
    }
    if maturity <= t {
        return Err(Error::InvalidArgument(format!("maturity {maturity} not after {t}")));
    }
    let tau = act365(t, maturity);
    Ok((f / s).ln() / tau - curve.zero_rate(t, maturity)?)
}

/// One C-spread point per date common to all three inputs. Dates where no
/// contract qualifies or pricing fails are logged and skipped.
pub fn build_c_spread_series(
    futures: &BTreeMap<NaiveDate, Vec<FuturesQuote>>,
    spot: &[SpotProxy],
    curves: &BTreeMap<NaiveDate, DiscountCurve>,
) -> Result<Vec<CSpreadPoint>> {
    build_c_spread_series_with_roll(futures, spot, curves, DEFAULT_ROLL_MONTHS)
}

/// As [`build_c_spread_series`] with a roll window of `roll_months`.
pub fn build_c_spread_series_with_roll(
    futures: &BTreeMap<NaiveDate, Vec<FuturesQuote>>,
    spot: &[SpotProxy],
    curves: &BTreeMap<NaiveDate, DiscountCurve>,
    roll_months: u32,
) -> Result<Vec<CSpreadPoint>> {
    let spot: HashMap<NaiveDate, f64> = spot.iter().map(|s| (s.quote_date, s.price)).collect();
    let dates: Vec<NaiveDate> = futures
        .keys()
        .copied()
        .filter(|d| spot.contains_key(d) && curves.contains_key(d))
        .collect();
    if dates.is_empty() {
        return Err(Error::NoCommonDates);
    }
    let points: Vec<Option<CSpreadPoint>> = dates
        .par_iter()
        .map(|&t| {
            let attempt = || -> Result<CSpreadPoint> {
                let q = select_front_december_with_roll(&futures[&t], t, roll_months)?;
                let c = c_spread_point(q.settle_price, spot[&t], t, q.maturity, &curves[&t])?;
                Ok(CSpreadPoint {
                    date: t,
                    c_spread: c,
                    contract_id: q.contract_id.clone(),
                    ttm: act365(t, q.maturity),
                })
            };
            match attempt() {
                Ok(p) => Some(p),
                Err(e) => {
                    log::warn!("c-spread skipped on {t}: {e}");
                    None
                }
            }
        })
        .collect();
    let points: Vec<CSpreadPoint> = points.into_iter().flatten().collect();
    if points.is_empty() {
        return Err(Error::DegenerateInput("no C-spread point could be computed".into()));
    }
    Ok(points)
}

/// The C-spread values as a plain series.
pub fn c_spread_series(points: &[CSpreadPoint]) -> Result<TradingDaySeries> {
    TradingDaySeries::new(
        "C",
        points.iter().map(|p| p.date).collect(),
        points.iter().map(|p| p.c_spread).collect(),
    )
}
