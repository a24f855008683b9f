//! Fixed-coupon bond cash flows and the Z-spread solver.

use chrono::NaiveDate;

use crate::calendar::{act365, add_months};
use crate::curves::DiscountCurve;
use crate::error::{Error, Result};

/// Solver bracket for the Z-spread, as annualized decimals.
pub const Z_SPREAD_BRACKET: (f64, f64) = (-0.5, 5.0);

#[derive(Debug, Clone, PartialEq)]
pub struct FixedCouponBond {
    pub bond_id: String,
    pub issuer_id: String,
    /// Annual coupon rate, decimal.
    pub coupon_rate: f64,
    /// Coupon payments per year (1 or 2).
    pub frequency: u32,
    pub maturity: NaiveDate,
    pub issue_amount: f64,
}

impl FixedCouponBond {
    pub fn new(
        bond_id: impl Into<String>,
        issuer_id: impl Into<String>,
        coupon_rate: f64,
        frequency: u32,
        maturity: NaiveDate,
        issue_amount: f64,
    ) -> Result<Self> {
        let bond_id = bond_id.into();
        if !(coupon_rate >= 0.0 && coupon_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("{bond_id}: negative coupon")));
        }
        if !matches!(frequency, 1 | 2) {
            return Err(Error::InvalidArgument(format!(
                "{bond_id}: coupon frequency must be 1 or 2, got {frequency}"
            )));
        }
        if !(issue_amount > 0.0) {
            return Err(Error::InvalidArgument(format!("{bond_id}: issue amount must be positive")));
        }
        Ok(Self {
            bond_id,
            issuer_id: issuer_id.into(),
            coupon_rate,
            frequency,
            maturity,
            issue_amount,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondQuote<'a> {
    pub bond: &'a FixedCouponBond,
    pub quote_date: NaiveDate,
    /// Dirty price per 100 notional.
    pub dirty_price: f64,
}

impl<'a> BondQuote<'a> {
    pub fn new(bond: &'a FixedCouponBond, quote_date: NaiveDate, dirty_price: f64) -> Result<Self> {
        if !(dirty_price > 0.0 && dirty_price.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{}: dirty price must be positive",
                bond.bond_id
            )));
        }
        Ok(Self {
            bond,
            quote_date,
            dirty_price,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CashFlow {
    pub date: NaiveDate,
    /// Amount per 100 notional.
    pub amount: f64,
}

/// Remaining coupons (rolled backward from maturity) plus the redemption,
/// strictly after `settle`.
pub fn bond_cash_flows(bond: &FixedCouponBond, settle: NaiveDate) -> Result<Vec<CashFlow>> {
    if settle >= bond.maturity {
        return Err(Error::InvalidArgument(format!(
            "{}: settlement {settle} not before maturity {}",
            bond.bond_id, bond.maturity
        )));
    }
    let coupon = 100.0 * bond.coupon_rate / bond.frequency as f64;
    let step = 12 / bond.frequency as i32;
    let mut flows = Vec::new();
    let mut k = 0;
    loop {
        let d = add_months(bond.maturity, -step * k);
        if d <= settle {
            break;
        }
        let amount = if k == 0 { coupon + 100.0 } else { coupon };
        if amount > 0.0 {
            flows.push(CashFlow { date: d, amount });
        }
        k += 1;
    }
    flows.reverse();
    Ok(flows)
}

/// Dirty price of `flows` discounted on `curve` with a parallel
/// continuously-compounded spread `z`.
pub fn price_with_spread(flows: &[CashFlow], curve: &DiscountCurve, z: f64) -> Result<f64> {
    let vd = curve.value_date();
    flows
        .iter()
        .map(|cf| Ok(cf.amount * curve.discount_factor(cf.date)? * (-z * act365(vd, cf.date)).exp()))
        .sum()
}

/// Spread over the zero curve that reprices the quote's dirty price.
pub fn z_spread(quote: &BondQuote<'_>, curve: &DiscountCurve) -> Result<f64> {
    if quote.quote_date != curve.value_date() {
        return Err(Error::InvalidArgument(format!(
            "quote date {} differs from curve value date {}",
            quote.quote_date,
            curve.value_date()
        )));
    }
    let flows = bond_cash_flows(quote.bond, quote.quote_date)?;
    if flows.is_empty() {
        return Err(Error::InvalidArgument(format!("{}: no remaining cash flows", quote.bond.bond_id)));
    }
    let vd = curve.value_date();
    // Precompute (risk-free PV, time) pairs so each evaluation is cheap.
    let legs: Vec<(f64, f64)> = flows
        .iter()
        .map(|cf| Ok((cf.amount * curve.discount_factor(cf.date)?, act365(vd, cf.date))))
        .collect::<Result<_>>()?;
    let target = quote.dirty_price;
    let f = |z: f64| -> (f64, f64) {
        let mut pv = 0.0;
        let mut dpv = 0.0;
        for (base, t) in &legs {
            let v = base * (-z * t).exp();
            pv += v;
            dpv -= v * t;
        }
        (pv - target, dpv)
    };
    solve_decreasing(f, Z_SPREAD_BRACKET.0, Z_SPREAD_BRACKET.1, target)
}

/// Root of a strictly decreasing function on `[lower, upper]`: bisection
/// down to a narrow bracket, then safeguarded secant/Newton steps.
fn solve_decreasing(f: impl Fn(f64) -> (f64, f64), lower: f64, upper: f64, scale: f64) -> Result<f64> {
    let unpriceable = || Error::UnpriceableQuote { lower, upper };
    let (f_lo, _) = f(lower);
    let (f_hi, _) = f(upper);
    if !(f_lo >= 0.0 && f_hi <= 0.0) {
        return Err(unpriceable());
    }
    if f_lo == 0.0 {
        return Ok(lower);
    }
    if f_hi == 0.0 {
        return Ok(upper);
    }
    let (mut lo, mut hi) = (lower, upper);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        let (fm, _) = f(mid);
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tol = 1e-13 * scale.abs().max(1.0);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (fx, dfx) = f(x);
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - fx / dfx;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    Ok(x)
}
