//! Euro risk-free discount curve bootstrapped from OIS par quotes.
//!
//! Tenors up to one year are single-payment deposits accruing ACT/360.
//! Longer tenors are annual fixed-leg swaps solved one pillar at a time.
//! Discount factors are interpolated log-linearly in ACT/365 time and
//! extrapolated at the last pillar's flat zero rate.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::calendar::{act360, act365, add_months};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tenor {
    Days(u32),
    Weeks(u32),
    Months(u32),
    Years(u32),
}

impl Tenor {
    pub fn end_date(&self, start: NaiveDate) -> NaiveDate {
        match *self {
            Tenor::Days(n) => start + chrono::Duration::days(n as i64),
            Tenor::Weeks(n) => start + chrono::Duration::weeks(n as i64),
            Tenor::Months(n) => add_months(start, n as i32),
            Tenor::Years(n) => add_months(start, 12 * n as i32),
        }
    }

    /// Deposit-style instrument (one payment at maturity)?
    pub fn is_single_payment(&self, start: NaiveDate) -> bool {
        self.end_date(start) <= add_months(start, 12)
    }

    pub fn year_fraction(&self) -> f64 {
        match *self {
            Tenor::Days(n) => n as f64 / 365.0,
            Tenor::Weeks(n) => 7.0 * n as f64 / 365.0,
            Tenor::Months(n) => n as f64 / 12.0,
            Tenor::Years(n) => n as f64,
        }
    }
}

impl fmt::Display for Tenor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tenor::Days(n) => write!(f, "{n}D"),
            Tenor::Weeks(n) => write!(f, "{n}W"),
            Tenor::Months(n) => write!(f, "{n}M"),
            Tenor::Years(n) => write!(f, "{n}Y"),
        }
    }
}

impl FromStr for Tenor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("bad tenor `{s}`"));
        if s.len() < 2 {
            return Err(bad());
        }
        let (num, unit) = s.split_at(s.len() - 1);
        let n: u32 = num.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        match unit.to_ascii_uppercase().as_str() {
            "D" => Ok(Tenor::Days(n)),
            "W" => Ok(Tenor::Weeks(n)),
            "M" => Ok(Tenor::Months(n)),
            "Y" => Ok(Tenor::Years(n)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OisQuote {
    pub tenor: Tenor,
    /// Annualized decimal par rate.
    pub par_rate: f64,
}

impl OisQuote {
    pub fn new(tenor: Tenor, par_rate: f64) -> Result<Self> {
        if !(par_rate > -0.10 && par_rate < 0.50) {
            return Err(Error::InvalidArgument(format!(
                "OIS rate {par_rate} for {tenor} outside sanity bounds (-10%, 50%)"
            )));
        }
        Ok(Self { tenor, par_rate })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    LogLinearDiscount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    value_date: NaiveDate,
    pillars: Vec<(NaiveDate, f64)>,
    interpolation: Interpolation,
}

impl DiscountCurve {
    pub fn new(value_date: NaiveDate, pillars: Vec<(NaiveDate, f64)>) -> Result<Self> {
        if pillars.is_empty() {
            return Err(Error::InvalidArgument("curve needs at least one pillar".into()));
        }
        if pillars[0].0 <= value_date || pillars.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument(
                "pillar dates must be strictly increasing and after the value date".into(),
            ));
        }
        if pillars.iter().any(|(_, df)| !(*df > 0.0) || !df.is_finite()) {
            return Err(Error::InvalidArgument("pillar discount factors must be positive".into()));
        }
        Ok(Self {
            value_date,
            pillars,
            interpolation: Interpolation::LogLinearDiscount,
        })
    }

    /// Flat continuously-compounded (ACT/365) curve with the given pillars.
    pub fn flat(value_date: NaiveDate, rate: f64, pillar_dates: &[NaiveDate]) -> Result<Self> {
        let pillars = pillar_dates
            .iter()
            .map(|d| (*d, (-rate * act365(value_date, *d)).exp()))
            .collect();
        Self::new(value_date, pillars)
    }

    pub fn value_date(&self) -> NaiveDate {
        self.value_date
    }

    pub fn pillars(&self) -> &[(NaiveDate, f64)] {
        &self.pillars
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    fn time(&self, d: NaiveDate) -> f64 {
        act365(self.value_date, d)
    }

    pub fn discount_factor(&self, d: NaiveDate) -> Result<f64> {
        if d < self.value_date {
            return Err(Error::BeforeValueDate {
                date: d,
                value_date: self.value_date,
            });
        }
        Ok(log_linear_df(self.value_date, &self.pillars, d))
    }

    /// Continuously compounded ACT/365 rate between `t` and `maturity`.
    pub fn zero_rate(&self, t: NaiveDate, maturity: NaiveDate) -> Result<f64> {
        if maturity <= t {
            return Err(Error::InvalidArgument(format!(
                "zero rate needs maturity {maturity} after start {t}"
            )));
        }
        let df_t = self.discount_factor(t)?;
        let df_m = self.discount_factor(maturity)?;
        Ok(-(df_m / df_t).ln() / act365(t, maturity))
    }

    /// Par rate of an OIS of the given tenor priced off this curve.
    pub fn ois_par_rate(&self, tenor: Tenor) -> Result<f64> {
        let start = self.value_date;
        let end = tenor.end_date(start);
        let df_end = self.discount_factor(end)?;
        if tenor.is_single_payment(start) {
            return Ok((1.0 / df_end - 1.0) / act360(start, end));
        }
        let annuity: f64 = fixed_leg_schedule(start, end)
            .windows(2)
            .map(|w| Ok(act360(w[0], w[1]) * self.discount_factor(w[1])?))
            .sum::<Result<f64>>()?;
        Ok((1.0 - df_end) / annuity)
    }

    pub fn time_to(&self, d: NaiveDate) -> f64 {
        self.time(d)
    }
}

fn log_linear_df(value_date: NaiveDate, pillars: &[(NaiveDate, f64)], d: NaiveDate) -> f64 {
    if d == value_date {
        return 1.0;
    }
    let t = act365(value_date, d);
    let idx = pillars.partition_point(|(p, _)| *p < d);
    if idx < pillars.len() && pillars[idx].0 == d {
        return pillars[idx].1;
    }
    if idx == pillars.len() {
        let (last_d, last_df) = pillars[pillars.len() - 1];
        let zero = -last_df.ln() / act365(value_date, last_d);
        return (-zero * t).exp();
    }
    let (t0, ln0) = if idx == 0 {
        (0.0, 0.0)
    } else {
        let (d0, df0) = pillars[idx - 1];
        (act365(value_date, d0), df0.ln())
    };
    let (d1, df1) = pillars[idx];
    let t1 = act365(value_date, d1);
    let w = (t - t0) / (t1 - t0);
    (ln0 + w * (df1.ln() - ln0)).exp()
}

/// Annual fixed-leg dates generated backward from `end`, with `start`
/// prepended (the first period may be a short stub).
fn fixed_leg_schedule(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    let mut dates = vec![end];
    let mut k = 1;
    loop {
        let d = add_months(end, -12 * k);
        if d <= start {
            break;
        }
        dates.push(d);
        k += 1;
    }
    dates.push(start);
    dates.reverse();
    dates
}

pub fn bootstrap_ois(quotes: &[OisQuote], value_date: NaiveDate) -> Result<DiscountCurve> {
    if quotes.is_empty() {
        return Err(Error::InvalidArgument("no OIS quotes".into()));
    }
    let mut pillars: Vec<(NaiveDate, f64)> = Vec::with_capacity(quotes.len());
    for q in quotes {
        let end = q.tenor.end_date(value_date);
        if pillars.last().is_some_and(|(last, _)| *last >= end) || end <= value_date {
            return Err(Error::NonIncreasingTenors {
                tenor: q.tenor.to_string(),
            });
        }
        let df = if q.tenor.is_single_payment(value_date) {
            1.0 / (1.0 + q.par_rate * act360(value_date, end))
        } else {
            solve_swap_pillar(value_date, &pillars, end, q.par_rate)
        };
        if !(df > 0.0) || !df.is_finite() {
            return Err(Error::NoDiscountFactor {
                tenor: q.tenor.to_string(),
            });
        }
        pillars.push((end, df));
    }
    DiscountCurve::new(value_date, pillars)
}

/// Final discount factor of an annual swap such that it prices at par.
/// Returns a non-positive value when no admissible solution exists.
fn solve_swap_pillar(value_date: NaiveDate, pillars: &[(NaiveDate, f64)], end: NaiveDate, rate: f64) -> f64 {
    let schedule = fixed_leg_schedule(value_date, end);
    let last_known = pillars.last().map_or(value_date, |p| p.0);
    let periods: Vec<(f64, NaiveDate)> = schedule
        .windows(2)
        .map(|w| (act360(w[0], w[1]), w[1]))
        .collect();
    let n = periods.len();

    // Coupon dates up to the last known pillar are fixed by the existing curve.
    let fixed: f64 = periods[..n - 1]
        .iter()
        .filter(|(_, d)| *d <= last_known)
        .map(|(tau, d)| tau * log_linear_df(value_date, pillars, *d))
        .sum();
    let floating: Vec<(f64, NaiveDate)> = periods[..n - 1]
        .iter()
        .copied()
        .filter(|(_, d)| *d > last_known)
        .collect();
    let tau_n = periods[n - 1].0;

    if floating.is_empty() {
        return (1.0 - rate * fixed) / (1.0 + rate * tau_n);
    }

    // Intermediate coupon dates beyond the last pillar depend on the unknown
    // discount factor through the log-linear interpolation.
    let t_last = act365(value_date, last_known);
    let ln_last = if pillars.is_empty() {
        0.0
    } else {
        pillars[pillars.len() - 1].1.ln()
    };
    let t_end = act365(value_date, end);
    let weights: Vec<(f64, f64)> = floating
        .iter()
        .map(|(tau, d)| (*tau, (act365(value_date, *d) - t_last) / (t_end - t_last)))
        .collect();
    let residual = |x: f64| -> (f64, f64) {
        // x = ln DF(end); returns (f, df/dx)
        let mut f = rate * fixed + x.exp() * (1.0 + rate * tau_n) - 1.0;
        let mut g = x.exp() * (1.0 + rate * tau_n);
        for (tau, w) in &weights {
            let df = (ln_last + w * (x - ln_last)).exp();
            f += rate * tau * df;
            g += rate * tau * df * w;
        }
        (f, g)
    };

    // Bracket in ln DF, then safeguarded Newton.
    let (mut lo, mut hi) = (-20.0_f64, 5.0_f64);
    let (flo, fhi) = (residual(lo).0, residual(hi).0);
    if flo.signum() == fhi.signum() {
        return -1.0;
    }
    let increasing = fhi > flo;
    let mut x = ln_last - rate * (t_end - t_last);
    for _ in 0..200 {
        let (f, g) = residual(x);
        if f == 0.0 {
            break;
        }
        if (f > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let mut next = x - f / g;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    x.exp()
}
