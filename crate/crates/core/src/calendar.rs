//! Date arithmetic: business days, day counts, month shifts and the
//! December futures expiry rule.

use std::collections::BTreeSet;

use chrono::{Datelike, Months, NaiveDate, Weekday};

/// Weekend-only business calendar with an optional holiday list.
#[derive(Debug, Clone, Default)]
pub struct BusinessCalendar {
    holidays: BTreeSet<NaiveDate>,
}

impl BusinessCalendar {
    pub fn weekends_only() -> Self {
        Self::default()
    }

    pub fn with_holidays(holidays: impl IntoIterator<Item = NaiveDate>) -> Self {
        Self {
            holidays: holidays.into_iter().collect(),
        }
    }

    pub fn is_business_day(&self, d: NaiveDate) -> bool {
        is_weekday(d) && !self.holidays.contains(&d)
    }

    /// The first `count` business days on or after `start`.
    pub fn business_days_from(&self, start: NaiveDate, count: usize) -> Vec<NaiveDate> {
        start
            .iter_days()
            .filter(|d| self.is_business_day(*d))
            .take(count)
            .collect()
    }

    /// Business days in the closed interval `[start, end]`.
    pub fn business_days_between(&self, start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
        start
            .iter_days()
            .take_while(|d| *d <= end)
            .filter(|d| self.is_business_day(*d))
            .collect()
    }
}

pub fn is_weekday(d: NaiveDate) -> bool {
    !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

pub fn days_between(start: NaiveDate, end: NaiveDate) -> i64 {
    (end - start).num_days()
}

/// ACT/360 accrual fraction.
pub fn act360(start: NaiveDate, end: NaiveDate) -> f64 {
    days_between(start, end) as f64 / 360.0
}

/// ACT/365 (fixed) year fraction.
pub fn act365(start: NaiveDate, end: NaiveDate) -> f64 {
    days_between(start, end) as f64 / 365.0
}

/// Calendar-month shift with end-of-month clamping (31 Jan + 1M = 28/29 Feb).
pub fn add_months(d: NaiveDate, months: i32) -> NaiveDate {
    let shifted = if months >= 0 {
        d.checked_add_months(Months::new(months as u32))
    } else {
        d.checked_sub_months(Months::new(months.unsigned_abs()))
    };
    shifted.expect("date out of range")
}

/// Penultimate Monday of the given month (ICE EUA December expiry rule).
pub fn penultimate_monday(year: i32, month: u32) -> NaiveDate {
    let first_next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    }
    .expect("valid month");
    let last = first_next.pred_opt().expect("valid date");
    let back = (last.weekday().num_days_from_monday() + 7) % 7;
    let last_monday = last - chrono::Duration::days(back as i64);
    last_monday - chrono::Duration::days(7)
}

/// ISO (year, week) key used for weekly sampling.
pub fn iso_week_key(d: NaiveDate) -> (i32, u32) {
    let w = d.iso_week();
    (w.year(), w.week())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn penultimate_mondays() {
        // December 2013: Mondays 2, 9, 16, 23, 30.
        assert_eq!(penultimate_monday(2013, 12), date(2013, 12, 23));
        // December 2019: Mondays 2, 9, 16, 23, 30.
        assert_eq!(penultimate_monday(2019, 12), date(2019, 12, 23));
        // December 2018: Mondays 3, 10, 17, 24, 31.
        assert_eq!(penultimate_monday(2018, 12), date(2018, 12, 24));
        // December 2020: Mondays 7, 14, 21, 28.
        assert_eq!(penultimate_monday(2020, 12), date(2020, 12, 21));
    }

    #[test]
    fn month_shift_clamps() {
        assert_eq!(add_months(date(2020, 1, 31), 1), date(2020, 2, 29));
        assert_eq!(add_months(date(2020, 3, 31), -1), date(2020, 2, 29));
        assert_eq!(add_months(date(2020, 12, 14), -1), date(2020, 11, 14));
    }

    #[test]
    fn business_days_skip_weekends() {
        let cal = BusinessCalendar::weekends_only();
        let days = cal.business_days_from(date(2013, 1, 4), 3);
        assert_eq!(days, vec![date(2013, 1, 4), date(2013, 1, 7), date(2013, 1, 8)]);
        let hol = BusinessCalendar::with_holidays([date(2013, 1, 7)]);
        assert_eq!(
            hol.business_days_between(date(2013, 1, 4), date(2013, 1, 8)),
            vec![date(2013, 1, 4), date(2013, 1, 8)]
        );
    }

    #[test]
    fn day_counts() {
        assert_eq!(act360(date(2020, 1, 1), date(2020, 7, 1)), 182.0 / 360.0);
        assert_eq!(act365(date(2020, 1, 1), date(2021, 1, 1)), 366.0 / 365.0);
    }
}
