//! Date-indexed series and the descriptive statistics used across the
//! pipeline: alignment, differencing, winsorization, weekly sampling, PACF,
//! Pearson correlation tests and summary statistics.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::calendar::iso_week_key;
use crate::error::{Error, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Real-valued observations on strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingDaySeries {
    label: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl TradingDaySeries {
    pub fn new(label: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        let invalid = |reason: String| Error::InvalidSeries {
            label: label.clone(),
            reason,
        };
        if dates.len() != values.len() {
            return Err(invalid(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(invalid(format!("dates not strictly increasing at {}", w[1])));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value on {}", dates[i])));
        }
        Ok(Self {
            label,
            dates,
            values,
        })
    }

    pub fn from_pairs(label: impl Into<String>, pairs: impl IntoIterator<Item = (NaiveDate, f64)>) -> Result<Self> {
        let (dates, values) = pairs.into_iter().unzip();
        Self::new(label, dates, values)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.dates.binary_search(&date).ok().map(|i| self.values[i])
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Applies `f` to every value; fails if the result is non-finite.
    pub fn map_values(&self, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(label, self.dates.clone(), self.values.iter().map(|v| f(*v)).collect())
    }

    /// Restricts the series to `[start, end]`.
    pub fn window(&self, start: NaiveDate, end: NaiveDate) -> Self {
        let (dates, values) = self.iter().filter(|(d, _)| *d >= start && *d <= end).unzip();
        Self {
            label: self.label.clone(),
            dates,
            values,
        }
    }

    /// Restricts the series to the given dates (which must be a subset).
    pub fn restrict_to(&self, dates: &[NaiveDate]) -> Result<Self> {
        let values = dates
            .iter()
            .map(|d| {
                self.get(*d)
                    .ok_or_else(|| Error::Misaligned(format!("`{}` has no value on {d}", self.label)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.label.clone(), dates.to_vec(), values)
    }

    pub fn read_csv(label: impl Into<String>, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(label, file, path)
    }

    /// Parses a `date,value` CSV. `origin` is only used in error messages.
    pub fn from_csv_reader<R: Read>(label: impl Into<String>, reader: R, origin: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::data(origin, 1, e.to_string()))?
            .clone();
        if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "value" {
            return Err(Error::data(origin, 1, "expected header `date,value`"));
        }
        let mut pairs = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::data(origin, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let date = parse_date(&rec[0]).map_err(|m| Error::data(origin, line, m))?;
            let value = parse_f64(&rec[1]).map_err(|m| Error::data(origin, line, m))?;
            pairs.push((date, value));
        }
        Self::from_pairs(label, pairs).map_err(|e| Error::data(origin, 0, e.to_string()))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "date,value")?;
        for (d, v) in self.iter() {
            writeln!(out, "{},{}", d.format(DATE_FORMAT), v)?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT).map_err(|e| format!("bad date `{s}`: {e}"))
}

pub fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number `{s}`"))
    }
}

/// Inner join of several series on their dates.
#[derive(Debug, Clone)]
pub struct Aligned {
    pub dates: Vec<NaiveDate>,
    pub labels: Vec<String>,
    /// `dates.len() × series` matrix, columns in input order.
    pub data: DMatrix<f64>,
}

impl Aligned {
    pub fn column(&self, j: usize) -> TradingDaySeries {
        TradingDaySeries {
            label: self.labels[j].clone(),
            dates: self.dates.clone(),
            values: self.data.column(j).iter().copied().collect(),
        }
    }

    pub fn columns(&self) -> Vec<TradingDaySeries> {
        (0..self.data.ncols()).map(|j| self.column(j)).collect()
    }
}

pub fn align(series: &[&TradingDaySeries]) -> Result<Aligned> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("align needs at least one series".into()));
    }
    if let Some(s) = series.iter().find(|s| s.is_empty()) {
        return Err(Error::InvalidSeries {
            label: s.label.clone(),
            reason: "empty".into(),
        });
    }
    let mut common: BTreeSet<NaiveDate> = series[0].dates.iter().copied().collect();
    for s in &series[1..] {
        let other: BTreeSet<NaiveDate> = s.dates.iter().copied().collect();
        common = common.intersection(&other).copied().collect();
    }
    if common.is_empty() {
        return Err(Error::NoCommonDates);
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let mut data = DMatrix::zeros(dates.len(), series.len());
    for (j, s) in series.iter().enumerate() {
        // Both date lists are sorted, so a merge walk suffices.
        let mut k = 0;
        for (i, d) in dates.iter().enumerate() {
            while s.dates[k] < *d {
                k += 1;
            }
            data[(i, j)] = s.values[k];
        }
    }
    Ok(Aligned {
        dates,
        labels: series.iter().map(|s| s.label.clone()).collect(),
        data,
    })
}

/// `out[i] = v[i+1] - v[i]`, dated at the later date.
pub fn first_diff(s: &TradingDaySeries) -> Result<TradingDaySeries> {
    if s.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: s.len(),
        });
    }
    Ok(TradingDaySeries {
        label: format!("d{}", s.label),
        dates: s.dates[1..].to_vec(),
        values: s.values.windows(2).map(|w| w[1] - w[0]).collect(),
    })
}

/// Nearest-rank percentile: the smallest order statistic with at least `p`
/// percent of the sample at or below it.
pub fn nearest_rank_percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Symmetric two-sided winsorization at `level` percent (95 clips at the
/// 2.5th and 97.5th percentiles).
pub fn winsorize(s: &TradingDaySeries, level: f64) -> Result<TradingDaySeries> {
    if !(level > 50.0 && level < 100.0) {
        return Err(Error::InvalidArgument(format!(
            "winsorization level must lie in (50, 100), got {level}"
        )));
    }
    if s.is_empty() {
        return Ok(s.clone());
    }
    let mut sorted = s.values.clone();
    sorted.sort_by(f64::total_cmp);
    let lo = nearest_rank_percentile(&sorted, (100.0 - level) / 2.0);
    let hi = nearest_rank_percentile(&sorted, (100.0 + level) / 2.0);
    Ok(TradingDaySeries {
        label: s.label.clone(),
        dates: s.dates.clone(),
        values: s.values.iter().map(|v| v.clamp(lo, hi)).collect(),
    })
}

/// Last available observation of each ISO week.
pub fn to_weekly(s: &TradingDaySeries) -> TradingDaySeries {
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (i, (d, v)) in s.iter().enumerate() {
        let last_of_week = match s.dates.get(i + 1) {
            Some(next) => iso_week_key(*next) != iso_week_key(d),
            None => true,
        };
        if last_of_week {
            dates.push(d);
            values.push(v);
        }
    }
    TradingDaySeries {
        label: s.label.clone(),
        dates,
        values,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacfResult {
    pub lags: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// Symmetric large-sample 5% band, 1.96/sqrt(n).
    pub confidence_bound: f64,
}

impl PacfResult {
    pub fn significant_lags(&self) -> Vec<usize> {
        self.lags
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, c)| c.abs() > self.confidence_bound)
            .map(|(l, _)| *l)
            .collect()
    }
}

/// Biased (1/n) sample autocovariances at lags `0..=max_lag`.
pub fn autocovariances(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    (0..=max_lag)
        .map(|k| {
            centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Partial autocorrelations via the Durbin-Levinson recursion.
pub fn pacf(s: &TradingDaySeries, max_lag: usize) -> Result<PacfResult> {
    pacf_values(&s.values, max_lag)
}

pub fn pacf_values(x: &[f64], max_lag: usize) -> Result<PacfResult> {
    if max_lag == 0 {
        return Err(Error::InvalidArgument("max_lag must be positive".into()));
    }
    if x.len() <= max_lag + 1 {
        return Err(Error::SeriesTooShort {
            needed: max_lag + 2,
            got: x.len(),
        });
    }
    let gamma = autocovariances(x, max_lag);
    if gamma[0] <= 0.0 {
        return Err(Error::DegenerateInput("zero variance series".into()));
    }
    let rho: Vec<f64> = gamma.iter().map(|g| g / gamma[0]).collect();

    let mut phi = vec![0.0; max_lag + 1];
    let mut prev = vec![0.0; max_lag + 1];
    let mut partials = Vec::with_capacity(max_lag);
    phi[1] = rho[1];
    partials.push(rho[1]);
    let mut v = 1.0 - rho[1] * rho[1];
    for k in 2..=max_lag {
        prev[..k].copy_from_slice(&phi[..k]);
        let num = rho[k] - (1..k).map(|j| prev[j] * rho[k - j]).sum::<f64>();
        let pk = if v > 0.0 { num / v } else { 0.0 };
        phi[k] = pk;
        for j in 1..k {
            phi[j] = prev[j] - pk * prev[k - j];
        }
        v *= 1.0 - pk * pk;
        partials.push(pk);
    }
    Ok(PacfResult {
        lags: (1..=max_lag).collect(),
        coefficients: partials,
        confidence_bound: 1.96 / (x.len() as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PearsonResult {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Sample Pearson correlation with a two-sided Student-t p-value.
pub fn pearson_test(x: &[f64], y: &[f64]) -> Result<PearsonResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "pearson_test needs equal lengths ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::SeriesTooShort { needed: 3, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateInput("zero variance in correlation input".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
    };
    Ok(PearsonResult { r, p_value, n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    pub n_obs: usize,
}

pub fn describe(s: &TradingDaySeries) -> Result<SummaryStats> {
    describe_values(&s.values)
}

pub fn describe_values(x: &[f64]) -> Result<SummaryStats> {
    let n = x.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: n });
    }
    let rough = x.iter().sum::<f64>() / n as f64;
    // second pass removes the rounding left by the naive sum
    let mean = rough + x.iter().map(|v| v - rough).sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(SummaryStats {
        mean,
        std_dev: var.sqrt(),
        n_obs: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::BusinessCalendar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn daily(label: &str, values: Vec<f64>) -> TradingDaySeries {
        let dates = BusinessCalendar::weekends_only().business_days_from(d(2013, 1, 2), values.len());
        TradingDaySeries::new(label, dates, values).unwrap()
    }

    fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn construction_rejects_bad_input() {
        let dates = vec![d(2020, 1, 2), d(2020, 1, 2)];
        assert!(TradingDaySeries::new("x", dates, vec![1.0, 2.0]).is_err());
        assert!(TradingDaySeries::new("x", vec![d(2020, 1, 2)], vec![f64::NAN]).is_err());
        assert!(TradingDaySeries::new("x", vec![d(2020, 1, 2)], vec![]).is_err());
    }

    #[test]
    fn align_identity_and_intersection() {
        let a = daily("a", vec![1.0, 2.0, 3.0]);
        let same = align(&[&a, &a]).unwrap();
        assert_eq!(same.dates.len(), 3);
        assert_eq!(same.column(1).values(), a.values());

        let dates = a.dates().to_vec();
        let b_dates = vec![dates[1], dates[2], d(2013, 1, 7)];
        let b = TradingDaySeries::new("b", b_dates, vec![20.0, 30.0, 40.0]).unwrap();
        let ab = align(&[&a, &b]).unwrap();
        assert_eq!(ab.dates, vec![dates[1], dates[2]]);
        assert_eq!(ab.data[(0, 0)], 2.0);
        assert_eq!(ab.data[(1, 1)], 30.0);
    }

    #[test]
    fn align_disjoint_errors() {
        let a = TradingDaySeries::new("a", vec![d(2020, 1, 2)], vec![1.0]).unwrap();
        let b = TradingDaySeries::new("b", vec![d(2020, 1, 3)], vec![1.0]).unwrap();
        assert!(matches!(align(&[&a, &b]), Err(Error::NoCommonDates)));
    }

    #[test]
    fn align_matches_daily_observation_count() {
        let n = 2008;
        let a = daily("c", vec![1.0; n]);
        let b = daily("z", vec![2.0; n + 10]);
        let c = daily("r", vec![3.0; n + 3]);
        let al = align(&[&a, &b, &c]).unwrap();
        assert_eq!((al.data.nrows(), al.data.ncols()), (2008, 3));
    }

    #[test]
    fn first_diff_examples() {
        let c = first_diff(&daily("c", vec![4.0; 5])).unwrap();
        assert!(c.values().iter().all(|v| *v == 0.0));
        let s = daily("s", vec![1.0, 3.0, 2.0]);
        let ds = first_diff(&s).unwrap();
        assert_eq!(ds.values(), &[2.0, -1.0]);
        assert_eq!(ds.dates(), &s.dates()[1..]);
        assert!(matches!(
            first_diff(&daily("x", vec![1.0])),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn winsorize_inside_band_is_noop() {
        let s = daily("s", vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(winsorize(&s, 95.0).unwrap(), s);
    }

    /// Smallest sample value with at least `p` percent of the data at or below it.
    fn brute_percentile(x: &[f64], p: f64) -> f64 {
        let n = x.len() as f64;
        let mut candidates = x.to_vec();
        candidates.sort_by(f64::total_cmp);
        *candidates
            .iter()
            .find(|c| x.iter().filter(|v| **v <= **c).count() as f64 >= p / 100.0 * n)
            .unwrap()
    }

    #[test]
    fn winsorize_one_to_hundred() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        let lo = brute_percentile(&values, 2.5);
        let hi = brute_percentile(&values, 97.5);
        assert_eq!((lo, hi), (3.0, 98.0));
        let w = winsorize(&daily("s", values.clone()), 95.0).unwrap();
        let min = w.values().iter().copied().fold(f64::INFINITY, f64::min);
        let max = w.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((min, max), (lo, hi));
        assert_eq!(w.values()[50], 51.0);
        assert!(winsorize(&w, 40.0).is_err());
    }

    #[test]
    fn weekly_sampling() {
        // Wed 2 Jan 2013 .. Fri 11 Jan 2013: two ISO weeks.
        let s = daily("s", (0..8).map(f64::from).collect());
        let w = to_weekly(&s);
        assert_eq!(w.dates(), &[d(2013, 1, 4), d(2013, 1, 11)]);
        assert_eq!(w.values(), &[2.0, 7.0]);
        assert_eq!(to_weekly(&w), w);
    }

    #[test]
    fn weekly_count_over_phase_three_span() {
        let s = daily("s", vec![0.0; 2008]);
        let w = to_weekly(&s);
        // 2008 weekdays span 402 ISO weeks; with exchange holidays the
        // same count of days stretches to ~417 weeks.
        assert_eq!(w.len(), 402);
        assert!(w.dates().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn pacf_lag_one_is_autocorrelation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = normals(&mut rng, 300);
        let p = pacf_values(&x, 5).unwrap();
        let g = autocovariances(&x, 1);
        assert_eq!(p.coefficients[0], g[1] / g[0]);
        assert!(p.coefficients.iter().all(|c| c.abs() <= 1.0));
        assert!(pacf_values(&x[..5], 4).is_err());
    }

    #[test]
    fn pacf_white_noise_inside_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mut inside, mut total) = (0, 0);
        for _ in 0..20 {
            let x = normals(&mut rng, 10_000);
            let p = pacf_values(&x, 20).unwrap();
            inside += p.coefficients.iter().filter(|c| c.abs() < p.confidence_bound).count();
            total += p.coefficients.len();
        }
        assert!(inside as f64 / total as f64 >= 0.94, "{inside}/{total}");
    }

    fn simulate_ar(rng: &mut ChaCha8Rng, phi: &[f64], n: usize) -> Vec<f64> {
        let burn = 200;
        let e = normals(rng, n + burn);
        let mut x = vec![0.0; n + burn];
        for t in 0..n + burn {
            let ar: f64 = phi
                .iter()
                .enumerate()
                .filter(|(j, _)| t > *j)
                .map(|(j, p)| p * x[t - j - 1])
                .sum();
            x[t] = ar + e[t];
        }
        x.split_off(burn)
    }

    #[test]
    fn pacf_ar1_recovers_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = simulate_ar(&mut rng, &[0.5], 5000);
        let p = pacf_values(&x, 10).unwrap();
        assert!((p.coefficients[0] - 0.5).abs() < 0.05, "{}", p.coefficients[0]);
        let outside = p.coefficients[1..]
            .iter()
            .filter(|c| c.abs() >= p.confidence_bound)
            .count();
        assert!(outside <= 1);
    }

    #[test]
    fn pacf_ar2_partials_vanish_beyond_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut inside, mut total) = (0, 0);
        for _ in 0..500 {
            let x = simulate_ar(&mut rng, &[0.4, -0.3], 5000);
            let p = pacf_values(&x, 6).unwrap();
            for c in &p.coefficients[2..] {
                total += 1;
                if c.abs() < p.confidence_bound {
                    inside += 1;
                }
            }
        }
        assert!(inside as f64 / total as f64 >= 0.90, "{inside}/{total}");
    }

    #[test]
    fn pearson_examples() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let res = pearson_test(&x, &x).unwrap();
        assert_eq!(res.r, 1.0);
        assert_eq!(res.p_value, 0.0);
        assert!(matches!(
            pearson_test(&x, &[1.0; 10]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn pearson_p_value_for_reported_correlation() {
        // r = -0.16 at n = 2008: t = -7.25 on 2006 df.
        let r: f64 = -0.16;
        let n = 2008.0;
        let t = r * ((n - 2.0) / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, n - 2.0).unwrap();
        assert!(2.0 * dist.cdf(-t.abs()) < 0.01);
        // Construct data with exactly that sample correlation.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = normals(&mut rng, 2008);
        let b = normals(&mut rng, 2008);
        let res0 = pearson_test(&a, &b).unwrap();
        // Orthogonalize b against a, then mix to hit r = -0.16.
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let ac: Vec<f64> = a.iter().map(|v| v - ma).collect();
        let bc: Vec<f64> = b.iter().map(|v| v - mb).collect();
        let proj = ac.iter().zip(&bc).map(|(p, q)| p * q).sum::<f64>() / ac.iter().map(|p| p * p).sum::<f64>();
        let bo: Vec<f64> = bc.iter().zip(&ac).map(|(q, p)| q - proj * p).collect();
        let sa = ac.iter().map(|p| p * p).sum::<f64>().sqrt();
        let so = bo.iter().map(|p| p * p).sum::<f64>().sqrt();
        let y: Vec<f64> = ac
            .iter()
            .zip(&bo)
            .map(|(p, q)| r * p / sa + (1.0 - r * r).sqrt() * q / so)
            .collect();
        let res = pearson_test(&a, &y).unwrap();
        assert!((res.r - r).abs() < 1e-12);
        assert!(res.p_value < 0.01);
        assert!(res0.p_value > 0.0);
    }

    #[test]
    fn pearson_independent_draws_small_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut small = 0;
        for _ in 0..500 {
            let x = normals(&mut rng, 2000);
            let y = normals(&mut rng, 2000);
            if pearson_test(&x, &y).unwrap().r.abs() < 0.05 {
                small += 1;
            }
        }
        assert!(small as f64 / 500.0 >= 0.95, "{small}");
    }

    #[test]
    fn pearson_null_rejection_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 2000;
        let mut rejected = 0;
        for _ in 0..draws {
            let x = normals(&mut rng, 50);
            let y = normals(&mut rng, 50);
            if pearson_test(&x, &y).unwrap().p_value < 0.05 {
                rejected += 1;
            }
        }
        let rate = rejected as f64 / draws as f64;
        assert!((0.035..=0.065).contains(&rate), "{rate}");
    }

    #[test]
    fn describe_examples() {
        let c = describe(&daily("c", vec![0.7; 10])).unwrap();
        assert_eq!((c.mean, c.std_dev, c.n_obs), (0.7, 0.0, 10));
        let s = describe(&daily("s", vec![0.0, 2.0])).unwrap();
        assert_eq!(s.mean, 1.0);
        assert!((s.std_dev - 2f64.sqrt()).abs() < 1e-15);
        assert!(describe(&daily("x", vec![1.0])).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = daily("s", vec![0.1, -2.5e-7, 1.0 / 3.0]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = TradingDaySeries::from_csv_reader("s", buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, s);
        let bad = "date,value\n2020-01-02,abc\n";
        let err = TradingDaySeries::from_csv_reader("s", bad.as_bytes(), Path::new("mem")).unwrap_err();
        assert!(err.to_string().contains("mem:2"), "{err}");
    }
}
