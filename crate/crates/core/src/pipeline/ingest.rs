//! CSV ingestion for the pipeline inputs.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use crate::curves::{OisQuote, Tenor};
use crate::error::{Error, Result};
use crate::instruments::{FixedCouponBond, FuturesQuote, IssuerRecord, SpotProxy};
use crate::pipeline::config::DataPaths;
use crate::series::{parse_date, parse_f64, TradingDaySeries};

/// Quote of one bond on one date, already converted to a dirty price.
#[derive(Debug, Clone, PartialEq)]
pub struct DirtyQuote {
    pub bond_id: String,
    pub dirty_price: f64,
}

/// Control variables as loaded: SPX and WTI log-returns, VIX in levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Controls {
    pub spx_logret: TradingDaySeries,
    pub vix_level: TradingDaySeries,
    pub wti_logret: TradingDaySeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketData {
    pub futures: BTreeMap<NaiveDate, Vec<FuturesQuote>>,
    pub spot: Vec<SpotProxy>,
    pub ois: BTreeMap<NaiveDate, Vec<OisQuote>>,
    pub bonds: Vec<FixedCouponBond>,
    pub bond_quotes: BTreeMap<NaiveDate, Vec<DirtyQuote>>,
    pub issuers: Vec<IssuerRecord>,
    pub controls: Option<Controls>,
    pub holidays: Vec<NaiveDate>,
}

impl MarketData {
    /// Drops every dated record outside `[start, end]`.
    pub fn restrict_window(&mut self, start: Option<NaiveDate>, end: Option<NaiveDate>) {
        let inside = |d: &NaiveDate| start.is_none_or(|s| *d >= s) && end.is_none_or(|e| *d <= e);
        self.futures.retain(|d, _| inside(d));
        self.spot.retain(|s| inside(&s.quote_date));
        self.ois.retain(|d, _| inside(d));
        self.bond_quotes.retain(|d, _| inside(d));
        if let Some(c) = &mut self.controls {
            let keep = |s: &TradingDaySeries| {
                let (d, v): (Vec<_>, Vec<_>) = s.iter().filter(|(d, _)| inside(d)).unzip();
                TradingDaySeries::new(s.label(), d, v).expect("subset of a valid series")
            };
            c.spx_logret = keep(&c.spx_logret);
            c.vix_level = keep(&c.vix_level);
            c.wti_logret = keep(&c.wti_logret);
        }
    }
}

pub fn load_market_data(paths: &DataPaths) -> Result<MarketData> {
    let issuers = read_issuers(&paths.issuers)?;
    let bonds = read_bonds(&paths.bonds)?;
    for b in &bonds {
        if !issuers.iter().any(|i| i.issuer_id == b.issuer_id) {
            return Err(Error::UnknownIssuer(format!("{} (bond {})", b.issuer_id, b.bond_id)));
        }
    }
    Ok(MarketData {
        futures: read_futures(&paths.futures)?,
        spot: read_spot(&paths.spot)?,
        ois: read_ois(&paths.ois)?,
        bond_quotes: read_bond_quotes(&paths.bond_quotes, &bonds)?,
        bonds,
        issuers,
        controls: paths.controls.as_deref().map(read_controls).transpose()?,
        holidays: paths.holidays.as_deref().map(read_holidays).transpose()?.unwrap_or_default(),
    })
}

/// A parsed CSV: header names plus `(line, fields)` rows.
struct Table {
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table_from(file, path)
}

fn read_table_from<R: Read>(reader: R, path: &Path) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::data(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(Error::data(path, 1, "missing header row"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::data(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    if rows.is_empty() {
        return Err(Error::data(path, 2, "no data rows"));
    }
    Ok(Table { header, rows })
}

fn expect_header(t: &Table, path: &Path, expected: &[&str]) -> Result<()> {
    if t.header != expected {
        return Err(Error::data(
            path,
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), t.header.join(",")),
        ));
    }
    Ok(())
}

/// Row accessor that turns parse failures into `file:line` errors.
struct Row<'a> {
    path: &'a Path,
    line: u64,
    fields: &'a [String],
}

impl Row<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::data(self.path, self.line, msg)
    }

    fn str(&self, i: usize) -> &str {
        &self.fields[i]
    }

    fn date(&self, i: usize) -> Result<NaiveDate> {
        parse_date(&self.fields[i]).map_err(|m| self.err(m))
    }

    fn f64(&self, i: usize) -> Result<f64> {
        parse_f64(&self.fields[i]).map_err(|m| self.err(m))
    }

    fn u64(&self, i: usize) -> Result<u64> {
        self.fields[i]
            .parse()
            .map_err(|_| self.err(format!("invalid integer `{}`", self.fields[i])))
    }

    /// Wraps a domain validation error with this row's location.
    fn check<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| self.err(e.to_string()))
    }
}

fn rows<'a>(t: &'a Table, path: &'a Path) -> impl Iterator<Item = Row<'a>> {
    t.rows.iter().map(move |(line, fields)| Row {
        path,
        line: *line,
        fields,
    })
}

pub fn read_futures(path: &Path) -> Result<BTreeMap<NaiveDate, Vec<FuturesQuote>>> {
    let t = read_table(path)?;
    expect_header(&t, path, &["date", "contract_id", "maturity", "settle", "volume"])?;
    let mut out: BTreeMap<NaiveDate, Vec<FuturesQuote>> = BTreeMap::new();
    for r in rows(&t, path) {
        let date = r.date(0)?;
        let q = r.check(FuturesQuote::new(r.str(1), date, r.date(2)?, r.f64(3)?, r.u64(4)?))?;
        out.entry(date).or_default().push(q);
    }
    Ok(out)
}

pub fn read_spot(path: &Path) -> Result<Vec<SpotProxy>> {
    let t = read_table(path)?;
    expect_header(&t, path, &["date", "price"])?;
    let mut out: Vec<SpotProxy> = Vec::with_capacity(t.rows.len());
    for r in rows(&t, path) {
        let s = r.check(SpotProxy::new(r.date(0)?, r.f64(1)?))?;
        if let Some(prev) = out.last() {
            if prev.quote_date >= s.quote_date {
                return Err(r.err(format!("date {} is not after {}", s.quote_date, prev.quote_date)));
            }
        }
        out.push(s);
    }
    Ok(out)
}

pub fn read_ois(path: &Path) -> Result<BTreeMap<NaiveDate, Vec<OisQuote>>> {
    let t = read_table(path)?;
    expect_header(&t, path, &["date", "tenor", "rate"])?;
    let mut out: BTreeMap<NaiveDate, Vec<OisQuote>> = BTreeMap::new();
    for r in rows(&t, path) {
        let tenor: Tenor = r.check(r.str(1).parse())?;
        let q = r.check(OisQuote::new(tenor, r.f64(2)?))?;
        out.entry(r.date(0)?).or_default().push(q);
    }
    Ok(out)
}

pub fn read_bonds(path: &Path) -> Result<Vec<FixedCouponBond>> {
    let t = read_table(path)?;
    expect_header(&t, path, &["bond_id", "issuer_id", "coupon", "frequency", "maturity", "issue_amount"])?;
    let mut out: Vec<FixedCouponBond> = Vec::new();
    for r in rows(&t, path) {
        let freq = r.u64(3)?;
        let b = r.check(FixedCouponBond::new(
            r.str(0),
            r.str(1),
            r.f64(2)?,
            u32::try_from(freq).unwrap_or(u32::MAX),
            r.date(4)?,
            r.f64(5)?,
        ))?;
        if out.iter().any(|x| x.bond_id == b.bond_id) {
            return Err(r.err(format!("duplicate bond_id `{}`", b.bond_id)));
        }
        out.push(b);
    }
    Ok(out)
}

/// Accepts `date,bond_id,dirty_price` or `date,bond_id,clean_price,accrued`.
pub fn read_bond_quotes(path: &Path, bonds: &[FixedCouponBond]) -> Result<BTreeMap<NaiveDate, Vec<DirtyQuote>>> {
    let t = read_table(path)?;
    let dirty = t.header == ["date", "bond_id", "dirty_price"];
    if !dirty {
        expect_header(&t, path, &["date", "bond_id", "clean_price", "accrued"]).map_err(|_| {
            Error::data(
                path,
                1,
                format!(
                    "expected header `date,bond_id,dirty_price` or `date,bond_id,clean_price,accrued`, found `{}`",
                    t.header.join(",")
                ),
            )
        })?;
    }
    let known: HashMap<&str, ()> = bonds.iter().map(|b| (b.bond_id.as_str(), ())).collect();
    let mut out: BTreeMap<NaiveDate, Vec<DirtyQuote>> = BTreeMap::new();
    for r in rows(&t, path) {
        let bond_id = r.str(1);
        if !known.contains_key(bond_id) {
            return Err(r.err(format!("unknown bond_id `{bond_id}`")));
        }
        let price = if dirty { r.f64(2)? } else { r.f64(2)? + r.f64(3)? };
        if !(price > 0.0) {
            return Err(r.err(format!("dirty price must be positive, got {price}")));
        }
        out.entry(r.date(0)?).or_default().push(DirtyQuote {
            bond_id: bond_id.to_string(),
            dirty_price: price,
        });
    }
    Ok(out)
}

pub fn read_issuers(path: &Path) -> Result<Vec<IssuerRecord>> {
    let t = read_table(path)?;
    expect_header(&t, path, &["issuer_id", "name", "emissions_mt", "sector"])?;
    let mut out: Vec<IssuerRecord> = Vec::new();
    for r in rows(&t, path) {
        let rec = r.check(IssuerRecord::new(r.str(0), r.str(1), r.f64(2)?, r.str(3)))?;
        if out.iter().any(|x| x.issuer_id == rec.issuer_id) {
            return Err(r.err(format!("duplicate issuer_id `{}`", rec.issuer_id)));
        }
        out.push(rec);
    }
    Ok(out)
}

/// `date,spx,vix,wti` in price levels. SPX and WTI become log-returns, so
/// the first row only serves as the return base.
pub fn read_controls(path: &Path) -> Result<Controls> {
    let t = read_table(path)?;
    expect_header(&t, path, &["date", "spx", "vix", "wti"])?;
    let mut prev: Option<(NaiveDate, f64, f64)> = None;
    let (mut dates, mut spx, mut vix, mut wti) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for r in rows(&t, path) {
        let (d, s, v, w) = (r.date(0)?, r.f64(1)?, r.f64(2)?, r.f64(3)?);
        if !(s > 0.0 && w > 0.0) {
            return Err(r.err("spx and wti must be positive price levels"));
        }
        if let Some((pd, ps, pw)) = prev {
            if d <= pd {
                return Err(r.err(format!("date {d} is not after {pd}")));
            }
            dates.push(d);
            spx.push((s / ps).ln());
            vix.push(v);
            wti.push((w / pw).ln());
        }
        prev = Some((d, s, w));
    }
    if dates.is_empty() {
        return Err(Error::data(path, 2, "need at least two rows to form returns"));
    }
    Ok(Controls {
        spx_logret: TradingDaySeries::new("SPX", dates.clone(), spx)?,
        vix_level: TradingDaySeries::new("VIX", dates.clone(), vix)?,
        wti_logret: TradingDaySeries::new("WTI", dates, wti)?,
    })
}

pub fn read_holidays(path: &Path) -> Result<Vec<NaiveDate>> {
    let t = read_table(path)?;
    expect_header(&t, path, &["date"])?;
    rows(&t, path).map(|r| r.date(0)).collect()
}
