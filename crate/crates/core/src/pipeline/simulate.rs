//! Synthetic EUA market whose C-spread, Z-index and short rate are known.
//!
//! (Z, r) follow correlated random walks and C follows the error-correction
//! law around C = gamma_1 Z + gamma_2 r. Every quote file is generated off
//! the same bootstrapped curves the pipeline will rebuild, so the pipeline
//! recovers the generated series up to floating-point rounding.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::calendar::{act365, penultimate_monday, BusinessCalendar};
use crate::curves::{bootstrap_ois, DiscountCurve, OisQuote, Tenor};
use crate::error::{Error, Result};
use crate::instruments::{bond_cash_flows, price_with_spread, FixedCouponBond, FuturesQuote, IssuerRecord, SpotProxy};
use crate::series::TradingDaySeries;

/// OIS strip quoted every day.
pub const OIS_TENORS: [Tenor; 13] = [
    Tenor::Weeks(1),
    Tenor::Months(1),
    Tenor::Months(2),
    Tenor::Months(3),
    Tenor::Months(6),
    Tenor::Months(9),
    Tenor::Years(1),
    Tenor::Years(2),
    Tenor::Years(3),
    Tenor::Years(4),
    Tenor::Years(5),
    Tenor::Years(7),
    Tenor::Years(10),
];

/// The twelve largest emitters: (issuer_id, name, emissions Mt, sector).
pub const ISSUERS: [(&str, &str, f64, &str); 12] = [
    ("MT", "Arcelor Mittal", 169.0, "Industrial Metals and Mining"),
    ("ENEL", "ENEL", 96.0, "Electricity"),
    ("ENGIE", "ENGIE", 95.0, "Gas Water and Multi-utilities"),
    ("LAFARGE", "Lafarge", 92.0, "Construction and Materials"),
    ("HEIG", "Heidelberg Materials", 64.0, "Construction and Materials"),
    ("EDF", "EDF", 57.0, "Electricity"),
    ("ENI", "ENI", 42.0, "Oil Gas and Coal"),
    ("TTE", "Total Energies", 41.0, "Oil Gas and Coal"),
    ("EON", "E ON", 40.0, "Gas Water and Multi-utilities"),
    ("MAERSK", "AP Moeller", 35.0, "Industrial Trasportation"),
    ("CEZ", "CEZ", 28.0, "Electricity"),
    ("VIE", "Veolia Enviroment", 28.0, "Gas Water and Multi-utilities"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub n_days: usize,
    pub start: NaiveDate,
    /// Cointegration vector (1, -gamma_1, -gamma_2) on (C, Z, r).
    pub gamma: [f64; 2],
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Error-correction speed; must be negative.
    pub alpha3: f64,
    pub beta: [f64; 3],
    pub sigma_c: f64,
    pub sigma_z: f64,
    pub sigma_r: f64,
    pub rho_zr: f64,
    pub z_start: f64,
    pub r_start: f64,
    /// Zero-curve slope per year of maturity around the 3M point.
    pub curve_slope: f64,
    pub spot_start: f64,
    pub spot_drift: f64,
    /// Spot log-return GARCH(1,1) (omega, alpha, beta).
    pub spot_garch: [f64; 3],
    pub seed: u64,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            n_days: 2008,
            start: NaiveDate::from_ymd_opt(2013, 1, 2).expect("valid date"),
            gamma: [1.21, 0.40],
            alpha0: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            alpha3: -0.2,
            beta: [-0.165, -0.14, -0.06],
            sigma_c: 1e-4,
            sigma_z: 2.2e-4,
            sigma_r: 1.1e-4,
            rho_zr: 0.2,
            z_start: 0.010,
            r_start: -0.002,
            curve_slope: 0.002,
            spot_start: 5.0,
            spot_drift: 6f64.ln() / 2008.0,
            spot_garch: [1.25e-5, 0.08, 0.90],
            seed: 8,
        }
    }
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha3 < 0.0) {
            return Err(Error::UnstableSpec(format!(
                "alpha3 must be negative for error correction, got {}",
                self.alpha3
            )));
        }
        let ar_sum: f64 = self.beta.iter().map(|b| b.abs()).sum();
        if ar_sum >= 1.0 {
            return Err(Error::UnstableSpec(format!("sum of |beta| is {ar_sum}, must be below 1")));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::InvalidArgument(format!("seed must fit in a TOML integer, got {}", self.seed)));
        }
        if self.n_days < 60 {
            return Err(Error::InvalidArgument(format!("n_days must be at least 60, got {}", self.n_days)));
        }
        for (name, v) in [("sigma_c", self.sigma_c), ("sigma_z", self.sigma_z), ("sigma_r", self.sigma_r)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.rho_zr.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("rho_zr must lie in (-1, 1), got {}", self.rho_zr)));
        }
        if !(self.spot_start > 0.0) {
            return Err(Error::InvalidArgument("spot_start must be positive".into()));
        }
        let [w, a, b] = self.spot_garch;
        if !(w >= 0.0 && a >= 0.0 && b >= 0.0 && a + b < 1.0) {
            return Err(Error::UnstableSpec(format!("spot GARCH ({w}, {a}, {b}) is not stationary")));
        }
        Ok(())
    }
}

/// The generated (pre-quote) series.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTruth {
    pub c: TradingDaySeries,
    pub z: TradingDaySeries,
    pub r: TradingDaySeries,
}

/// A full synthetic input bundle in memory.
#[derive(Debug, Clone)]
pub struct SimMarket {
    pub spec: SimSpec,
    pub futures: Vec<FuturesQuote>,
    pub spot: Vec<SpotProxy>,
    pub ois: Vec<(NaiveDate, OisQuote)>,
    pub bonds: Vec<FixedCouponBond>,
    /// (date, bond_id, dirty price).
    pub bond_quotes: Vec<(NaiveDate, String, f64)>,
    pub issuers: Vec<IssuerRecord>,
    /// (date, spx, vix, wti) price levels.
    pub controls: Vec<(NaiveDate, f64, f64, f64)>,
    pub truth: SimTruth,
}

/// Two fixed-coupon bonds per issuer, maturing 2022 to 2030.
pub fn fixture_bonds() -> Vec<FixedCouponBond> {
    let mut out = Vec::with_capacity(2 * ISSUERS.len());
    for (i, (id, ..)) in ISSUERS.iter().enumerate() {
        let k = i as i32;
        let month = 1 + (3 * i as u32) % 12;
        let short = NaiveDate::from_ymd_opt(2022 + k % 4, month, 15).expect("valid date");
        let long = NaiveDate::from_ymd_opt(2026 + k % 5, 13 - month, 20).expect("valid date");
        let coupon = 0.01 + 0.0025 * (i % 5) as f64;
        out.push(
            FixedCouponBond::new(format!("{id}-A"), *id, coupon, 1, short, 500.0 + 125.0 * (i % 4) as f64)
                .expect("valid fixture bond"),
        );
        out.push(
            FixedCouponBond::new(
                format!("{id}-B"),
                *id,
                coupon + 0.005,
                if i % 3 == 0 { 2 } else { 1 },
                long,
                750.0 + 250.0 * (i % 3) as f64,
            )
            .expect("valid fixture bond"),
        );
    }
    out
}

pub fn fixture_issuers() -> Vec<IssuerRecord> {
    ISSUERS
        .iter()
        .map(|(id, name, e, sector)| IssuerRecord::new(*id, *name, *e, *sector).expect("valid issuer"))
        .collect()
}

/// Par OIS quotes implied by the zero-rate line r + slope (tau - tau_3M).
fn ois_strip(t: NaiveDate, r: f64, slope: f64) -> Result<Vec<OisQuote>> {
    let tau3m = act365(t, Tenor::Months(3).end_date(t));
    let pillars: Vec<(NaiveDate, f64)> = OIS_TENORS
        .iter()
        .map(|tenor| {
            let d = tenor.end_date(t);
            let tau = act365(t, d);
            (d, (-(r + slope * (tau - tau3m)) * tau).exp())
        })
        .collect();
    let curve = DiscountCurve::new(t, pillars)?;
    OIS_TENORS
        .iter()
        .map(|tenor| OisQuote::new(*tenor, curve.ois_par_rate(*tenor)?))
        .collect()
}

/// Front three December expiries strictly after `t`.
fn december_expiries(t: NaiveDate) -> Vec<NaiveDate> {
    (t.year()..t.year() + 4)
        .map(|y| penultimate_monday(y, 12))
        .filter(|m| *m > t)
        .take(3)
        .collect()
}

/// The (C, Z, r) truth paths alone, on the same random stream that
/// `simulate_market` starts from.
pub fn simulate_levels(spec: &SimSpec) -> Result<SimTruth> {
    spec.validate()?;
    let dates = BusinessCalendar::weekends_only().business_days_from(spec.start, spec.n_days);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut normal = move || rng.sample::<f64, _>(StandardNormal);
    let (c, z, r) = level_paths(spec, &mut normal);
    Ok(SimTruth {
        c: TradingDaySeries::new("C", dates.clone(), c)?,
        z: TradingDaySeries::new("Z", dates.clone(), z)?,
        r: TradingDaySeries::new("r", dates, r)?,
    })
}

/// Correlated random walks for Z and r; C follows the ECM law around
/// gamma' (Z, r).
fn level_paths(spec: &SimSpec, normal: &mut impl FnMut() -> f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = spec.n_days;
    let (g1, g2) = (spec.gamma[0], spec.gamma[1]);
    let rho_c = (1.0 - spec.rho_zr * spec.rho_zr).sqrt();
    let mut z = vec![spec.z_start; n];
    let mut r = vec![spec.r_start; n];
    let mut c = vec![g1 * spec.z_start + g2 * spec.r_start; n];
    let mut dc = vec![0.0; n];
    for t in 1..n {
        let (e1, e2, e3) = (normal(), normal(), normal());
        let dz = spec.sigma_z * e1;
        let dr = spec.sigma_r * (spec.rho_zr * e1 + rho_c * e2);
        z[t] = z[t - 1] + dz;
        r[t] = r[t - 1] + dr;
        let psi = c[t - 1] - g1 * z[t - 1] - g2 * r[t - 1];
        let mut d = spec.alpha0 + spec.alpha1 * dz + spec.alpha2 * dr + spec.alpha3 * psi + spec.sigma_c * e3;
        for (i, b) in spec.beta.iter().enumerate() {
            if t > i + 1 {
                d += b * dc[t - i - 1];
            }
        }
        dc[t] = d;
        c[t] = c[t - 1] + d;
    }

    (c, z, r)
}

/// A full synthetic input bundle: OIS strips, futures, spot, bonds, issuers
/// and controls consistent with the simulated truth paths.
pub fn simulate_market(spec: &SimSpec) -> Result<SimMarket> {
    spec.validate()?;
    let n = spec.n_days;
    let dates = BusinessCalendar::weekends_only().business_days_from(spec.start, n);
    let bonds = fixture_bonds();
    let last = dates[n - 1];
    if let Some(b) = bonds.iter().find(|b| b.maturity <= last) {
        return Err(Error::InvalidArgument(format!(
            "simulation ends {last}, after fixture bond {} matures",
            b.bond_id
        )));
    }
    let issuers = fixture_issuers();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut normal = move || rng.sample::<f64, _>(StandardNormal);

    let (c, z, r) = level_paths(spec, &mut normal);

    // Spot with GARCH(1,1) log-returns.
    let [w, a, b] = spec.spot_garch;
    let mut h = if a + b < 1.0 && w > 0.0 { w / (1.0 - a - b) } else { w };
    let mut eps_prev = 0.0;
    let mut log_s = spec.spot_start.ln();
    let mut spot_px = Vec::with_capacity(n);
    for t in 0..n {
        if t > 0 {
            h = w + a * eps_prev * eps_prev + b * h;
            eps_prev = h.sqrt() * normal();
            log_s += spec.spot_drift + eps_prev;
        }
        spot_px.push(log_s.exp());
    }

    // Issuer and bond spread deviations, centered so the equal-weight
    // index of amount-weighted issuer spreads is exactly Z.
    let n_iss = issuers.len();
    let base: Vec<f64> = (0..n_iss).map(|i| -0.004 + 0.008 * i as f64 / (n_iss - 1) as f64).collect();
    let mut issuer_noise = vec![0.0; n_iss];
    let mut bond_noise = vec![0.0; n_iss];

    // Controls.
    let (mut spx, mut vix, mut wti) = (1460.0_f64, 17.0_f64, 90.0_f64);

    let mut market = SimMarket {
        spec: spec.clone(),
        futures: Vec::with_capacity(3 * n),
        spot: Vec::with_capacity(n),
        ois: Vec::with_capacity(OIS_TENORS.len() * n),
        bonds: bonds.clone(),
        bond_quotes: Vec::with_capacity(bonds.len() * n),
        issuers: issuers.clone(),
        controls: Vec::with_capacity(n),
        truth: SimTruth {
            c: TradingDaySeries::new("C", dates.clone(), c.clone())?,
            z: TradingDaySeries::new("Z", dates.clone(), z.clone())?,
            r: TradingDaySeries::new("r", dates.clone(), r.clone())?,
        },
    };

    for (t, &date) in dates.iter().enumerate() {
        let quotes = ois_strip(date, r[t], spec.curve_slope)?;
        let curve = bootstrap_ois(&quotes, date)?;
        market.ois.extend(quotes.into_iter().map(|q| (date, q)));

        let s = spot_px[t];
        market.spot.push(SpotProxy::new(date, s)?);
        for (k, m) in december_expiries(date).into_iter().enumerate() {
            let tau = act365(date, m);
            let f = s * ((c[t] + curve.zero_rate(date, m)?) * tau).exp();
            let volume = (40_000.0 / (1.0 + 4.0 * k as f64) * (1.0 + 0.2 * normal()).abs()).round() as u64;
            market
                .futures
                .push(FuturesQuote::new(format!("DEC{:02}", m.year() % 100), date, m, f, volume)?);
        }

        for i in 0..n_iss {
            issuer_noise[i] = 0.98 * issuer_noise[i] + 5e-5 * normal();
            bond_noise[i] = 0.95 * bond_noise[i] + 2e-5 * normal();
        }
        let offsets: Vec<f64> = (0..n_iss).map(|i| base[i] + issuer_noise[i]).collect();
        let mean_off = offsets.iter().sum::<f64>() / n_iss as f64;
        for i in 0..n_iss {
            let (ba, bb) = (&bonds[2 * i], &bonds[2 * i + 1]);
            let total = ba.issue_amount + bb.issue_amount;
            let delta = if i % 2 == 0 { 5e-4 } else { -5e-4 } + bond_noise[i];
            let issuer_z = z[t] + offsets[i] - mean_off;
            for (bond, dev) in [
                (ba, delta * bb.issue_amount / total),
                (bb, -delta * ba.issue_amount / total),
            ] {
                let flows = bond_cash_flows(bond, date)?;
                let price = price_with_spread(&flows, &curve, issuer_z + dev)?;
                market.bond_quotes.push((date, bond.bond_id.clone(), price));
            }
        }

        if t > 0 {
            spx *= (3e-4 + 0.009 * normal()).exp();
            vix = (17.0 + 0.97 * (vix - 17.0) + 1.2 * normal()).max(9.0);
            wti *= (0.02 * normal()).exp();
        }
        market.controls.push((date, spx, vix, wti));
    }
    Ok(market)
}

/// Writes the bundle plus `config.toml` and `truth/{C,Z,r}.csv` into `dir`.
/// Returns the written paths in a fixed order.
pub fn write_market(market: &SimMarket, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir.join("truth")).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, body: String| -> Result<()> {
        let p = dir.join(name);
        let mut f = BufWriter::new(fs::File::create(&p).map_err(|e| Error::io(&p, e))?);
        f.write_all(body.as_bytes()).and_then(|_| f.flush()).map_err(|e| Error::io(&p, e))?;
        written.push(p);
        Ok(())
    };

    let mut s = String::from("date,contract_id,maturity,settle,volume\n");
    for q in &market.futures {
        let _ = writeln!(s, "{},{},{},{},{}", q.quote_date, q.contract_id, q.maturity, q.settle_price, q.volume);
    }
    emit("futures.csv", s)?;

    let mut s = String::from("date,price\n");
    for p in &market.spot {
        let _ = writeln!(s, "{},{}", p.quote_date, p.price);
    }
    emit("spot.csv", s)?;

    let mut s = String::from("date,tenor,rate\n");
    for (d, q) in &market.ois {
        let _ = writeln!(s, "{},{},{}", d, q.tenor, q.par_rate);
    }
    emit("ois.csv", s)?;

    let mut s = String::from("bond_id,issuer_id,coupon,frequency,maturity,issue_amount\n");
    for b in &market.bonds {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            b.bond_id, b.issuer_id, b.coupon_rate, b.frequency, b.maturity, b.issue_amount
        );
    }
    emit("bonds.csv", s)?;

    let mut s = String::from("date,bond_id,dirty_price\n");
    for (d, id, p) in &market.bond_quotes {
        let _ = writeln!(s, "{d},{id},{p}");
    }
    emit("bond_quotes.csv", s)?;

    let mut s = String::from("issuer_id,name,emissions_mt,sector\n");
    for i in &market.issuers {
        let _ = writeln!(s, "{},{},{},{}", i.issuer_id, i.name, i.emissions, i.sector);
    }
    emit("issuers.csv", s)?;

    let mut s = String::from("date,spx,vix,wti\n");
    for (d, a, b, c) in &market.controls {
        let _ = writeln!(s, "{d},{a},{b},{c}");
    }
    emit("controls.csv", s)?;

    let sp = &market.spec;
    emit(
        "config.toml",
        format!(
            "# Synthetic market: seed {}, {} days from {}.\n# gamma = ({}, {}), alpha3 = {}, beta = ({}, {}, {})\nmc.seed = {}\n",
            sp.seed,
            sp.n_days,
            sp.start,
            sp.gamma[0],
            sp.gamma[1],
            sp.alpha3,
            sp.beta[0],
            sp.beta[1],
            sp.beta[2],
            sp.seed
        ),
    )?;

    for (name, series) in [("C", &market.truth.c), ("Z", &market.truth.z), ("r", &market.truth.r)] {
        let p = dir.join("truth").join(format!("{name}.csv"));
        series.write_csv_file(&p)?;
        written.push(p);
    }
    Ok(written)
}
