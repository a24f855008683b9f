//! End-to-end orchestration: ingest, series construction, the econometric
//! battery and the report.

pub mod config;
pub mod ingest;
pub mod report;
pub mod simulate;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::calendar::{act365, add_months, BusinessCalendar};
use crate::curves::{bootstrap_ois, DiscountCurve};
use crate::econometrics::{
    adf_gls, fit_ecm, garch11_fit, johansen, select_var_order, ControlSet, EcmData, EcmFit, EcmVariant, GarchFit,
    JohansenResult, UnitRootResult,
};
use crate::error::{Error, Result, Stage, StageExt};
use crate::instruments::{
    build_c_spread_series_with_roll, c_spread_series, z_index_point, z_spread, BondQuote, BondSpread, CSpreadPoint,
    ZIndexVariant,
};
use crate::series::{align, describe, first_diff, pacf, pearson_test, to_weekly, winsorize, TradingDaySeries};

pub use config::{DataPaths, Frequency, PipelineConfig};
pub use ingest::{load_market_data, Controls, MarketData};
pub use report::{Cell, Figure, OutputFormat, Provenance, Report, Table};
pub use simulate::{simulate_levels, simulate_market, write_market, SimMarket, SimSpec, SimTruth};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads every input, drops non-business days and applies the window.
pub fn load_inputs(cfg: &PipelineConfig) -> Result<MarketData> {
    cfg.check_files().stage(Stage::Config)?;
    let mut data = load_market_data(&cfg.data).stage(Stage::Ingest)?;
    let cal = BusinessCalendar::with_holidays(data.holidays.iter().copied());
    let before = data.futures.len();
    data.futures.retain(|d, _| cal.is_business_day(*d));
    data.spot.retain(|s| cal.is_business_day(s.quote_date));
    data.ois.retain(|d, _| cal.is_business_day(*d));
    data.bond_quotes.retain(|d, _| cal.is_business_day(*d));
    if data.futures.len() < before {
        log::info!("dropped {} non-business futures dates", before - data.futures.len());
    }
    data.restrict_window(cfg.start, cfg.end);
    if data.futures.is_empty() || data.spot.is_empty() || data.ois.is_empty() {
        return Err(Error::NoCommonDates).stage(Stage::Ingest);
    }
    Ok(data)
}

/// One bootstrapped curve per OIS quote date.
pub fn build_curves(data: &MarketData) -> Result<BTreeMap<NaiveDate, DiscountCurve>> {
    let entries: Vec<(&NaiveDate, &Vec<crate::curves::OisQuote>)> = data.ois.iter().collect();
    entries
        .par_iter()
        .map(|(d, quotes)| {
            let mut q = (*quotes).clone();
            q.sort_by_key(|x| x.tenor.end_date(**d));
            bootstrap_ois(&q, **d).map(|c| (**d, c)).inspect_err(|e| {
                log::error!("curve bootstrap failed on {d}: {e}");
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
        .stage(Stage::Curves)
}

/// Three-month zero rate r_t = zero(t, t + 3M) off each curve.
pub fn short_rate_series(curves: &BTreeMap<NaiveDate, DiscountCurve>) -> Result<TradingDaySeries> {
    let pairs = curves
        .iter()
        .map(|(d, c)| Ok((*d, c.zero_rate(*d, add_months(*d, 3))?)))
        .collect::<Result<Vec<_>>>()?;
    TradingDaySeries::from_pairs("r", pairs)
}

/// Z-spread of every priceable quote, grouped by date. Quotes that cannot
/// be priced are logged and skipped.
pub fn bond_spreads(
    data: &MarketData,
    curves: &BTreeMap<NaiveDate, DiscountCurve>,
) -> BTreeMap<NaiveDate, Vec<BondSpread>> {
    let bonds: HashMap<&str, &crate::instruments::FixedCouponBond> =
        data.bonds.iter().map(|b| (b.bond_id.as_str(), b)).collect();
    let dates: Vec<NaiveDate> = data.bond_quotes.keys().copied().filter(|d| curves.contains_key(d)).collect();
    dates
        .par_iter()
        .map(|d| {
            let curve = &curves[d];
            let spreads: Vec<BondSpread> = data.bond_quotes[d]
                .iter()
                .filter_map(|q| {
                    let bond = bonds[q.bond_id.as_str()];
                    if bond.maturity <= *d {
                        log::debug!("{}: matured before {d}", bond.bond_id);
                        return None;
                    }
                    let solved = BondQuote::new(bond, *d, q.dirty_price).and_then(|bq| z_spread(&bq, curve));
                    match solved {
                        Ok(z) => Some(BondSpread {
                            bond_id: bond.bond_id.clone(),
                            issuer_id: bond.issuer_id.clone(),
                            z,
                            issue_amount: bond.issue_amount,
                            tenor: act365(*d, bond.maturity),
                        }),
                        Err(e) => {
                            log::warn!("{} on {d} skipped: {e}", bond.bond_id);
                            None
                        }
                    }
                })
                .collect();
            (*d, spreads)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .filter(|(_, v)| !v.is_empty())
        .collect()
}

/// Z-index series for one variant.
pub fn z_index_series(
    spreads: &BTreeMap<NaiveDate, Vec<BondSpread>>,
    variant: ZIndexVariant,
    data: &MarketData,
) -> Result<TradingDaySeries> {
    let pairs = spreads
        .par_iter()
        .map(|(d, s)| z_index_point(*d, s, variant, &data.issuers).map(|p| (p.date, p.z_index)))
        .collect::<Result<Vec<_>>>()?;
    if pairs.is_empty() {
        return Err(Error::DegenerateInput("no priceable bond quotes".into()));
    }
    TradingDaySeries::from_pairs("Z", pairs)
}

/// The constructed daily series before any transform.
#[derive(Debug, Clone)]
pub struct MarketSeries {
    pub curves: BTreeMap<NaiveDate, DiscountCurve>,
    pub c_points: Vec<CSpreadPoint>,
    pub c: TradingDaySeries,
    /// One Z-index per variant, in [`ZIndexVariant::ALL`] order.
    pub z: Vec<(ZIndexVariant, TradingDaySeries)>,
    pub r: TradingDaySeries,
    pub spot: TradingDaySeries,
}

impl MarketSeries {
    pub fn z_variant(&self, v: ZIndexVariant) -> &TradingDaySeries {
        &self.z.iter().find(|(x, _)| *x == v).expect("all variants are built").1
    }
}

pub fn build_market_series(cfg: &PipelineConfig, data: &MarketData) -> Result<MarketSeries> {
    let curves = build_curves(data)?;
    let c_points =
        build_c_spread_series_with_roll(&data.futures, &data.spot, &curves, cfg.roll_months).stage(Stage::CSpread)?;
    let c = c_spread_series(&c_points).stage(Stage::CSpread)?;
    let spreads = bond_spreads(data, &curves);
    let z = ZIndexVariant::ALL
        .iter()
        .map(|v| Ok((*v, z_index_series(&spreads, *v, data)?)))
        .collect::<Result<Vec<_>>>()
        .stage(Stage::ZIndex)?;
    let r = short_rate_series(&curves).stage(Stage::Curves)?;
    let spot = TradingDaySeries::from_pairs("S", data.spot.iter().map(|s| (s.quote_date, s.price))).stage(Stage::Ingest)?;
    Ok(MarketSeries {
        curves,
        c_points,
        c,
        z,
        r,
        spot,
    })
}

/// Levels, differences, the Johansen step and psi for one specification.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub frequency: Frequency,
    pub c: TradingDaySeries,
    pub z: TradingDaySeries,
    pub r: TradingDaySeries,
    pub dc: TradingDaySeries,
    pub dz: TradingDaySeries,
    pub dr: TradingDaySeries,
    pub johansen: JohansenResult,
    /// psi_t = C_t - gamma_1 Z_t - gamma_2 r_t on the difference dates.
    pub psi: TradingDaySeries,
}

impl Prepared {
    pub fn gamma(&self) -> (f64, f64) {
        let v = self.johansen.leading_vector();
        (-v[1], -v[2])
    }

    pub fn ecm_data<'a>(&'a self, controls: Option<&'a ControlSet>) -> EcmData<'a> {
        EcmData {
            dc: &self.dc,
            dz: &self.dz,
            dr: &self.dr,
            psi: &self.psi,
            controls,
        }
    }
}

pub fn prepare(
    cfg: &PipelineConfig,
    ms: &MarketSeries,
    variant: ZIndexVariant,
    frequency: Frequency,
    winsor: Option<f64>,
) -> Result<Prepared> {
    let z_daily = ms.z_variant(variant);
    let (c, z, r) = {
        let a = align(&[&ms.c, z_daily, &ms.r]).stage(Stage::Transform)?;
        let cols = a.columns();
        match frequency {
            Frequency::Daily => (cols[0].clone(), cols[1].clone(), cols[2].clone()),
            Frequency::Weekly => (to_weekly(&cols[0]), to_weekly(&cols[1]), to_weekly(&cols[2])),
        }
    };
    let diff = |s: &TradingDaySeries, label: &str| -> Result<TradingDaySeries> {
        let d = first_diff(s)?.with_label(label);
        match winsor {
            Some(level) => winsorize(&d, level).map(|w| w.with_label(label)),
            None => Ok(d),
        }
    };
    let dc = diff(&c, "dC").stage(Stage::Transform)?;
    let dz = diff(&z, "dZ").stage(Stage::Transform)?;
    let dr = diff(&r, "dr").stage(Stage::Transform)?;

    let n = c.len();
    let levels = DMatrix::from_fn(n, 3, |i, j| [&c, &z, &r][j].values()[i]);
    let k = match cfg.johansen_lags {
        Some(k) => k,
        None => select_var_order(&levels, cfg.johansen_max_lags).stage(Stage::Cointegration)?,
    };
    let jo = johansen(&levels, k, cfg.significance).stage(Stage::Cointegration)?;
    let v = jo.leading_vector();
    let psi_all: Vec<f64> = (0..n).map(|i| v[0] * c.values()[i] + v[1] * z.values()[i] + v[2] * r.values()[i]).collect();
    let psi = TradingDaySeries::new("psi", c.dates()[1..].to_vec(), psi_all[1..].to_vec()).stage(Stage::Cointegration)?;
    Ok(Prepared {
        frequency,
        c: c.with_label("C"),
        z: z.with_label("Z"),
        r: r.with_label("r"),
        dc,
        dz,
        dr,
        johansen: jo,
        psi,
    })
}

pub fn unit_root_tests(cfg: &PipelineConfig, p: &Prepared) -> Result<Vec<(String, UnitRootResult)>> {
    [&p.c, &p.z, &p.r, &p.dc, &p.dz, &p.dr]
        .iter()
        .map(|s| {
            adf_gls(s, cfg.adf_deterministic, cfg.adf_max_lag, cfg.adf_lag_rule)
                .map(|r| (s.label().to_string(), r))
                .inspect_err(|e| log::error!("unit-root test on {} failed: {e}", s.label()))
        })
        .collect::<Result<Vec<_>>>()
        .stage(Stage::UnitRoot)
}

/// GARCH(1,1) on spot log-returns over `dates`; sigma is dated at the
/// later day of each return.
pub fn spot_garch(spot: &TradingDaySeries, dates: &[NaiveDate]) -> Result<GarchFit> {
    let s = spot.restrict_to(dates)?;
    let logs = s.map_values("lnS", f64::ln)?;
    let ret = first_diff(&logs)?.with_label("spot_logret");
    garch11_fit(&ret)
}

/// ECM inputs restricted to the dates shared with every control.
pub struct ControlledSample {
    pub dc: TradingDaySeries,
    pub dz: TradingDaySeries,
    pub dr: TradingDaySeries,
    pub psi: TradingDaySeries,
    pub controls: ControlSet,
}

impl ControlledSample {
    pub fn ecm_data(&self) -> EcmData<'_> {
        EcmData {
            dc: &self.dc,
            dz: &self.dz,
            dr: &self.dr,
            psi: &self.psi,
            controls: Some(&self.controls),
        }
    }
}

pub fn controlled_sample(p: &Prepared, controls: &Controls, sigma: &TradingDaySeries) -> Result<ControlledSample> {
    let a = align(&[
        &p.dc,
        &p.dz,
        &p.dr,
        &p.psi,
        &controls.spx_logret,
        &controls.vix_level,
        &controls.wti_logret,
        sigma,
    ])?;
    let cols = a.columns();
    Ok(ControlledSample {
        dc: cols[0].clone(),
        dz: cols[1].clone(),
        dr: cols[2].clone(),
        psi: cols[3].clone(),
        controls: ControlSet {
            spx_logret: cols[4].clone(),
            vix_level: cols[5].clone(),
            wti_logret: cols[6].clone(),
            sigma: cols[7].clone(),
        },
    })
}

fn roman(i: usize) -> &'static str {
    ["(I)", "(II)", "(III)", "(IV)", "(V)", "(VI)", "(VII)"][i]
}

/// Runs the whole battery and assembles the report.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Report> {
    let data = load_inputs(cfg)?;
    let ms = build_market_series(cfg, &data)?;
    let base = prepare(cfg, &ms, cfg.zindex_variant, cfg.frequency, cfg.winsorize)?;

    let mut tables = Vec::new();
    let mut omitted: Vec<(String, String)> = Vec::new();
    let mut figures = Vec::new();

    let stats = [&base.c, &base.z, &base.r]
        .iter()
        .map(|s| describe(s).map(|d| (s.label(), d)))
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Transform)?;
    tables.push(report::descriptive_table(&stats));

    let ur = unit_root_tests(cfg, &base)?;
    let ur_rows: Vec<(&str, UnitRootResult)> = ur.iter().map(|(l, r)| (l.as_str(), *r)).collect();
    tables.push(report::unit_root_table(&ur_rows));
    tables.push(report::johansen_table(&base.johansen, &["C", "Z", "r"]));

    // Sigma comes from the daily spot, whatever the analysis frequency.
    let daily = if cfg.frequency == Frequency::Daily {
        base.clone()
    } else {
        prepare(cfg, &ms, cfg.zindex_variant, Frequency::Daily, cfg.winsorize)?
    };
    let garch = spot_garch(&ms.spot, daily.c.dates()).stage(Stage::Garch)?;
    let sigma = garch.conditional_vol.clone();
    tables.push(report::garch_table(&garch));

    let controlled = match &data.controls {
        Some(c) => Some(controlled_sample(&daily, c, &sigma).stage(Stage::Ecm)?),
        None => None,
    };
    match &controlled {
        Some(cs) => {
            let labels = ["SPX", "VIX", "WTI", "sigma"];
            let cols: [&TradingDaySeries; 4] = [
                &cs.controls.spx_logret,
                &cs.controls.vix_level,
                &cs.controls.wti_logret,
                &cs.controls.sigma,
            ];
            let pairs = |i: usize, j: usize| pearson_test(cols[i].values(), cols[j].values()).ok();
            tables.push(report::correlation_table(&labels, &pairs));
        }
        None => omitted.push(("table4_correlations".into(), "no control variables configured".into())),
    }

    let lags = cfg.ecm_lags;
    let bw = cfg.hac_bandwidth;
    match cfg.frequency {
        Frequency::Daily => {
            let mut fits: Vec<(String, EcmFit)> = Vec::new();
            for (i, v) in EcmVariant::ALL.iter().enumerate() {
                let fit = if v.needs_controls() {
                    match &controlled {
                        Some(cs) => fit_ecm(&cs.ecm_data(), lags, *v, bw),
                        None => continue,
                    }
                } else {
                    fit_ecm(&base.ecm_data(None), lags, *v, bw)
                };
                fits.push((roman(i).to_string(), fit.stage(Stage::Ecm)?));
            }
            let refs: Vec<(String, &EcmFit)> = fits.iter().map(|(c, f)| (c.clone(), f)).collect();
            let mut t5 = report::ecm_table("table5_ecm", "Error correction model, daily", &refs);
            if controlled.is_none() {
                t5.notes.push("Variants (III) to (VI) omitted: no control variables configured.".into());
            }
            tables.push(t5);

            let mut rob: Vec<(String, EcmFit)> = Vec::new();
            let specs: [(ZIndexVariant, Option<f64>, &str); 6] = [
                (ZIndexVariant::Interpolated(1), cfg.winsorize, "1Y"),
                (ZIndexVariant::Interpolated(3), cfg.winsorize, "3Y"),
                (ZIndexVariant::Interpolated(5), cfg.winsorize, "5Y"),
                (ZIndexVariant::Emissions, cfg.winsorize, "emissions"),
                (cfg.zindex_variant, Some(95.0), "winsor 95"),
                (cfg.zindex_variant, Some(99.0), "winsor 99"),
            ];
            for (i, (zv, w, tag)) in specs.iter().enumerate() {
                let p = prepare(cfg, &ms, *zv, Frequency::Daily, *w)?;
                let fit = fit_ecm(&p.ecm_data(None), lags, EcmVariant::I, bw).stage(Stage::Ecm)?;
                rob.push((format!("{} {tag}", roman(i)), fit));
            }
            let refs: Vec<(String, &EcmFit)> = rob.iter().map(|(c, f)| (c.clone(), f)).collect();
            let mut t6 = report::ecm_table("table6_robustness", "Robustness of model (I)", &refs);
            t6.notes.push(
                "(I)-(III) issuer spreads interpolated at 1, 3 and 5 years; (IV) emissions-weighted index; (V)-(VI) differences winsorized at 95% and 99%."
                    .into(),
            );
            tables.push(t6);

            let weekly = prepare(cfg, &ms, cfg.zindex_variant, Frequency::Weekly, cfg.winsorize)?;
            tables.push(weekly_table(&weekly, bw)?);
        }
        Frequency::Weekly => {
            tables.push(weekly_table(&base, bw)?);
            omitted.push(("table5_ecm".into(), "daily ECM table not produced at weekly frequency".into()));
            omitted.push(("table6_robustness".into(), "daily robustness table not produced at weekly frequency".into()));
        }
    }

    for s in [&base.c, &base.z, &base.r] {
        figures.push(Figure::Dated {
            name: format!("series_{}", s.label()),
            series: s.clone(),
        });
    }
    figures.push(Figure::Dated {
        name: "series_psi".into(),
        series: base.psi.clone(),
    });
    figures.push(Figure::Dated {
        name: "series_sigma".into(),
        series: sigma,
    });
    for s in [&base.dc, &base.dz, &base.dr] {
        let max_lag = cfg.pacf_max_lag.min(s.len().saturating_sub(2)).max(1);
        figures.push(Figure::Pacf {
            name: format!("pacf_{}", s.label()),
            pacf: pacf(s, max_lag).stage(Stage::Transform)?,
        });
    }

    let (g1, g2) = base.gamma();
    let header = vec![
        (
            "estimation".to_string(),
            "two-step: cointegration vector from Johansen, frozen before ECM OLS".to_string(),
        ),
        ("frequency".into(), cfg.frequency.to_string()),
        ("z_index".into(), cfg.zindex_variant.to_string()),
        (
            "winsorize".into(),
            cfg.winsorize.map_or("none".into(), |w| format!("{w}")),
        ),
        ("roll_months".into(), cfg.roll_months.to_string()),
        (
            "sample".into(),
            format!(
                "{} to {} ({} levels)",
                base.c.dates()[0],
                base.c.dates()[base.c.len() - 1],
                base.c.len()
            ),
        ),
        ("ecm_lags".into(), lags.to_string()),
        ("johansen_k".into(), base.johansen.k_ar.to_string()),
        ("gamma".into(), format!("({g1:.4}, {g2:.4})")),
    ];
    Ok(Report {
        header,
        tables,
        figures,
        omitted,
        provenance: provenance(cfg)?,
    })
}

fn weekly_table(p: &Prepared, bw: Option<usize>) -> Result<Table> {
    let specs = [(EcmVariant::I, 0), (EcmVariant::I, 3), (EcmVariant::II, 3)];
    let fits = specs
        .iter()
        .map(|(v, l)| fit_ecm(&p.ecm_data(None), *l, *v, bw))
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Ecm)?;
    let refs: Vec<(String, &EcmFit)> = fits.iter().enumerate().map(|(i, f)| (roman(i).to_string(), f)).collect();
    let mut t = report::ecm_table("table7_weekly", "Error correction model, weekly", &refs);
    t.notes.push("(I) model I without lags; (II) model I with three lags; (III) model II with three lags.".into());
    Ok(t)
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub fn provenance(cfg: &PipelineConfig) -> Result<Provenance> {
    let d = &cfg.data;
    let mut inputs = Vec::new();
    let named = [
        ("futures", Some(&d.futures)),
        ("spot", Some(&d.spot)),
        ("ois", Some(&d.ois)),
        ("bonds", Some(&d.bonds)),
        ("bond_quotes", Some(&d.bond_quotes)),
        ("issuers", Some(&d.issuers)),
        ("controls", d.controls.as_ref()),
        ("holidays", d.holidays.as_ref()),
    ];
    for (name, path) in named {
        if let Some(p) = path {
            inputs.push((name.to_string(), file_digest(p).stage(Stage::Report)?));
        }
    }
    let config_sha256 = if cfg.digest.is_empty() {
        sha256_hex(b"")
    } else {
        cfg.digest.clone()
    };
    Ok(Provenance {
        config_sha256,
        inputs,
        seed: cfg.mc_seed,
    })
}
