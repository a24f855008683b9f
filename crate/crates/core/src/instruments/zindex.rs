//! Issuer-level spreads and the cross-issuer Z-index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IssuerRecord {
    pub issuer_id: String,
    pub name: String,
    /// Average yearly Scope 1 emissions, Mt CO2.
    pub emissions: f64,
    pub sector: String,
}

impl IssuerRecord {
    pub fn new(
        issuer_id: impl Into<String>,
        name: impl Into<String>,
        emissions: f64,
        sector: impl Into<String>,
    ) -> Result<Self> {
        let issuer_id = issuer_id.into();
        if !(emissions > 0.0 && emissions.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{issuer_id}: emissions must be positive, got {emissions}"
            )));
        }
        Ok(Self {
            issuer_id,
            name: name.into(),
            emissions,
            sector: sector.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZIndexWeighting {
    Equal,
    Emissions,
}

/// How issuer spreads are formed and combined into the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZIndexVariant {
    /// Amount-weighted issuer spreads, equal-weighted index.
    #[default]
    Equal,
    /// Amount-weighted issuer spreads, emissions-weighted index.
    Emissions,
    /// Issuer spread interpolated at a fixed tenor (years), equal-weighted index.
    Interpolated(u32),
}

impl ZIndexVariant {
    pub const ALL: [ZIndexVariant; 5] = [
        ZIndexVariant::Equal,
        ZIndexVariant::Interpolated(1),
        ZIndexVariant::Interpolated(3),
        ZIndexVariant::Interpolated(5),
        ZIndexVariant::Emissions,
    ];

    pub fn weighting(&self) -> ZIndexWeighting {
        match self {
            ZIndexVariant::Emissions => ZIndexWeighting::Emissions,
            _ => ZIndexWeighting::Equal,
        }
    }
}

impl fmt::Display for ZIndexVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZIndexVariant::Equal => f.write_str("equal"),
            ZIndexVariant::Emissions => f.write_str("emissions"),
            ZIndexVariant::Interpolated(y) => write!(f, "interp{y}y"),
        }
    }
}

impl FromStr for ZIndexVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equal" | "baseline" => Ok(ZIndexVariant::Equal),
            "emissions" => Ok(ZIndexVariant::Emissions),
            "interp1y" => Ok(ZIndexVariant::Interpolated(1)),
            "interp3y" => Ok(ZIndexVariant::Interpolated(3)),
            "interp5y" => Ok(ZIndexVariant::Interpolated(5)),
            other => Err(Error::Config(format!(
                "unknown z-index variant `{other}` (expected equal, emissions, interp1y, interp3y, interp5y)"
            ))),
        }
    }
}

/// One bond's solved spread on one date.
#[derive(Debug, Clone, PartialEq)]
pub struct BondSpread {
    pub bond_id: String,
    pub issuer_id: String,
    pub z: f64,
    pub issue_amount: f64,
    /// Remaining life in years.
    pub tenor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZIndexPoint {
    pub date: NaiveDate,
    pub z_index: f64,
    pub n_issuers: usize,
}

/// Issue-amount weighted average of `(z, amount)` pairs.
pub fn issuer_z_spread_weighted(spreads: &[(f64, f64)]) -> Result<f64> {
    if spreads.is_empty() {
        return Err(Error::InvalidArgument("no bond spreads for issuer".into()));
    }
    if let Some((_, a)) = spreads.iter().find(|(_, a)| !(*a > 0.0)) {
        return Err(Error::InvalidArgument(format!("issue amount must be positive, got {a}")));
    }
    let total: f64 = spreads.iter().map(|(_, a)| a).sum();
    Ok(spreads.iter().map(|(z, a)| z * a).sum::<f64>() / total)
}

/// Linear interpolation of `(z, tenor)` pairs at `target` years, flat
/// outside the observed range. Bonds sharing a tenor are averaged.
pub fn issuer_z_spread_interpolated(spreads: &[(f64, f64)], target: f64) -> Result<f64> {
    if spreads.is_empty() {
        return Err(Error::InvalidArgument("no bond spreads for issuer".into()));
    }
    let mut pts: Vec<(f64, f64)> = spreads.iter().map(|&(z, t)| (t, z)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut nodes: Vec<(f64, f64, usize)> = Vec::with_capacity(pts.len());
    for (t, z) in pts {
        match nodes.last_mut() {
            Some(last) if last.0 == t => {
                last.1 += z;
                last.2 += 1;
            }
            _ => nodes.push((t, z, 1)),
        }
    }
    let nodes: Vec<(f64, f64)> = nodes.into_iter().map(|(t, s, n)| (t, s / n as f64)).collect();
    let first = nodes[0];
    let last = nodes[nodes.len() - 1];
    if target <= first.0 {
        return Ok(first.1);
    }
    if target >= last.0 {
        return Ok(last.1);
    }
    let i = nodes.partition_point(|(t, _)| *t <= target);
    let (t0, z0) = nodes[i - 1];
    let (t1, z1) = nodes[i];
    Ok(z0 + (z1 - z0) * (target - t0) / (t1 - t0))
}

/// Cross-issuer average of issuer spreads.
pub fn z_index(
    issuer_spreads: &[(String, f64)],
    weighting: ZIndexWeighting,
    records: &[IssuerRecord],
) -> Result<f64> {
    if issuer_spreads.is_empty() {
        return Err(Error::InvalidArgument("no issuer spreads".into()));
    }
    match weighting {
        ZIndexWeighting::Equal => {
            Ok(issuer_spreads.iter().map(|(_, z)| z).sum::<f64>() / issuer_spreads.len() as f64)
        }
        ZIndexWeighting::Emissions => {
            let mut num = 0.0;
            let mut den = 0.0;
            for (id, z) in issuer_spreads {
                let rec = records
                    .iter()
                    .find(|r| &r.issuer_id == id)
                    .ok_or_else(|| Error::UnknownIssuer(id.clone()))?;
                num += z * rec.emissions;
                den += rec.emissions;
            }
            Ok(num / den)
        }
    }
}

/// Z-index on one date from that day's bond spreads. Issuers without a
/// spread that day simply do not contribute.
pub fn z_index_point(
    date: NaiveDate,
    spreads: &[BondSpread],
    variant: ZIndexVariant,
    records: &[IssuerRecord],
) -> Result<ZIndexPoint> {
    let mut by_issuer: BTreeMap<&str, Vec<&BondSpread>> = BTreeMap::new();
    for s in spreads {
        by_issuer.entry(s.issuer_id.as_str()).or_default().push(s);
    }
    let issuer_spreads: Vec<(String, f64)> = by_issuer
        .into_iter()
        .map(|(id, bonds)| {
            let z = match variant {
                ZIndexVariant::Interpolated(years) => {
                    let pts: Vec<(f64, f64)> = bonds.iter().map(|b| (b.z, b.tenor)).collect();
                    issuer_z_spread_interpolated(&pts, years as f64)?
                }
                _ => {
                    let pts: Vec<(f64, f64)> = bonds.iter().map(|b| (b.z, b.issue_amount)).collect();
                    issuer_z_spread_weighted(&pts)?
                }
            };
            Ok((id.to_string(), z))
        })
        .collect::<Result<_>>()?;
    if issuer_spreads.is_empty() {
        return Err(Error::InvalidArgument(format!("no bond spreads on {date}")));
    }
    let z = z_index(&issuer_spreads, variant.weighting(), records)?;
    Ok(ZIndexPoint {
        date,
        z_index: z,
        n_issuers: issuer_spreads.len(),
    })
}
