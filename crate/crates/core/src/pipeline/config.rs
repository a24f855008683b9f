//! Pipeline configuration: a TOML file of dotted keys, every key optional.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use toml::{Table, Value};

use crate::econometrics::{Deterministic, EcmVariant, LagRule, Level};
use crate::error::{Error, Result};
use crate::instruments::ZIndexVariant;
use crate::series::parse_date;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frequency {
    #[default]
    Daily,
    Weekly,
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frequency::Daily => "daily",
            Frequency::Weekly => "weekly",
        })
    }
}

impl FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "daily" => Ok(Frequency::Daily),
            "weekly" => Ok(Frequency::Weekly),
            other => Err(Error::Config(format!("unknown frequency `{other}` (expected daily or weekly)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataPaths {
    pub futures: PathBuf,
    pub spot: PathBuf,
    pub ois: PathBuf,
    pub bonds: PathBuf,
    pub bond_quotes: PathBuf,
    pub issuers: PathBuf,
    /// `None` disables the control regressors.
    pub controls: Option<PathBuf>,
    pub holidays: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub data: DataPaths,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    /// Length of the roll window before expiry, in calendar months.
    pub roll_months: u32,
    pub zindex_variant: ZIndexVariant,
    /// Winsorization level in percent, applied to the differenced series.
    pub winsorize: Option<f64>,
    pub frequency: Frequency,
    /// Variant printed by the `ecm` subcommand.
    pub ecm_variant: EcmVariant,
    pub ecm_lags: usize,
    pub hac_bandwidth: Option<usize>,
    /// Fixed Johansen VAR order; `None` selects it by BIC.
    pub johansen_lags: Option<usize>,
    pub johansen_max_lags: usize,
    pub adf_deterministic: Deterministic,
    pub adf_max_lag: Option<usize>,
    pub adf_lag_rule: LagRule,
    pub pacf_max_lag: usize,
    pub significance: Level,
    pub mc_seed: u64,
    pub mc_draws: usize,
    /// SHA-256 of the config file bytes (empty for defaults).
    pub digest: String,
}

impl PipelineConfig {
    /// Defaults with every data file resolved inside `dir`.
    pub fn with_data_dir(dir: &Path) -> Self {
        let controls = dir.join("controls.csv");
        Self {
            data: DataPaths {
                futures: dir.join("futures.csv"),
                spot: dir.join("spot.csv"),
                ois: dir.join("ois.csv"),
                bonds: dir.join("bonds.csv"),
                bond_quotes: dir.join("bond_quotes.csv"),
                issuers: dir.join("issuers.csv"),
                controls: controls.exists().then_some(controls),
                holidays: None,
            },
            start: None,
            end: None,
            roll_months: 1,
            zindex_variant: ZIndexVariant::Equal,
            winsorize: None,
            frequency: Frequency::Daily,
            ecm_variant: EcmVariant::I,
            ecm_lags: 3,
            hac_bandwidth: None,
            johansen_lags: None,
            johansen_max_lags: 10,
            adf_deterministic: Deterministic::Constant,
            adf_max_lag: None,
            adf_lag_rule: LagRule::Bic,
            pacf_max_lag: 20,
            significance: Level::P95,
            mc_seed: 20130102,
            mc_draws: 500,
            digest: String::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::from_toml_str(&text, base)?;
        cfg.digest = crate::pipeline::sha256_hex(text.as_bytes());
        Ok(cfg)
    }

    /// Parses config text; relative paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let mut flat = Vec::new();
        flatten("", &table, &mut flat);
        let get = |key: &str| flat.iter().find(|(k, _)| k == key).map(|(_, v)| v);
        for (k, _) in &flat {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown config key `{k}`")));
            }
        }

        let data_dir = match get("data.dir") {
            Some(v) => base_dir.join(as_str("data.dir", v)?),
            None => base_dir.to_path_buf(),
        };
        let mut cfg = Self::with_data_dir(&data_dir);
        let path_of = |key: &str, default: &PathBuf| -> Result<PathBuf> {
            Ok(match get(key) {
                Some(v) => data_dir.join(as_str(key, v)?),
                None => default.clone(),
            })
        };
        cfg.data.futures = path_of("data.futures", &cfg.data.futures)?;
        cfg.data.spot = path_of("data.spot", &cfg.data.spot)?;
        cfg.data.ois = path_of("data.ois", &cfg.data.ois)?;
        cfg.data.bonds = path_of("data.bonds", &cfg.data.bonds)?;
        cfg.data.bond_quotes = path_of("data.bond_quotes", &cfg.data.bond_quotes)?;
        cfg.data.issuers = path_of("data.issuers", &cfg.data.issuers)?;
        if let Some(v) = get("data.controls") {
            let s = as_str("data.controls", v)?;
            cfg.data.controls = match s.to_ascii_lowercase().as_str() {
                "" | "none" => None,
                _ => Some(data_dir.join(s)),
            };
        }
        if let Some(v) = get("data.holidays") {
            cfg.data.holidays = Some(data_dir.join(as_str("data.holidays", v)?));
        }
        if let Some(v) = get("window.start") {
            cfg.start = Some(as_date("window.start", v)?);
        }
        if let Some(v) = get("window.end") {
            cfg.end = Some(as_date("window.end", v)?);
        }
        if let (Some(s), Some(e)) = (cfg.start, cfg.end) {
            if s >= e {
                return Err(Error::Config(format!("window.start {s} must precede window.end {e}")));
            }
        }
        if let Some(v) = get("roll.months") {
            cfg.roll_months = as_uint("roll.months", v)? as u32;
        }
        if let Some(v) = get("zindex.variant") {
            cfg.zindex_variant = as_str("zindex.variant", v)?.parse()?;
        }
        if let Some(v) = get("transform.winsorize") {
            cfg.winsorize = match v {
                Value::String(s) if s.eq_ignore_ascii_case("none") => None,
                _ => {
                    let level = as_float("transform.winsorize", v)?;
                    if !(level > 50.0 && level < 100.0) {
                        return Err(Error::Config(format!("transform.winsorize must be in (50, 100), got {level}")));
                    }
                    Some(level)
                }
            };
        }
        if let Some(v) = get("transform.frequency") {
            cfg.frequency = as_str("transform.frequency", v)?.parse()?;
        }
        if let Some(v) = get("ecm.variant") {
            cfg.ecm_variant = as_str("ecm.variant", v)?.parse()?;
        }
        if let Some(v) = get("ecm.lags") {
            cfg.ecm_lags = as_uint("ecm.lags", v)?;
        }
        if let Some(v) = get("ecm.hac_bandwidth") {
            cfg.hac_bandwidth = as_auto_uint("ecm.hac_bandwidth", v)?;
        }
        if let Some(v) = get("johansen.lags") {
            cfg.johansen_lags = as_auto_uint("johansen.lags", v)?;
            if cfg.johansen_lags == Some(0) {
                return Err(Error::Config("johansen.lags must be at least 1".into()));
            }
        }
        if let Some(v) = get("johansen.max_lags") {
            cfg.johansen_max_lags = as_uint("johansen.max_lags", v)?.max(1);
        }
        if let Some(v) = get("adf.deterministic") {
            cfg.adf_deterministic = as_str("adf.deterministic", v)?.parse()?;
        }
        if let Some(v) = get("adf.max_lag") {
            cfg.adf_max_lag = as_auto_uint("adf.max_lag", v)?;
        }
        if let Some(v) = get("adf.lag_rule") {
            cfg.adf_lag_rule = as_str("adf.lag_rule", v)?.parse()?;
        }
        if let Some(v) = get("pacf.max_lag") {
            cfg.pacf_max_lag = as_uint("pacf.max_lag", v)?.max(1);
        }
        if let Some(v) = get("significance") {
            cfg.significance = Level::from_significance(as_float("significance", v)?)?;
        }
        if let Some(v) = get("mc.seed") {
            cfg.mc_seed = as_uint("mc.seed", v)? as u64;
        }
        if let Some(v) = get("mc.draws") {
            cfg.mc_draws = as_uint("mc.draws", v)?;
        }
        Ok(cfg)
    }

    /// Checks that every referenced input exists.
    pub fn check_files(&self) -> Result<()> {
        let d = &self.data;
        let required = [&d.futures, &d.spot, &d.ois, &d.bonds, &d.bond_quotes, &d.issuers];
        for p in required.into_iter().chain(d.controls.iter()).chain(d.holidays.iter()) {
            if !p.is_file() {
                return Err(Error::Config(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

const KNOWN_KEYS: &[&str] = &[
    "data.dir",
    "data.futures",
    "data.spot",
    "data.ois",
    "data.bonds",
    "data.bond_quotes",
    "data.issuers",
    "data.controls",
    "data.holidays",
    "window.start",
    "window.end",
    "roll.months",
    "zindex.variant",
    "transform.winsorize",
    "transform.frequency",
    "ecm.variant",
    "ecm.lags",
    "ecm.hac_bandwidth",
    "johansen.lags",
    "johansen.max_lags",
    "adf.deterministic",
    "adf.max_lag",
    "adf.lag_rule",
    "pacf.max_lag",
    "significance",
    "mc.seed",
    "mc.draws",
];

fn flatten(prefix: &str, table: &Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

fn type_error(key: &str, expected: &str, v: &Value) -> Error {
    Error::Config(format!("`{key}` must be {expected}, got {v}"))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| type_error(key, "a string", v))
}

fn as_uint(key: &str, v: &Value) -> Result<usize> {
    match v.as_integer() {
        Some(i) if i >= 0 => Ok(i as usize),
        _ => Err(type_error(key, "a non-negative integer", v)),
    }
}

fn as_auto_uint(key: &str, v: &Value) -> Result<Option<usize>> {
    match v {
        Value::String(s) if s.eq_ignore_ascii_case("auto") => Ok(None),
        _ => as_uint(key, v).map(Some),
    }
}

fn as_float(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(type_error(key, "a number", v)),
    }
}

fn as_date(key: &str, v: &Value) -> Result<NaiveDate> {
    match v {
        Value::String(s) => parse_date(s).map_err(|e| Error::Config(format!("`{key}`: {e}"))),
        Value::Datetime(d) => parse_date(&d.to_string()).map_err(|e| Error::Config(format!("`{key}`: {e}"))),
        _ => Err(type_error(key, "a date", v)),
    }
}
