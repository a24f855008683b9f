use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cspread::econometrics::fit_ecm;
use cspread::error::{Error, Result, Stage, StageExt};
use cspread::pipeline::report::{self, Cell, OutputFormat, Table};
use cspread::pipeline::{
    build_curves, build_market_series, controlled_sample, load_inputs, prepare, run_pipeline, simulate_market,
    spot_garch, unit_root_tests, write_market, Frequency, PipelineConfig, SimSpec,
};
use cspread::series::align;

#[derive(Parser, Debug)]
#[command(name = "cspread", version, about = "EUA cost-of-carry spread and credit-spread analysis")]
struct Cli {
    /// Pipeline config (TOML). Defaults to ./config.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for `simulate`; recorded in report provenance otherwise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory. Stage tables go to stdout when omitted; `report` defaults to ./report, `simulate` to ./fixture.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bootstrap one OIS discount curve per quote date.
    Bootstrap,
    /// Front-December C-spread series.
    Cspread,
    /// Z-index series for every weighting variant.
    Zindex,
    /// ADF-GLS tests on levels and differences.
    Unitroot,
    /// Johansen test on (C, Z, r).
    Cointegrate,
    /// The configured ECM variant.
    Ecm,
    /// Full pipeline and report.
    Report,
    /// Write a synthetic input bundle.
    Simulate {
        /// Number of business days.
        #[arg(long, default_value_t = 2008)]
        days: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p),
        None if Path::new("config.toml").is_file() => PipelineConfig::load(Path::new("config.toml")),
        None => Ok(PipelineConfig::with_data_dir(Path::new("."))),
    }
    .stage(Stage::Config)?;
    if let Some(seed) = cli.seed {
        cfg.mc_seed = seed;
    }
    Ok(cfg)
}

fn emit(cli: &Cli, tables: &[Table]) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            for t in tables {
                let (ext, body) = match cli.format {
                    Format::Text => ("txt", t.render_text()),
                    Format::Csv => ("csv", t.render_csv()),
                };
                let p = dir.join(format!("{}.{ext}", t.name));
                std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
                println!("wrote {}", p.display());
            }
        }
        None => {
            for t in tables {
                match cli.format {
                    Format::Text => println!("{}", t.render_text()),
                    Format::Csv => print!("{}", t.render_csv()),
                }
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Command::Simulate { days } = cli.command {
        let spec = SimSpec {
            n_days: days,
            seed: cli.seed.unwrap_or(SimSpec::default().seed),
            ..SimSpec::default()
        };
        let market = simulate_market(&spec)?;
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("fixture"));
        let files = write_market(&market, &dir)?;
        println!("wrote {} files to {}", files.len(), dir.display());
        return Ok(());
    }

    let cfg = load_config(cli)?;
    match cli.command {
        Command::Simulate { .. } => unreachable!("handled above"),
        Command::Report => {
            let rep = run_pipeline(&cfg)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("report"));
            let files = rep.write(&dir, cli.format.into()).stage(Stage::Report)?;
            println!("wrote {} files to {}", files.len(), dir.display());
            Ok(())
        }
        Command::Bootstrap => {
            let data = load_inputs(&cfg)?;
            let curves = build_curves(&data)?;
            let mut t = Table::new(
                "curves",
                "Bootstrapped OIS discount curves",
                vec!["maturity".into(), "discount_factor".into(), "zero_rate".into()],
            );
            for (d, c) in &curves {
                for (m, df) in c.pillars() {
                    let z = c.zero_rate(*d, *m)?;
                    t.push(d.to_string(), vec![Cell::text(m.to_string()), Cell::num(*df, 10), Cell::pct(z, 4)]);
                }
            }
            emit(cli, &[t])
        }
        Command::Cspread => {
            let data = load_inputs(&cfg)?;
            let ms = build_market_series(&cfg, &data)?;
            let mut t = Table::new(
                "cspread",
                "C-spread on the front December contract",
                vec!["contract".into(), "ttm".into(), "C".into()],
            );
            for p in &ms.c_points {
                t.push(
                    p.date.to_string(),
                    vec![Cell::text(p.contract_id.clone()), Cell::num(p.ttm, 4), Cell::pct(p.c_spread, 4)],
                );
            }
            emit(cli, &[t])
        }
        Command::Zindex => {
            let data = load_inputs(&cfg)?;
            let ms = build_market_series(&cfg, &data)?;
            let series: Vec<_> = ms.z.iter().map(|(v, s)| s.clone().with_label(v.to_string())).collect();
            let refs: Vec<_> = series.iter().collect();
            let a = align(&refs)?;
            let mut t = Table::new("zindex", "Z-index by weighting variant", a.labels.clone());
            for (i, d) in a.dates.iter().enumerate() {
                t.push(d.to_string(), (0..a.labels.len()).map(|j| Cell::pct(a.data[(i, j)], 4)).collect());
            }
            t.notes.push(format!("Configured variant: {}", cfg.zindex_variant));
            emit(cli, &[t])
        }
        Command::Unitroot => {
            let data = load_inputs(&cfg)?;
            let ms = build_market_series(&cfg, &data)?;
            let p = prepare(&cfg, &ms, cfg.zindex_variant, cfg.frequency, cfg.winsorize)?;
            let ur = unit_root_tests(&cfg, &p)?;
            let rows: Vec<_> = ur.iter().map(|(l, r)| (l.as_str(), *r)).collect();
            emit(cli, &[report::unit_root_table(&rows)])
        }
        Command::Cointegrate => {
            let data = load_inputs(&cfg)?;
            let ms = build_market_series(&cfg, &data)?;
            let p = prepare(&cfg, &ms, cfg.zindex_variant, cfg.frequency, cfg.winsorize)?;
            emit(cli, &[report::johansen_table(&p.johansen, &["C", "Z", "r"])])
        }
        Command::Ecm => {
            let data = load_inputs(&cfg)?;
            let ms = build_market_series(&cfg, &data)?;
            let p = prepare(&cfg, &ms, cfg.zindex_variant, cfg.frequency, cfg.winsorize)?;
            let v = cfg.ecm_variant;
            let fit = if v.needs_controls() {
                if cfg.frequency == Frequency::Weekly {
                    return Err(Error::Config(format!("ECM variant {v} is only available at daily frequency")));
                }
                let controls = data
                    .controls
                    .as_ref()
                    .ok_or_else(|| Error::Config(format!("ECM variant {v} needs data.controls")))?;
                let garch = spot_garch(&ms.spot, p.c.dates()).stage(Stage::Garch)?;
                let cs = controlled_sample(&p, controls, &garch.conditional_vol).stage(Stage::Ecm)?;
                fit_ecm(&cs.ecm_data(), cfg.ecm_lags, v, cfg.hac_bandwidth)
            } else {
                fit_ecm(&p.ecm_data(None), cfg.ecm_lags, v, cfg.hac_bandwidth)
            }
            .stage(Stage::Ecm)?;
            let col = format!("({v})");
            let title = format!("Error correction model {col}, {}", cfg.frequency);
            let mut t = report::ecm_table("ecm", &title, &[(col, &fit)]);
            let (g1, g2) = p.gamma();
            t.notes.push(format!(
                "Two-step estimation: psi = C - {g1:.4} Z - {g2:.4} r from Johansen, frozen before OLS."
            ));
            emit(cli, &[t])
        }
    }
}
