//! Report tables and their text and CSV renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::econometrics::{significance_stars, EcmFit, GarchFit, JohansenResult, UnitRootResult};
use crate::error::{Error, Result};
use crate::series::{PacfResult, PearsonResult, SummaryStats, TradingDaySeries};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Text(String),
    Int(i64),
    Num { value: f64, decimals: usize },
    /// A fraction shown as a percentage.
    Pct { value: f64, decimals: usize },
    /// A p-value shown as a percentage; at or below 0.1% it prints `<0.1%`.
    PValue(f64),
    /// Coefficient over its parenthesized standard error, starred by p.
    Coef { estimate: f64, std_error: f64, p_value: f64 },
    /// Correlation starred by its p-value.
    Corr { r: f64, p_value: f64 },
    /// Test statistic starred against its critical values.
    Stat { value: f64, decimals: usize, stars: &'static str },
}

impl Cell {
    pub fn num(value: f64, decimals: usize) -> Self {
        Cell::Num { value, decimals }
    }

    pub fn pct(value: f64, decimals: usize) -> Self {
        Cell::Pct { value, decimals }
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn is_paired(&self) -> bool {
        matches!(self, Cell::Coef { .. } | Cell::Corr { .. })
    }

    /// Primary text line.
    pub fn display(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num { value, decimals } => format!("{value:.decimals$}"),
            Cell::Pct { value, decimals } => format!("{:.decimals$}%", value * 100.0),
            Cell::PValue(p) => format_p_value(*p),
            Cell::Coef { estimate, p_value, .. } => format!("{estimate:.2}{}", significance_stars(*p_value)),
            Cell::Corr { r, p_value } => format!("{r:.2}{}", significance_stars(*p_value)),
            Cell::Stat { value, decimals, stars } => format!("{value:.decimals$}{stars}"),
        }
    }

    /// Second text line for paired cells: `(se)` under a coefficient.
    fn display_second(&self) -> String {
        match self {
            Cell::Coef { std_error, .. } => format!("({std_error:.2})"),
            Cell::Corr { p_value, .. } => format!("({})", format_p_value(*p_value)),
            _ => String::new(),
        }
    }

    /// Full-precision CSV fields: (value, second, stars).
    fn csv_fields(&self) -> (String, String, String) {
        match self {
            Cell::Empty => (String::new(), String::new(), String::new()),
            Cell::Text(s) => (s.clone(), String::new(), String::new()),
            Cell::Int(i) => (i.to_string(), String::new(), String::new()),
            Cell::Num { value, .. } | Cell::Pct { value, .. } => (value.to_string(), String::new(), String::new()),
            Cell::PValue(p) => (p.to_string(), String::new(), String::new()),
            Cell::Coef {
                estimate,
                std_error,
                p_value,
            } => (estimate.to_string(), std_error.to_string(), significance_stars(*p_value).into()),
            Cell::Corr { r, p_value } => (r.to_string(), p_value.to_string(), significance_stars(*p_value).into()),
            Cell::Stat { value, stars, .. } => (value.to_string(), String::new(), (*stars).into()),
        }
    }
}

/// `<0.1%` at or below one in a thousand, otherwise one decimal percent.
pub fn format_p_value(p: f64) -> String {
    if p <= 0.001 {
        "<0.1%".into()
    } else {
        format!("{:.1}%", p * 100.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem in the CSV bundle.
    pub name: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(name: impl Into<String>, title: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            name: name.into(),
            title: title.into(),
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(TableRow {
            label: label.into(),
            cells,
        });
    }

    pub fn cell(&self, row: &str, column: &str) -> Option<&Cell> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.rows.iter().find(|r| r.label == row).map(|r| &r.cells[j])
    }

    pub fn render_text(&self) -> String {
        let mut lines: Vec<Vec<String>> = Vec::new();
        let mut header = vec![String::new()];
        header.extend(self.columns.iter().cloned());
        lines.push(header);
        for row in &self.rows {
            let mut first = vec![row.label.clone()];
            first.extend(row.cells.iter().map(Cell::display));
            lines.push(first);
            if row.cells.iter().any(Cell::is_paired) {
                let mut second = vec![String::new()];
                second.extend(row.cells.iter().map(Cell::display_second));
                lines.push(second);
            }
        }
        let ncol = self.columns.len() + 1;
        let widths: Vec<usize> = (0..ncol)
            .map(|j| lines.iter().map(|l| l[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * (ncol - 1));
        let _ = writeln!(out, "{rule}");
        for (i, l) in lines.iter().enumerate() {
            let mut s = format!("{:<w$}", l[0], w = widths[0]);
            for j in 1..ncol {
                let _ = write!(s, "  {:>w$}", l[j], w = widths[j]);
            }
            let _ = writeln!(out, "{}", s.trim_end());
            if i == 0 {
                let _ = writeln!(out, "{rule}");
            }
        }
        let _ = writeln!(out, "{rule}");
        for n in &self.notes {
            let _ = writeln!(out, "{n}");
        }
        out
    }

    /// `row,kind,<columns>`. Paired cells expand into `estimate`, then
    /// `std_error` or `p_value`, then `stars` rows.
    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        let mut header = vec!["row".to_string(), "kind".to_string()];
        header.extend(self.columns.iter().cloned());
        push_csv_line(&mut out, &header);
        for row in &self.rows {
            let fields: Vec<(String, String, String)> = row.cells.iter().map(Cell::csv_fields).collect();
            if row.cells.iter().any(Cell::is_paired) {
                let second = if row.cells.iter().any(|c| matches!(c, Cell::Corr { .. })) {
                    "p_value"
                } else {
                    "std_error"
                };
                for (kind, pick) in [("estimate", 0), (second, 1), ("stars", 2)] {
                    let mut line = vec![row.label.clone(), kind.to_string()];
                    line.extend(fields.iter().map(|f| match pick {
                        0 => f.0.clone(),
                        1 => f.1.clone(),
                        _ => f.2.clone(),
                    }));
                    push_csv_line(&mut out, &line);
                }
            } else {
                let mut line = vec![row.label.clone(), "value".to_string()];
                line.extend(fields.into_iter().map(|f| f.0));
                push_csv_line(&mut out, &line);
            }
        }
        out
    }
}

fn push_csv_line(out: &mut String, fields: &[String]) {
    let escaped: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect();
    out.push_str(&escaped.join(","));
    out.push('\n');
}

/// A plot-ready series: dated levels or PACF by lag.
#[derive(Debug, Clone, PartialEq)]
pub enum Figure {
    Dated { name: String, series: TradingDaySeries },
    Pacf { name: String, pacf: PacfResult },
}

impl Figure {
    pub fn name(&self) -> &str {
        match self {
            Figure::Dated { name, .. } | Figure::Pacf { name, .. } => name,
        }
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Figure::Dated { series, .. } => {
                out.push_str("date,value\n");
                for (d, v) in series.iter() {
                    let _ = writeln!(out, "{d},{v}");
                }
            }
            Figure::Pacf { pacf, .. } => {
                out.push_str("lag,value\n");
                for (l, v) in pacf.lags.iter().zip(&pacf.coefficients) {
                    let _ = writeln!(out, "{l},{v}");
                }
            }
        }
        out
    }

    fn summary(&self) -> String {
        match self {
            Figure::Dated { name, series } => format!("{name}: {} dated points", series.len()),
            Figure::Pacf { name, pacf } => {
                let sig: Vec<String> = pacf.significant_lags().iter().map(|l| l.to_string()).collect();
                format!(
                    "{name}: {} lags, band +/-{:.3}, significant lags [{}]",
                    pacf.lags.len(),
                    pacf.confidence_bound,
                    sig.join(", ")
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_sha256: String,
    /// (file name, sha256) in a fixed order.
    pub inputs: Vec<(String, String)>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Run metadata as key-value pairs.
    pub header: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub figures: Vec<Figure>,
    /// (table, reason) for every table left out.
    pub omitted: Vec<(String, String)>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(OutputFormat::Text),
            "csv" | "csv-bundle" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown format `{other}` (expected text or csv)"))),
        }
    }
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Metadata, omissions and provenance as one key-value table.
    pub fn provenance_table(&self) -> Table {
        let mut t = Table::new("provenance", "Run metadata and provenance", vec!["value".into()]);
        for (k, v) in &self.header {
            t.push(k.clone(), vec![Cell::text(v.clone())]);
        }
        for (name, reason) in &self.omitted {
            t.push(format!("omitted.{name}"), vec![Cell::text(reason.clone())]);
        }
        t.push("seed", vec![Cell::Int(self.provenance.seed as i64)]);
        t.push("config.sha256", vec![Cell::text(self.provenance.config_sha256.clone())]);
        for (f, h) in &self.provenance.inputs {
            t.push(format!("input.{f}.sha256"), vec![Cell::text(h.clone())]);
        }
        t
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tables {
            out.push_str(&t.render_text());
            out.push('\n');
        }
        for (name, reason) in &self.omitted {
            let _ = writeln!(out, "{name} omitted: {reason}");
        }
        if !self.omitted.is_empty() {
            out.push('\n');
        }
        out.push_str("Figure series\n");
        for f in &self.figures {
            let _ = writeln!(out, "  {}", f.summary());
        }
        out.push('\n');
        out.push_str(&self.provenance_table().render_text());
        out
    }

    /// Number of files [`Report::write`] emits in CSV mode.
    pub fn csv_file_count(&self) -> usize {
        self.tables.len() + 1 + self.figures.len()
    }

    /// Writes `report.txt`, or one CSV per table (provenance included) and
    /// per figure series.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files: Vec<(String, String)> = Vec::new();
        match format {
            OutputFormat::Text => files.push(("report.txt".into(), self.render_text())),
            OutputFormat::Csv => {
                for t in self.tables.iter().chain(std::iter::once(&self.provenance_table())) {
                    files.push((format!("{}.csv", t.name), t.render_csv()));
                }
                for f in &self.figures {
                    files.push((format!("{}.csv", f.name()), f.render_csv()));
                }
            }
        }
        files
            .into_iter()
            .map(|(name, body)| {
                let p = dir.join(name);
                fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
                Ok(p)
            })
            .collect()
    }
}

pub fn descriptive_table(rows: &[(&str, SummaryStats)]) -> Table {
    let mut t = Table::new(
        "table2_descriptive",
        "Descriptive statistics (levels)",
        vec!["Mean".into(), "Std. dev.".into(), "Obs.".into()],
    );
    for (label, s) in rows {
        t.push(*label, vec![Cell::pct(s.mean, 2), Cell::pct(s.std_dev, 2), Cell::Int(s.n_obs as i64)]);
    }
    t
}

pub fn unit_root_table(rows: &[(&str, UnitRootResult)]) -> Table {
    let det = rows.first().map(|(_, r)| r.deterministic.to_string()).unwrap_or_default();
    let mut t = Table::new(
        "unit_root",
        "ADF-GLS unit-root tests",
        vec!["p-value".into(), "Statistic".into(), "Lags".into(), "Obs.".into()],
    );
    for (label, r) in rows {
        t.push(
            *label,
            vec![
                Cell::PValue(r.p_value),
                Cell::num(r.statistic, 2),
                Cell::Int(r.lags_used as i64),
                Cell::Int(r.n_obs as i64),
            ],
        );
    }
    t.notes.push(format!("Deterministic terms: {det}. Null hypothesis: unit root."));
    t
}

pub fn johansen_table(j: &JohansenResult, labels: &[&str]) -> Table {
    let mut t = Table::new(
        "table3_johansen",
        "Johansen cointegration test (no deterministic terms)",
        [
            "Trace",
            "Max-eig",
            "Trace 90%",
            "Trace 95%",
            "Trace 99%",
            "Max-eig 90%",
            "Max-eig 95%",
            "Max-eig 99%",
            "Eigenvalue",
        ]
        .map(String::from)
        .to_vec(),
    );
    for q in 0..j.trace_stats.len() {
        let tc = j.trace_critical[q];
        let ec = j.eigen_critical[q];
        t.push(
            format!("q <= {q}"),
            vec![
                Cell::Stat { value: j.trace_stats[q], decimals: 1, stars: critical_stars(j.trace_stats[q], tc) },
                Cell::Stat { value: j.eigen_stats[q], decimals: 1, stars: critical_stars(j.eigen_stats[q], ec) },
                Cell::num(tc[0], 1),
                Cell::num(tc[1], 1),
                Cell::num(tc[2], 1),
                Cell::num(ec[0], 1),
                Cell::num(ec[1], 1),
                Cell::num(ec[2], 1),
                Cell::num(j.eigenvalues[q], 4),
            ],
        );
    }
    let v = j.leading_vector();
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    t.notes.push(format!(
        "Selected rank at {}: {}. VAR order k = {}, {} observations.",
        j.level, j.selected_rank, j.k_ar, j.n_obs
    ));
    t.notes.push(format!("Leading cointegration vector on ({}): {{{}}}", labels.join(", "), parts.join(", ")));
    t
}

/// Stars for a statistic exceeding its [90, 95, 99]% critical values.
pub fn critical_stars(stat: f64, cv: [f64; 3]) -> &'static str {
    if stat > cv[2] {
        "***"
    } else if stat > cv[1] {
        "**"
    } else if stat > cv[0] {
        "*"
    } else {
        ""
    }
}

/// Lower-triangular correlation matrix, p-values in parentheses.
pub fn correlation_table(labels: &[&str], pairs: &dyn Fn(usize, usize) -> Option<PearsonResult>) -> Table {
    let mut t = Table::new(
        "table4_correlations",
        "Pearson correlations of the control variables",
        labels.iter().map(|s| s.to_string()).collect(),
    );
    for (i, row) in labels.iter().enumerate() {
        let cells = (0..labels.len())
            .map(|j| {
                if j > i {
                    Cell::Empty
                } else if j == i {
                    Cell::num(1.0, 2)
                } else {
                    pairs(i, j).map_or(Cell::Empty, |p| Cell::Corr {
                        r: p.r,
                        p_value: p.p_value,
                    })
                }
            })
            .collect();
        t.push(*row, cells);
    }
    t
}

/// ECM coefficient table with one column per fit, rows in display order.
pub fn ecm_table(name: &str, title: &str, fits: &[(String, &EcmFit)]) -> Table {
    let max_lags = fits.iter().map(|(_, f)| f.n_lags).max().unwrap_or(0);
    let mut t = Table::new(name, title, fits.iter().map(|(c, _)| c.clone()).collect());
    for term in crate::econometrics::ecm::term_order(max_lags) {
        if !fits.iter().any(|(_, f)| f.term(&term).is_some()) {
            continue;
        }
        let cells = fits
            .iter()
            .map(|(_, f)| {
                f.term(&term).map_or(Cell::Empty, |x| Cell::Coef {
                    estimate: x.estimate,
                    std_error: x.std_error,
                    p_value: x.p_value,
                })
            })
            .collect();
        t.push(term, cells);
    }
    t.push("Obs.", fits.iter().map(|(_, f)| Cell::Int(f.n_obs as i64)).collect());
    t.push("BIC", fits.iter().map(|(_, f)| Cell::num(f.bic, 1)).collect());
    t.push("AIC", fits.iter().map(|(_, f)| Cell::num(f.aic, 1)).collect());
    let bw: Vec<String> = fits.iter().map(|(_, f)| f.hac_bandwidth.to_string()).collect();
    t.notes.push(format!(
        "Newey-West standard errors in parentheses (Bartlett bandwidth {}). * p<0.10, ** p<0.05, *** p<0.01.",
        bw.join("/")
    ));
    t
}

pub fn garch_table(fit: &GarchFit) -> Table {
    let mut t = Table::new(
        "garch",
        "GARCH(1,1) on spot log-returns",
        vec!["Estimate".into(), "Std. error".into()],
    );
    let se = fit.std_errors;
    for (i, (label, v)) in [("omega", fit.omega), ("alpha", fit.alpha), ("beta", fit.beta)].into_iter().enumerate() {
        let digits = if i == 0 { 10 } else { 4 };
        t.push(
            label,
            vec![
                Cell::num(v, digits),
                se.map_or(Cell::text("n/a"), |s| Cell::num(s[i], digits)),
            ],
        );
    }
    t.push("alpha + beta", vec![Cell::num(fit.persistence(), 4), Cell::Empty]);
    t.push("log-likelihood", vec![Cell::num(fit.log_likelihood, 2), Cell::Empty]);
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_cell_convention() {
        let c = Cell::Coef {
            estimate: -0.33,
            std_error: 0.06,
            p_value: 0.0001,
        };
        assert_eq!(c.display(), "-0.33***");
        assert_eq!(c.display_second(), "(0.06)");
        let c = Cell::Coef {
            estimate: -0.03,
            std_error: 0.08,
            p_value: 0.7,
        };
        assert_eq!(c.display(), "-0.03");
        assert_eq!(c.display_second(), "(0.08)");
    }

    #[test]
    fn p_value_formatting() {
        assert_eq!(format_p_value(0.0004), "<0.1%");
        assert_eq!(format_p_value(0.001), "<0.1%");
        assert_eq!(format_p_value(0.0234), "2.3%");
        assert_eq!(format_p_value(0.999), "99.9%");
    }

    #[test]
    fn text_rendering_puts_errors_under_estimates() {
        let mut t = Table::new("t", "Title", vec!["(I)".into(), "(II)".into()]);
        t.push(
            "dC(t-1)",
            vec![
                Cell::Coef {
                    estimate: -0.33,
                    std_error: 0.06,
                    p_value: 0.0,
                },
                Cell::Empty,
            ],
        );
        t.push("Obs.", vec![Cell::Int(2004), Cell::Int(2004)]);
        let text = t.render_text();
        let lines: Vec<&str> = text.lines().collect();
        let est = lines.iter().position(|l| l.starts_with("dC(t-1)")).unwrap();
        assert!(lines[est].contains("-0.33***"));
        assert!(lines[est + 1].contains("(0.06)"));
        assert!(lines[est + 1].trim_start().starts_with('('));
    }

    #[test]
    fn csv_expands_paired_rows() {
        let mut t = Table::new("t", "Title", vec!["(I)".into()]);
        t.push(
            "psi(t-1)",
            vec![Cell::Coef {
                estimate: -0.02,
                std_error: 0.005,
                p_value: 0.0001,
            }],
        );
        t.push("note, with comma", vec![Cell::text("a\"b")]);
        let csv = t.render_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "row,kind,(I)");
        assert_eq!(lines[1], "psi(t-1),estimate,-0.02");
        assert_eq!(lines[2], "psi(t-1),std_error,0.005");
        assert_eq!(lines[3], "psi(t-1),stars,***");
        assert_eq!(lines[4], "\"note, with comma\",value,\"a\"\"b\"");
    }
}
