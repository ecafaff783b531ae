//! Command-line frontend: JSON experiment configs in, CSV/JSON/SVG reports out.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure or a row
//! whose codifference exceeds its bound, 3 malformed config or I/O failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::bounds::{
    control_bound, levy_bound, poisson_rate, poisson_shift_bound, stable_shift_bound, temp_bound, temp_rate,
    temp_shift_bound, BoundKind, Cutoff,
};
use crate::codiff::{codiff_equal, codiff_notequal, exact_in, fit_decay, ExpSeriesObservable, FitResult};
use crate::error::Error;
use crate::mc::{estimate_codiff_equal, estimate_in, RngSpec};
use crate::measures::{Family, MeasureSpec, SeqSpec};
use crate::mixing::mixing_verdict;
use crate::seqspace::{dual_norm, DualFunctional};
use crate::shifts::{Direction, WeightedShiftOperator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "MIXRATE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "mixrate",
    version,
    about = "Codifference decay, bounds and Monte Carlo checks for weighted shifts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; falls back to $MIXRATE_OUT_DIR, then ./out.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Overrides the config's n_max.
    #[arg(long, global = true)]
    pub n_max: Option<u32>,
    /// Overrides the Monte Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Check the measure, operator, probes and observables.
    Validate,
    /// Exact codifferences along the probe orbits.
    Codiff,
    /// Codifferences with their pointwise bounds.
    Bound,
    /// Explicit rate formulas for n = 1..n_max.
    RateTable,
    /// Codifferences against Monte Carlo estimates.
    Mc,
    /// Exact and Monte Carlo I_n(f, g).
    SeriesIn,
    /// Mixing verdict from codifference decay.
    MixingVerdict,
}

impl Command {
    fn slug(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Codiff => "codiff",
            Command::Bound => "bound",
            Command::RateTable => "rate-table",
            Command::Mc => "mc",
            Command::SeriesIn => "series-in",
            Command::MixingVerdict => "mixing-verdict",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesInConfig {
    pub f: ExpSeriesObservable,
    pub g: ExpSeriesObservable,
}

/// Output file names, relative to the output directory.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<String>,
    pub json: Option<String>,
    pub svg: Option<String>,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_tolerance() -> f64 {
    1e-3
}

fn default_epsilon() -> f64 {
    0.5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub measure: MeasureSpec,
    pub operator: WeightedShiftOperator,
    #[serde(default)]
    pub probes: Vec<DualFunctional>,
    pub n_max: u32,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// ε of the rate formulas for power-law exponents `γ ≥ 2`.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub mc: Option<McConfig>,
    #[serde(default)]
    pub series_in: Option<SeriesInConfig>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("line {}, column {}: {e}", e.line(), e.column()))
    }

    /// Every problem found, in a stable order.
    pub fn validate(&self) -> Vec<String> {
        let mut failures = self.measure.validate().failures;
        if let Err(e) = self.operator.validate() {
            failures.push(format!("operator: {e}"));
        }
        if let Some(d) = self.operator.domain() {
            if d != self.measure.domain() {
                failures.push(format!(
                    "operator acts on {d}, measure lives on {}",
                    self.measure.domain()
                ));
            }
        }
        if self.n_max < 1 {
            failures.push("n_max must be at least 1".into());
        }
        if !(self.tolerance > 0.0) {
            failures.push(format!("tolerance must be positive, got {}", self.tolerance));
        }
        for (i, f) in self.probes.iter().enumerate() {
            if f.domain() != self.measure.domain() {
                failures.push(format!(
                    "probe {i} lives on {}, measure on {}",
                    f.domain(),
                    self.measure.domain()
                ));
            }
        }
        if let Some(s) = &self.series_in {
            for (name, obs) in [("f", &s.f), ("g", &s.g)] {
                if let Err(e) = obs.validate(&self.operator, self.measure.p()) {
                    failures.push(format!("series_in.{name}: {e}"));
                }
            }
        }
        if let Some(mc) = &self.mc {
            if mc.samples < crate::mc::MIN_SAMPLES {
                failures.push(format!("mc.samples must be at least {}", crate::mc::MIN_SAMPLES));
            }
        }
        failures
    }
}

/// One row of a decay report. Missing entries are `NaN`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub n: u32,
    pub codiff_eq: Complex64,
    pub codiff_neq: Complex64,
    pub bound: f64,
    pub rate_formula: f64,
    pub mc_value: f64,
    pub mc_stderr: f64,
}

impl Row {
    fn empty(n: u32) -> Self {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        Row {
            n,
            codiff_eq: nan,
            codiff_neq: nan,
            bound: f64::NAN,
            rate_formula: f64::NAN,
            mc_value: f64::NAN,
            mc_stderr: f64::NAN,
        }
    }

    fn fields(&self) -> [f64; 8] {
        [
            self.codiff_eq.re,
            self.codiff_eq.im,
            self.codiff_neq.re,
            self.codiff_neq.im,
            self.bound,
            self.rate_formula,
            self.mc_value,
            self.mc_stderr,
        ]
    }
}

pub const CSV_HEADER: &str =
    "n,codiff_eq_re,codiff_eq_im,codiff_neq_re,codiff_neq_im,bound,rate_formula,mc_value,mc_stderr";

/// Fixed scientific formatting with 17 significant digits; empty for `NaN`.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

fn json_float(v: f64) -> Box<RawValue> {
    let s = if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    };
    RawValue::from_string(s).expect("formatted float is valid JSON")
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{}", r.n);
        for v in r.fields() {
            out.push(',');
            out.push_str(&fmt_float(v));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonRow {
    n: u32,
    codiff_eq_re: Box<RawValue>,
    codiff_eq_im: Box<RawValue>,
    codiff_neq_re: Box<RawValue>,
    codiff_neq_im: Box<RawValue>,
    bound: Box<RawValue>,
    rate_formula: Box<RawValue>,
    mc_value: Box<RawValue>,
    mc_stderr: Box<RawValue>,
}

impl From<&Row> for JsonRow {
    fn from(r: &Row) -> Self {
        let [a, b, c, d, e, f, g, h] = r.fields().map(json_float);
        JsonRow {
            n: r.n,
            codiff_eq_re: a,
            codiff_eq_im: b,
            codiff_neq_re: c,
            codiff_neq_im: d,
            bound: e,
            rate_formula: f,
            mc_value: g,
            mc_stderr: h,
        }
    }
}

#[derive(Serialize)]
struct ProbeTable {
    probe: DualFunctional,
    rows: Vec<JsonRow>,
    fit: Option<FitResult>,
}

/// Log-y line chart with one polyline per series; non-positive points are skipped.
pub fn svg_chart(title: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .filter(|(_, y)| *y > 0.0 && y.is_finite())
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="20" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    );
    if pts.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (xmin, xmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (ymin, ymax) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
        (a.min(p.1.log10()), b.max(p.1.log10()))
    });
    let (ymin, ymax) = (ymin.floor(), ymax.ceil().max(ymin.floor() + 1.0));
    let xspan = (xmax - xmin).max(1.0);
    let sx = |x: f64| PAD + (x - xmin) / xspan * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y.log10() - ymin) / (ymax - ymin) * (H - 2.0 * PAD);
    let _ = writeln!(
        out,
        r#"<polyline points="{PAD},{PAD} {PAD},{b} {r},{b}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let decades = (ymax - ymin) as i64;
    let step = (decades / 8).max(1);
    for d in (0..=decades).step_by(step as usize) {
        let e = ymin as i64 + d;
        let y = sy(10f64.powi(e as i32));
        let _ = writeln!(
            out,
            r#"<text x="4" y="{:.1}" font-family="sans-serif" font-size="10">1e{e}</text>"#,
            y + 3.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10">n = {xmin}..{xmax}</text>"#,
        W / 2.0 - 30.0,
        H - PAD + 20.0
    );
    for (i, (label, s)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = s
            .iter()
            .filter(|(_, y)| *y > 0.0 && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if coords.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            W - PAD - 120.0,
            PAD + 14.0 * i as f64,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::DomainMismatch(_) | Error::NegativeIndex(_) | Error::Unsupported(_) => {
                EXIT_INVALID
            }
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: format!("{}: {e}", path.display()),
    }
}

/// Pointwise bound on `max(|C^=|, |C^≠|)` at `(x, y)`, with `y = T*ⁿx`.
fn row_bound(cfg: &ExperimentConfig, x: &DualFunctional, y: &DualFunctional, n: u32) -> crate::Result<f64> {
    let m = &cfg.measure;
    let p = m.p();
    let both = |f: &dyn Fn(BoundKind) -> crate::Result<f64>| -> crate::Result<f64> {
        Ok(f(BoundKind::Equal)?.max(f(BoundKind::NotEqual)?))
    };
    match &m.family {
        Family::CompoundPoisson { .. } => both(&|k| levy_bound(m, x, y, p, k)),
        Family::SymmetricAlphaStable { alpha, .. } => {
            if p <= *alpha {
                return Ok(f64::NAN);
            }
            let cutoff = match cfg.operator.rate_params() {
                Ok(rate) if cfg.operator.direction == Direction::ForwardZ => {
                    let norms = dual_norm(x, f64::INFINITY)? * dual_norm(x, f64::INFINITY)?;
                    let b = rate.eta_plus.powf(p / 2.0);
                    let a = rate.eta_minus.powf(alpha - p / 2.0);
                    if b == a {
                        Cutoff::Auto
                    } else {
                        Cutoff::Schedule { rate, n, norms }
                    }
                }
                _ => Cutoff::Auto,
            };
            both(&|k| control_bound(m, x, y, p, cutoff, k))
        }
        Family::TemperedStable { .. } => both(&|k| temp_bound(m, x, y, k)),
    }
}

/// Explicit rate formula at `n`, normalized to unit probes; `NaN` where none applies.
fn rate_formula(cfg: &ExperimentConfig, n: u32) -> crate::Result<f64> {
    let m = &cfg.measure;
    let p = m.p();
    let power_law = |s: &SeqSpec| match s {
        SeqSpec::PowerLaw { lambda0, gamma, p: sp } => Some((*lambda0, gamma * p / sp)),
        _ => None,
    };
    let nu = n as u64;
    match &m.family {
        Family::CompoundPoisson { lambda, .. } => match power_law(lambda) {
            Some(_) if n == 0 => Ok(f64::NAN),
            Some((l0, g)) => poisson_rate(l0, g, p, nu, cfg.epsilon),
            None => poisson_shift_bound(lambda, p, nu),
        },
        Family::SymmetricAlphaStable { .. } => match stable_shift_bound(m, &cfg.operator, n) {
            Ok(v) => Ok(v),
            Err(Error::Unsupported(_)) => Ok(f64::NAN),
            Err(e) => Err(e),
        },
        Family::TemperedStable { k, .. } => {
            let law = m.tempered_law()?.expect("tempered family");
            match power_law(k) {
                Some(_) if n == 0 => Ok(f64::NAN),
                Some((k0, g)) => temp_rate(k0, g, p, nu, cfg.epsilon, &law),
                None => temp_shift_bound(k, &law, p, nu),
            }
        }
    }
}

struct Columns {
    codiff: bool,
    bound: bool,
    rate: bool,
    mc: bool,
}

fn probe_rows(cfg: &ExperimentConfig, x: &DualFunctional, cols: &Columns, first_n: u32) -> Result<Vec<Row>, Failure> {
    let mut rows = Vec::with_capacity(cfg.n_max as usize + 1);
    for n in first_n..=cfg.n_max {
        let mut row = Row::empty(n);
        let y = cfg.operator.adjoint_power(n, x)?;
        if cols.codiff {
            row.codiff_eq = codiff_equal(&cfg.measure, x, &y)?.value;
            row.codiff_neq = codiff_notequal(&cfg.measure, x, &y)?.value;
        }
        if cols.bound {
            row.bound = row_bound(cfg, x, &y, n)?;
            let worst = row.codiff_eq.norm().max(row.codiff_neq.norm());
            if worst > row.bound * (1.0 + 1e-12) + 1e-300 {
                return Err(Failure {
                    code: EXIT_NUMERICAL,
                    message: format!("n = {n}: |codifference| = {worst:e} exceeds the bound {:e}", row.bound),
                });
            }
        }
        if cols.rate {
            row.rate_formula = rate_formula(cfg, n)?;
        }
        if cols.mc {
            let mc = cfg.mc.as_ref().ok_or_else(|| Failure {
                code: EXIT_INVALID,
                message: "the mc command needs an \"mc\" section in the config".into(),
            })?;
            let est = estimate_codiff_equal(&cfg.measure, x, &y, mc.samples, RngSpec::new(mc.seed, mc.stream))?;
            row.mc_value = est.value.re;
            row.mc_stderr = est.stderr;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Outputs written by a command, as `(file name, contents)`.
#[derive(Debug)]
pub struct Report {
    pub stdout: String,
    pub files: Vec<(String, String)>,
}

fn output_names(cfg: &ExperimentConfig, cmd: Command) -> (String, String, String) {
    let stem = format!("{}_{}", cfg.name, cmd.slug());
    (
        cfg.outputs.csv.clone().unwrap_or_else(|| format!("{stem}.csv")),
        cfg.outputs.json.clone().unwrap_or_else(|| format!("{stem}.json")),
        cfg.outputs.svg.clone().unwrap_or_else(|| format!("{stem}.svg")),
    )
}

/// Inserts `_probe{i}` before the extension for probes after the first.
fn probe_file(name: &str, i: usize) -> String {
    if i == 0 {
        return name.to_string();
    }
    match name.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_probe{i}.{ext}"),
        None => format!("{name}_probe{i}"),
    }
}

fn table_command(cfg: &ExperimentConfig, cmd: Command) -> Result<Report, Failure> {
    let cols = match cmd {
        Command::Codiff => Columns {
            codiff: true,
            bound: false,
            rate: false,
            mc: false,
        },
        Command::Bound => Columns {
            codiff: true,
            bound: true,
            rate: true,
            mc: false,
        },
        Command::RateTable => Columns {
            codiff: false,
            bound: false,
            rate: true,
            mc: false,
        },
        _ => Columns {
            codiff: true,
            bound: false,
            rate: false,
            mc: true,
        },
    };
    let (csv_name, json_name, svg_name) = output_names(cfg, cmd);
    let mut files = Vec::new();
    let mut tables = Vec::new();
    let probes: Vec<DualFunctional> = if cmd == Command::RateTable {
        vec![DualFunctional::zero(cfg.measure.domain())]
    } else if cfg.probes.is_empty() {
        return Err(Failure {
            code: EXIT_INVALID,
            message: "no probes in the config".into(),
        });
    } else {
        cfg.probes.clone()
    };
    let first_n = if cmd == Command::RateTable { 1 } else { 0 };
    for (i, x) in probes.iter().enumerate() {
        let rows = probe_rows(cfg, x, &cols, first_n)?;
        files.push((probe_file(&csv_name, i), rows_to_csv(&rows)));
        let decay: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.n as f64, r.codiff_eq.norm().max(r.codiff_neq.norm())))
            .collect();
        let fit = if cols.codiff { fit_decay(&decay).ok() } else { None };
        let mut series: Vec<(&str, Vec<(f64, f64)>)> = Vec::new();
        if cols.codiff {
            series.push(("|codifference|", decay.clone()));
        }
        if cols.bound {
            series.push(("bound", rows.iter().map(|r| (r.n as f64, r.bound)).collect()));
        }
        if cols.rate {
            series.push((
                "rate formula",
                rows.iter().map(|r| (r.n as f64, r.rate_formula)).collect(),
            ));
        }
        if cols.mc {
            series.push((
                "|MC estimate|",
                rows.iter().map(|r| (r.n as f64, r.mc_value.abs())).collect(),
            ));
        }
        let title = format!("{} ({})", cfg.name, cmd.slug());
        files.push((probe_file(&svg_name, i), svg_chart(&title, &series)));
        tables.push(ProbeTable {
            probe: x.clone(),
            rows: rows.iter().map(JsonRow::from).collect(),
            fit,
        });
    }
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "name": cfg.name,
        "command": cmd.slug(),
        "probes": tables,
    }))
    .expect("report serializes");
    files.push((json_name, json + "\n"));
    Ok(Report {
        stdout: String::new(),
        files,
    })
}

fn series_in_command(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let s = cfg.series_in.as_ref().ok_or_else(|| Failure {
        code: EXIT_INVALID,
        message: "the series-in command needs a \"series_in\" section in the config".into(),
    })?;
    let (csv_name, json_name, svg_name) = output_names(cfg, Command::SeriesIn);
    let mut csv = String::from("n,in_re,in_im,mc_re,mc_im,mc_stderr\n");
    let mut rows = Vec::new();
    let mut exact_pts = Vec::new();
    for n in 0..=cfg.n_max {
        let v = exact_in(&cfg.measure, &cfg.operator, &s.f, &s.g, n)?;
        let mc = match &cfg.mc {
            Some(mc) => Some(estimate_in(
                &cfg.measure,
                &cfg.operator,
                &s.f,
                &s.g,
                n,
                mc.samples,
                RngSpec::new(mc.seed, mc.stream),
            )?),
            None => None,
        };
        let (mre, mim, mse) = mc.map_or((f64::NAN, f64::NAN, f64::NAN), |e| (e.value.re, e.value.im, e.stderr));
        let _ = writeln!(
            csv,
            "{n},{},{},{},{},{}",
            fmt_float(v.re),
            fmt_float(v.im),
            fmt_float(mre),
            fmt_float(mim),
            fmt_float(mse)
        );
        rows.push(serde_json::json!({
            "n": n,
            "in_re": json_float(v.re),
            "in_im": json_float(v.im),
            "mc_re": json_float(mre),
            "mc_im": json_float(mim),
            "mc_stderr": json_float(mse),
        }));
        exact_pts.push((n as f64, v.norm()));
    }
    let fit = fit_decay(&exact_pts).ok();
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "name": cfg.name,
        "command": "series-in",
        "rows": rows,
        "fit": fit,
    }))
    .expect("report serializes");
    let svg = svg_chart(&format!("{} (series-in)", cfg.name), &[("|I_n(f,g)|", exact_pts)]);
    Ok(Report {
        stdout: String::new(),
        files: vec![(csv_name, csv), (json_name, json + "\n"), (svg_name, svg)],
    })
}

fn verdict_command(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let v = mixing_verdict(&cfg.measure, &cfg.operator, &cfg.probes, cfg.n_max, cfg.tolerance)?;
    let json = serde_json::to_string_pretty(&v).expect("verdict serializes") + "\n";
    let (_, json_name, _) = output_names(cfg, Command::MixingVerdict);
    Ok(Report {
        stdout: json.clone(),
        files: vec![(json_name, json)],
    })
}

/// Runs `cmd` on a parsed config without touching the file system.
pub fn execute(cfg: &ExperimentConfig, cmd: Command) -> Result<Report, Failure> {
    let failures = cfg.validate();
    let summary = serde_json::to_string_pretty(&serde_json::json!({
        "valid": failures.is_empty(),
        "failures": failures,
    }))
    .expect("summary serializes")
        + "\n";
    if !failures.is_empty() {
        return Err(Failure {
            code: EXIT_INVALID,
            message: summary,
        });
    }
    match cmd {
        Command::Validate => Ok(Report {
            stdout: summary,
            files: Vec::new(),
        }),
        Command::Codiff | Command::Bound | Command::RateTable | Command::Mc => table_command(cfg, cmd),
        Command::SeriesIn => series_in_command(cfg),
        Command::MixingVerdict => verdict_command(cfg),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure {
        code: EXIT_CONFIG,
        message: "--config PATH is required".into(),
    })?;
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|m| Failure {
        code: EXIT_CONFIG,
        message: format!("{}: {m}", path.display()),
    })?;
    if let Some(n) = cli.n_max {
        cfg.n_max = n;
    }
    if let Some(seed) = cli.seed {
        match cfg.mc.as_mut() {
            Some(mc) => mc.seed = seed,
            None => {
                cfg.mc = Some(McConfig {
                    samples: 100_000,
                    seed,
                    stream: 0,
                })
            }
        }
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Parses `args`, runs the command and writes its files; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run_cli(&cli) {
        Ok(stdout) => {
            print!("{stdout}");
            EXIT_OK
        }
        Err(f) => {
            eprint!("{}", f.message);
            if !f.message.ends_with('\n') {
                eprintln!();
            }
            f.code
        }
    }
}

fn run_cli(cli: &Cli) -> Result<String, Failure> {
    let cfg = load_config(cli)?;
    let report = execute(&cfg, cli.command)?;
    let mut stdout = report.stdout;
    if !report.files.is_empty() {
        let dir = out_dir(cli);
        fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
        for (name, contents) in &report.files {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| io_failure(&path, e))?;
            let _ = writeln!(stdout, "wrote {}", path.display());
        }
    }
    Ok(stdout)
}
