//! Command-line front end: argument parsing, dispatch and report emission.
//!
//! Exit codes: 0 success, 2 usage, 3 computation, 4 resource.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::construction::{choose_strategy, ratio_experiment, Sampler};
use crate::digits::{Natural, RadixConverter};
use crate::diophantine::{
    dirichlet_approx, discrepancy_bound_cf, fractional_multiples, log_ratio_continued_fraction,
    multiplicatively_dependent, star_discrepancy, theta_interval, C_D, DEFAULT_PRECISION_BITS,
    GAMMA_2_3,
};
use crate::error::{Error, Result};
use crate::exponents::{independence_heuristic, lower_exponents, upper_exponent};
use crate::hp::ln_biguint;
use crate::scan::{
    decade_checkpoints, scan_report, ChunkPolicy, JointHistogram, ScanSeries, ScanState,
};
use crate::weyl::{digit_frequency_deviation, shift_count, weyl_table, C_ET};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "DIGITSUM_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

/// Integers between scan checkpoint saves.
const SAVE_INTERVAL: u64 = 1 << 26;

#[derive(Debug, Parser)]
#[command(
    name = "digitsum",
    version,
    about = "Digit sums in two multiplicatively independent bases"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower and upper counting exponents and the independence heuristic.
    Exponents(ExponentsArgs),
    /// Sample the construction and report s_b/s_a for each member.
    Sample(SampleArgs),
    /// Exhaustive scan of 1..=max with coincidence counts at every decade.
    Scan(ScanArgs),
    /// Weyl sums and the Erdős–Turán majorant of one member.
    Weyl(WeylArgs),
    /// Certified continued fraction of log a / log b.
    Cf(CfArgs),
    /// Star discrepancy of the multiples of log a / log b.
    Discrepancy(DiscrepancyArgs),
    /// Run the oracle cross-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Bases {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..=64))]
    pub a: u32,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(2..=64))]
    pub b: u32,
}

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    #[command(flatten)]
    pub bases: Bases,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub tau: f64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub bases: Bases,
    #[arg(long, value_parser = parse_positive)]
    pub tau: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10_000_000))]
    pub k: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub bases: Bases,
    /// Scan bound; scientific notation such as 1e9 is read exactly.
    #[arg(long, value_parser = parse_exact_count)]
    pub max: u64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub tau: f64,
    /// Relative tolerance for an extra count column; repeatable.
    #[arg(long, value_parser = parse_nonnegative)]
    pub eps: Vec<f64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,
    /// Checkpoint file, resumed from when present.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeylArgs {
    #[command(flatten)]
    pub bases: Bases,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub tau: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..=1_000_000))]
    pub k: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Analyze this decimal integer in base a instead of a sampled member.
    #[arg(long)]
    pub m: Option<String>,
    /// Number of shifts; defaults to floor(log m_max / log base).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    #[arg(long = "H", default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    pub big_h: u64,
}

#[derive(Debug, Args)]
pub struct CfArgs {
    #[command(flatten)]
    pub bases: Bases,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    pub terms: u64,
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS, value_parser = clap::value_parser!(u32).range(64..=(1 << 17)))]
    pub bits: u32,
}

#[derive(Debug, Args)]
pub struct DiscrepancyArgs {
    #[command(flatten)]
    pub bases: Bases,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..=100_000_000))]
    pub n: u64,
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u32).range(128..=(1 << 17)))]
    pub bits: u32,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Smaller instances; finishes in seconds.
    #[arg(long)]
    pub fast: bool,
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

fn parse_nonnegative(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
        _ => Err(format!("expected a non-negative number, got '{s}'")),
    }
}

/// Parses `123`, `1e9` or `2.5e3` as an exact positive integer.
pub fn parse_exact_count(s: &str) -> std::result::Result<u64, String> {
    let err = || format!("expected a positive integer such as 1000000 or 1e9, got '{s}'");
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (
            &s[..i],
            s[i + 1..]
                .trim_start_matches('+')
                .parse::<u32>()
                .map_err(|_| err())?,
        ),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let frac = frac.trim_end_matches('0');
    let shift = exp.checked_sub(frac.len() as u32).ok_or_else(err)?;
    let digits: u64 = format!("{int}{frac}").parse().map_err(|_| err())?;
    let value = 10u64
        .checked_pow(shift)
        .and_then(|p| digits.checked_mul(p))
        .ok_or_else(err)?;
    if value == 0 {
        return Err(err());
    }
    Ok(value)
}

/// A report: the JSON document plus a flat table for CSV and text output.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub document: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(i128::from(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Report {
    fn new(command: &str, body: impl Serialize) -> Result<Self> {
        let mut doc = Map::new();
        doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
        doc.insert("command".into(), json!(command));
        match serde_json::to_value(body).map_err(|e| Error::Format(e.to_string()))? {
            Value::Object(fields) => doc.extend(fields),
            other => {
                doc.insert("result".into(), other);
            }
        }
        Ok(Self {
            document: Value::Object(doc),
            header: Vec::new(),
            rows: Vec::new(),
        })
    }

    fn table(mut self, header: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self.rows = rows;
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.document).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = self.header.join(",");
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|c| csv_escape(&c.render())).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut s = String::new();
        if let Value::Object(fields) = &self.document {
            for (k, v) in fields {
                if !v.is_array() && !v.is_object() {
                    s.push_str(&format!("{k}: {v}\n"));
                }
            }
        }
        if !self.header.is_empty() {
            let cells: Vec<Vec<String>> = self
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::render).collect())
                .collect();
            let widths: Vec<usize> = (0..self.header.len())
                .map(|i| {
                    cells
                        .iter()
                        .filter_map(|r| r.get(i).map(String::len))
                        .chain([self.header[i].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |items: &[String]| {
                let padded: Vec<String> = items
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            s.push('\n');
            s.push_str(&line(&self.header));
            for r in &cells {
                s.push_str(&line(r));
            }
        }
        s
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn exponents(args: &ExponentsArgs) -> Result<Report> {
    let (a, b, tau) = (args.bases.a, args.bases.b, args.tau);
    let lower = lower_exponents(a, b, tau)?;
    let heuristic = independence_heuristic(a, b)?;
    let (upper, upper_error) = match upper_exponent(a, b, tau) {
        Ok(u) => (Some(u), None),
        Err(e @ Error::ExcludedParameter(_)) => (None, Some(error_object(&e))),
        Err(e) => return Err(e),
    };
    let mut rows: Vec<Vec<Cell>> = [
        ("tau0", Some(lower.tau0)),
        ("rho1", Some(lower.rho1)),
        ("rho2", Some(lower.rho2)),
        ("c1", lower.c1),
        ("c2", lower.c2),
        ("c0", Some(lower.c0)),
        ("Lambda", Some(lower.lambda)),
        ("sigma_max", Some(lower.sigma_max)),
        ("sigma1_b", lower.sigma1_b),
        ("sigma1_a", lower.sigma1_a),
    ]
    .into_iter()
    .map(|(k, v)| vec![Cell::Text(k.into()), v.into()])
    .collect();
    rows.insert(
        7,
        vec![Cell::Text("M".into()), Cell::Int(i128::from(lower.m))],
    );
    if let Some(u) = &upper {
        for (k, v) in [
            ("lambda_star", u.lambda_star),
            ("d1", u.d1),
            ("d2", u.d2),
            ("d0", u.d0),
        ] {
            rows.push(vec![Cell::Text(k.into()), v.into()]);
        }
        if let Some(p) = &u.printed {
            rows.push(vec![Cell::Text("printed_lambda".into()), p.lambda.into()]);
            rows.push(vec![Cell::Text("printed_d".into()), p.d1.max(p.d2).into()]);
        }
    }
    rows.push(vec![Cell::Text("t".into()), heuristic.t.into()]);
    #[derive(Serialize)]
    struct Body<T: Serialize, U: Serialize, H: Serialize> {
        #[serde(flatten)]
        lower: T,
        upper: Option<U>,
        #[serde(skip_serializing_if = "Option::is_none")]
        upper_error: Option<Value>,
        heuristic: H,
        multiplicatively_dependent: bool,
    }
    Ok(Report::new(
        "exponents",
        Body {
            lower,
            upper,
            upper_error,
            heuristic,
            multiplicatively_dependent: multiplicatively_dependent(u64::from(a), u64::from(b)),
        },
    )?
    .table(&["quantity", "value"], rows))
}

fn sample(args: &SampleArgs) -> Result<Report> {
    let (a, b, tau) = (args.bases.a, args.bases.b, args.tau);
    let r = ratio_experiment(a, b, tau, args.k as usize, args.count as usize, args.seed)?;
    let rows = r
        .sums
        .iter()
        .enumerate()
        .map(|(i, s)| vec![i.into(), s.s_a.into(), s.s_b.into(), s.ratio().into()])
        .collect();
    #[derive(Serialize)]
    struct Sample {
        i: usize,
        s_a: u64,
        s_b: u64,
        ratio: f64,
    }
    let samples: Vec<Sample> = r
        .sums
        .iter()
        .enumerate()
        .map(|(i, s)| Sample {
            i,
            s_a: s.s_a,
            s_b: s.s_b,
            ratio: s.ratio(),
        })
        .collect();
    let body = json!({
        "a": a, "b": b, "tau": tau, "k": r.k, "seed": r.seed,
        "strategy": r.strategy,
        "mean_ratio": r.mean_ratio,
        "median_ratio": r.median_ratio,
        "median_rel_dev": r.median_rel_dev,
        "rel_dev_deciles": r.rel_dev_deciles,
        "samples": samples,
    });
    Ok(Report::new("sample", body)?.table(&["i", "s_a", "s_b", "ratio"], rows))
}

fn policy(threads: usize) -> ChunkPolicy {
    ChunkPolicy {
        chunks: 64.max(threads * 8),
        threads,
    }
}

/// Scan with snapshots at `checkpoints`, resuming from and saving to `file` when given.
pub fn resumable_series(
    a: u32,
    b: u32,
    checkpoints: &[u64],
    threads: usize,
    file: Option<&Path>,
) -> Result<ScanSeries> {
    let limit = *checkpoints.last().expect("nonempty checkpoints");
    let mut state = match file {
        Some(path) if path.exists() => {
            let s = ScanState::load(path)?;
            if (s.hist.a, s.hist.b, s.limit) != (a, b, limit) {
                return Err(Error::InvalidInput(format!(
                    "checkpoint {} is for a = {}, b = {}, max = {}",
                    path.display(),
                    s.hist.a,
                    s.hist.b,
                    s.limit
                )));
            }
            s
        }
        _ => ScanState::new(a, b, limit)?,
    };
    let mut histograms: Vec<JointHistogram> = Vec::with_capacity(checkpoints.len());
    // snapshots already passed by a resumed state come from a fresh scan
    let passed: Vec<u64> = checkpoints
        .iter()
        .copied()
        .filter(|&x| x < state.position())
        .collect();
    if !passed.is_empty() {
        let mut fresh = ScanState::new(a, b, limit)?;
        for &x in &passed {
            fresh.advance_to(x, policy(threads))?;
            histograms.push(fresh.hist.clone());
        }
    }
    let start = state.position();
    for &x in checkpoints.iter().filter(|&&x| x >= start) {
        while state.position() < x {
            let next = x.min(state.position().saturating_add(SAVE_INTERVAL));
            state.advance_to(next, policy(threads))?;
            if let Some(path) = file {
                state.save(path)?;
            }
        }
        histograms.push(state.hist.clone());
    }
    Ok(ScanSeries {
        checkpoints: checkpoints.to_vec(),
        histograms,
    })
}

fn eps_label(e: f64) -> String {
    format!("count_eps_{e}")
}

fn scan(args: &ScanArgs) -> Result<Report> {
    let (a, b) = (args.bases.a, args.bases.b);
    let checkpoints = decade_checkpoints(args.max);
    let series = resumable_series(a, b, &checkpoints, args.threads, args.checkpoint.as_deref())?;
    let report = scan_report(&series, args.tau, &args.eps)?;
    let mut header = vec!["x".to_string(), "count_eq".to_string()];
    header.extend(args.eps.iter().map(|&e| eps_label(e)));
    header.push("fitted_slope".into());
    let rows: Vec<Vec<Cell>> = report
        .rows
        .iter()
        .map(|r| {
            let mut row: Vec<Cell> = vec![r.x.into(), r.count_eq.into()];
            row.extend(r.count_eps.iter().map(|&c| Cell::from(c)));
            row.push(report.fitted_slope.into());
            row
        })
        .collect();
    let json_rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            let eps: Map<String, Value> = args
                .eps
                .iter()
                .zip(&r.count_eps)
                .map(|(&e, &c)| (e.to_string(), json!(c)))
                .collect();
            json!({
                "x": r.x,
                "count_eq": r.count_eq,
                "proportion_eq": r.count_eq as f64 / r.x as f64,
                "count_eps": eps,
            })
        })
        .collect();
    let body = json!({
        "a": a, "b": b, "tau": args.tau, "max": args.max, "eps": args.eps,
        "rows": json_rows,
        "fitted_slope": report.fitted_slope,
    });
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Ok(Report::new("scan", body)?.table(&header, rows))
}

fn weyl(args: &WeylArgs) -> Result<Report> {
    let (a, b) = (args.bases.a, args.bases.b);
    let (m, base, default_n, origin) = match &args.m {
        Some(text) => {
            let m: Natural = text.parse().map_err(|_| {
                Error::InvalidParameter(format!("--m must be a decimal integer, got '{text}'"))
            })?;
            let n = RadixConverter::new(a)?.to_digits(&m).len().max(1);
            (m, a, n, json!({ "source": "argument" }))
        }
        None => {
            let strategy = choose_strategy(a, b, args.tau)?;
            let law =
                crate::construction::make_law(strategy.host_base, args.k as usize, strategy.rho)?;
            let member = Sampler::new(&law, args.seed).next_member();
            let m = RadixConverter::new(strategy.host_base)?.from_digits(&member)?;
            let n = shift_count(&law, strategy.other_base)?.max(1);
            let origin = json!({
                "source": "sample", "k": args.k, "seed": args.seed,
                "strategy": strategy, "host_digit_sum": member.digit_sum(),
            });
            (m, strategy.other_base, n, origin)
        }
    };
    let n = args.n.map_or(default_n, |n| n as usize);
    let table = weyl_table(&m, base, n, args.big_h)?;
    let mut worst_digit: f64 = 0.0;
    for j in 0..base {
        let (lo, hi) = (
            f64::from(j) / f64::from(base),
            f64::from(j + 1) / f64::from(base),
        );
        worst_digit = worst_digit.max(digit_frequency_deviation(&m, base, n, lo, hi)?);
    }
    let rows = table
        .rows
        .iter()
        .map(|r| vec![r.h.into(), r.re.into(), r.im.into(), r.abs.into()])
        .collect();
    let body = json!({
        "base": base, "n": n, "H": args.big_h,
        "member": origin,
        "delta": table.delta,
        "max_digit_frequency_deviation": worst_digit,
        "c_et": C_ET,
        "within_c_et_delta": worst_digit <= C_ET * table.delta,
        "sums": table.rows,
    });
    Ok(Report::new("weyl", body)?.table(&["h", "re", "im", "abs"], rows))
}

fn cf(args: &CfArgs) -> Result<Report> {
    let (a, b) = (args.bases.a, args.bases.b);
    let table =
        log_ratio_continued_fraction(u64::from(a), u64::from(b), args.terms as usize, args.bits)?;
    let mut rows = Vec::with_capacity(table.len());
    let mut json_rows = Vec::with_capacity(table.len());
    for row in &table.rows {
        let lnq = ln_biguint(row.q.magnitude());
        let lambda = (lnq > 0.0 && row.ln_err_hi.is_finite()).then(|| {
            if row.ln_err_lo.is_finite() {
                -0.5 * (row.ln_err_lo + row.ln_err_hi) / lnq
            } else {
                -row.ln_err_hi / lnq
            }
        });
        rows.push(vec![
            row.index.into(),
            Cell::Text(row.partial_quotient.to_string()),
            Cell::Text(row.p.to_string()),
            Cell::Text(row.q.to_string()),
            row.err_lo.into(),
            row.err_hi.into(),
            lambda.into(),
        ]);
        json_rows.push(json!({
            "i": row.index,
            "a_i": row.partial_quotient.to_string(),
            "p_i": row.p.to_string(),
            "q_i": row.q.to_string(),
            "err_lo": row.err_lo,
            "err_hi": row.err_hi,
            "ln_err_lo": finite_or_null(row.ln_err_lo),
            "ln_err_hi": finite_or_null(row.ln_err_hi),
            "lambda_eff": lambda,
        }));
    }
    let theta = theta_interval(u64::from(a), u64::from(b), 128)?;
    let body = json!({
        "a": a, "b": b, "theta": theta.center(),
        "precision_bits": table.precision_bits,
        "truncated": table.truncated,
        "rational": table.rational,
        "rows": json_rows,
    });
    Ok(Report::new("cf", body)?.table(
        &["i", "a_i", "p_i", "q_i", "err_lo", "err_hi", "lambda_eff"],
        rows,
    ))
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn discrepancy(args: &DiscrepancyArgs) -> Result<Report> {
    let (a, b) = (args.bases.a, args.bases.b);
    let theta = theta_interval(u64::from(a), u64::from(b), args.bits)?;
    let table = log_ratio_continued_fraction(u64::from(a), u64::from(b), 40, args.bits)?;
    let points = fractional_multiples(&theta, args.n as usize);
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for n in decade_checkpoints(args.n) {
        let d = star_discrepancy(&points[..n as usize])?;
        let bound = discrepancy_bound_cf(&table, n, C_D)?;
        let power = (n as f64).powf(-1.0 / GAMMA_2_3);
        rows.push(vec![n.into(), d.into(), bound.into(), power.into()]);
        json_rows.push(
            json!({ "n": n, "star_discrepancy": d, "cf_bound": bound, "power_bound": power }),
        );
    }
    let n = args.n;
    let big_r = (n as f64).powf(1.0 / GAMMA_2_3).max(1.0);
    let dirichlet = dirichlet_approx(&table, n, big_r).ok().map(|d| {
        json!({
            "R": big_r, "index": d.index, "r": d.r.to_string(), "q": d.q.to_string(),
            "err_hi": d.err_hi, "q_f64": d.q.to_f64(),
        })
    });
    let body = json!({
        "a": a, "b": b, "n": n, "gamma": GAMMA_2_3, "c_d": C_D,
        "rows": json_rows,
        "dirichlet": dirichlet,
    });
    Ok(Report::new("discrepancy", body)?
        .table(&["n", "star_discrepancy", "cf_bound", "power_bound"], rows))
}

fn verify(args: &VerifyArgs) -> Result<Report> {
    let checks = crate::verify::run(args.fast);
    let all = checks.iter().all(|c| c.passed);
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                Cell::Text(c.name.into()),
                Cell::Text(c.passed.to_string()),
                Cell::Text(c.detail.clone()),
            ]
        })
        .collect();
    let body = json!({ "fast": args.fast, "all_passed": all, "checks": checks });
    Ok(Report::new("verify", body)?.table(&["check", "passed", "detail"], rows))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Exponents(_) => "exponents",
        Command::Sample(_) => "sample",
        Command::Scan(_) => "scan",
        Command::Weyl(_) => "weyl",
        Command::Cf(_) => "cf",
        Command::Discrepancy(_) => "discrepancy",
        Command::Verify(_) => "verify",
    }
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Exponents(a) => exponents(a),
        Command::Sample(a) => sample(a),
        Command::Scan(a) => scan(a),
        Command::Weyl(a) => weyl(a),
        Command::Cf(a) => cf(a),
        Command::Discrepancy(a) => discrepancy(a),
        Command::Verify(a) => verify(a),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_resource() => EXIT_RESOURCE,
        Error::InvalidParameter(_) | Error::InvalidBase(_) | Error::InvalidDigit { .. } => {
            EXIT_USAGE
        }
        _ => EXIT_COMPUTATION,
    }
}

fn error_object(e: &Error) -> Value {
    json!({ "kind": e.kind(), "message": e.to_string(), "exit_code": exit_code(e) })
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Resource(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(std::io::stdout(), "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    eprintln!("digitsum: {}", first.trim_start_matches("error: "));
                    EXIT_USAGE
                }
            };
        }
    };
    let name = command_name(&cli.command);
    let result = execute(&cli).and_then(|report| {
        let failed = report.document.get("all_passed") == Some(&Value::Bool(false));
        write_out(cli.output.as_deref(), &report.render(cli.format))?;
        Ok(failed)
    });
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => {
            eprintln!("digitsum: {name}: some checks failed");
            EXIT_COMPUTATION
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("digitsum: {name}: {}", e.to_string().replace('\n', " "));
            if cli.format == Format::Json && code != EXIT_RESOURCE {
                let doc = json!({ "schema_version": SCHEMA_VERSION, "command": name, "error": error_object(&e) });
                let text =
                    serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n";
                let _ = write_out(cli.output.as_deref(), &text);
            }
            code
        }
    }
}
