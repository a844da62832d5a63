//! Command-line surface.
//!
//! Exit codes: 0 success, 1 failed verification or failed computation,
//! 2 usage or domain error.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bound::{scan, BoundContext, BoundReport};
use crate::kernels::{c_const, g_psi_with, HatWeighting};
use crate::mollifier::DEFAULT_SIEVE_LIMIT;
use crate::quadrature::DEFAULT_TOL;
use crate::suites::{self, Check, Suite};
use crate::testfn::{laplace_tol, limit_measure};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "rankbound", version, about = "Constants, bounds and checks for the average analytic rank bound")]
pub struct Cli {
    /// Absolute quadrature tolerance, within [1e-14, 1e-4].
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_SIEVE_LIMIT)]
    pub sieve_limit: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// phi0_hat(0), c and the three G-values at a = 1.
    Constants,
    /// The full decomposition of H(a, delta).
    Bound {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        delta: f64,
    },
    /// H on a grid of a, refined around the minimum.
    Scan {
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.30)]
        a_min: f64,
        #[arg(long, default_value_t = 0.70)]
        a_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

/// Validated global settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub format: Format,
    pub seed: u64,
    pub sieve_limit: u64,
}

impl RunConfig {
    pub fn new(tol: f64, format: Format, seed: u64, sieve_limit: u64) -> crate::Result<Self> {
        if !(1e-14..=1e-4).contains(&tol) {
            return Err(Error::Domain(format!("--tol must lie in [1e-14, 1e-4], got {tol}")));
        }
        if sieve_limit == 0 {
            return Err(Error::Domain("--sieve-limit must be positive".into()));
        }
        Ok(Self {
            tol,
            format,
            seed,
            sieve_limit,
        })
    }
}

/// `x` with `digits` significant digits, fixed-point where that stays short.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.prec$e}", prec = digits - 1)
    }
}

/// `x` rounded to 12 significant digits, as a JSON number.
fn json_num(x: f64) -> Value {
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    json!(rounded)
}

/// A rendered report: named rows of named cells.
struct Report {
    title: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// Extra top-level fields for JSON and the table header.
    meta: Vec<(&'static str, Cell)>,
}

#[derive(Clone)]
enum Cell {
    Num(f64),
    Text(String),
    Int(u64),
    Bool(bool),
}

impl Cell {
    fn render(&self, digits: usize) -> String {
        match self {
            Cell::Num(x) => format_sig(*x, digits),
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json_num(*x),
            Cell::Text(s) => json!(s),
            Cell::Int(n) => json!(n),
            Cell::Bool(b) => json!(b),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Report {
    fn emit(&self, fmt: Format, json_body: Value, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<()> {
        match fmt {
            Format::Json => {
                let mut obj = Map::new();
                for (k, v) in &self.meta {
                    obj.insert((*k).into(), v.json());
                }
                if let Value::Object(body) = json_body {
                    obj.extend(body);
                }
                writeln!(out, "{}", serde_json::to_string_pretty(&Value::Object(obj))?)
            }
            Format::Csv => {
                for (k, v) in &self.meta {
                    writeln!(err, "# {k}={}", v.render(12))?;
                }
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|c| csv_field(&c.render(12))).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
                Ok(())
            }
            Format::Table => {
                writeln!(out, "{}", self.title)?;
                for (k, v) in &self.meta {
                    writeln!(out, "{k}: {}", v.render(6))?;
                }
                let rendered: Vec<Vec<String>> = self
                    .rows
                    .iter()
                    .map(|r| r.iter().map(|c| c.render(6)).collect())
                    .collect();
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|i| {
                        rendered
                            .iter()
                            .map(|r| r[i].len())
                            .chain(std::iter::once(self.columns[i].len()))
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: Vec<&str>| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                        .trim_end()
                        .to_string()
                };
                writeln!(out, "{}", line(self.columns.clone()))?;
                for r in &rendered {
                    writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
                }
                Ok(())
            }
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::SieveLimit { .. } => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

fn bound_row(r: &BoundReport) -> Vec<Cell> {
    vec![
        Cell::Num(r.a),
        Cell::Num(r.h),
        Cell::Num(r.bracket),
        Cell::Num(r.g_phi_a),
        Cell::Num(r.g_phi2_a),
    ]
}

fn bound_json(r: &BoundReport) -> Value {
    json!({
        "a": json_num(r.a),
        "delta": json_num(r.delta),
        "phi0_hat0": json_num(r.phi0_hat0),
        "g_phi_1": json_num(r.g_phi_1),
        "g_phi_a": json_num(r.g_phi_a),
        "g_phi2_1": json_num(r.g_phi2_1),
        "g_phi2_a": json_num(r.g_phi2_a),
        "bracket": json_num(r.bracket),
        "H": json_num(r.h),
    })
}

fn cmd_constants(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    let w = HatWeighting::default();
    let m0 = limit_measure::<f64>(0)?;
    let hat = laplace_tol(&m0, 0.0, cfg.tol)?;
    let mut rows = vec![
        ("phi0_hat_0", hat.value, hat.err_estimate),
        ("c", c_const::<f64>(), 0.0),
    ];
    for (name, order) in [("G_abs_phi_1", 0), ("G_abs_dphi_1", 1), ("G_abs_d2phi_1", 2)] {
        let g = g_psi_with(1.0, &limit_measure(order)?, w, cfg.tol)?;
        rows.push((name, g.value, g.err_estimate));
    }
    let mut body = Map::new();
    let mut errs = Map::new();
    for (name, v, e) in &rows {
        body.insert((*name).into(), json_num(*v));
        errs.insert((*name).into(), json_num(*e));
    }
    body.insert("err_estimate".into(), Value::Object(errs));
    let report = Report {
        title: "constants",
        columns: vec!["name", "value", "err_estimate"],
        rows: rows
            .iter()
            .map(|(n, v, e)| vec![Cell::Text((*n).into()), Cell::Num(*v), Cell::Num(*e)])
            .collect(),
        meta: vec![("seed", Cell::Int(cfg.seed))],
    };
    report
        .emit(cfg.format, Value::Object(body), out, err)
        .map_err(|e| Error::Domain(e.to_string()))?;
    Ok(EXIT_OK)
}

fn cmd_bound(cfg: &RunConfig, a: f64, delta: f64, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    crate::kernels::KernelParams::new(a, delta)?;
    let ctx = BoundContext::new(cfg.tol, HatWeighting::default())?;
    let r = ctx.report(a, delta)?;
    if !r.is_consistent() {
        writeln!(err, "report failed its recomputation check").ok();
        return Ok(EXIT_FAILED);
    }
    let fields: Vec<(&str, f64)> = vec![
        ("a", r.a),
        ("delta", r.delta),
        ("phi0_hat0", r.phi0_hat0),
        ("g_phi_1", r.g_phi_1),
        ("g_phi_a", r.g_phi_a),
        ("g_phi2_1", r.g_phi2_1),
        ("g_phi2_a", r.g_phi2_a),
        ("bracket", r.bracket),
        ("H", r.h),
        ("slack", r.slack()),
    ];
    let mut body = bound_json(&r);
    body["slack"] = json_num(r.slack());
    let report = Report {
        title: "bound",
        columns: vec!["field", "value"],
        rows: fields
            .iter()
            .map(|(n, v)| vec![Cell::Text((*n).into()), Cell::Num(*v)])
            .collect(),
        meta: vec![("seed", Cell::Int(cfg.seed))],
    };
    report
        .emit(cfg.format, body, out, err)
        .map_err(|e| Error::Domain(e.to_string()))?;
    Ok(EXIT_OK)
}

fn cmd_scan(
    cfg: &RunConfig,
    delta: f64,
    a_min: f64,
    a_max: f64,
    step: f64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> crate::Result<i32> {
    let ctx = BoundContext::new(cfg.tol, HatWeighting::default())?;
    let res = scan(&ctx, delta, a_min, a_max, step)?;
    let mut rows: Vec<Vec<Cell>> = res.coarse.iter().map(bound_row).collect();
    rows.push(bound_row(&res.best));
    let body = json!({
        "rows": res.coarse.iter().map(bound_json).collect::<Vec<_>>(),
        "minimizer": bound_json(&res.best),
        "slack": json_num(res.best.slack()),
    });
    let report = Report {
        title: "scan (last row: refined minimizer)",
        columns: vec!["a", "H", "bracket", "g_phi_a", "g_phi2_a"],
        rows,
        meta: vec![
            ("seed", Cell::Int(cfg.seed)),
            ("delta", Cell::Num(delta)),
            ("a_star", Cell::Num(res.best.a)),
            ("slack", Cell::Num(res.best.slack())),
        ],
    };
    report
        .emit(cfg.format, body, out, err)
        .map_err(|e| Error::Domain(e.to_string()))?;
    Ok(EXIT_OK)
}

fn cmd_verify(cfg: &RunConfig, suite: Suite, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    let checks: Vec<Check> = suites::run(suite, cfg.seed, cfg.sieve_limit)?;
    let all_passed = checks.iter().all(|c| c.passed);
    let body = json!({
        "passed": all_passed,
        "checks": checks
            .iter()
            .map(|c| json!({
                "name": c.name,
                "value": json_num(c.value),
                "threshold": json_num(c.threshold),
                "passed": c.passed,
            }))
            .collect::<Vec<_>>(),
    });
    let report = Report {
        title: "verify",
        columns: vec!["check", "value", "threshold", "passed"],
        rows: checks
            .iter()
            .map(|c| {
                vec![
                    Cell::Text(c.name.clone()),
                    Cell::Num(c.value),
                    Cell::Num(c.threshold),
                    Cell::Bool(c.passed),
                ]
            })
            .collect(),
        meta: vec![
            ("seed", Cell::Int(cfg.seed)),
            ("suite", Cell::Text(format!("{suite:?}").to_lowercase())),
        ],
    };
    report
        .emit(cfg.format, body, out, err)
        .map_err(|e| Error::Domain(e.to_string()))?;
    if all_passed {
        Ok(EXIT_OK)
    } else {
        for c in checks.iter().filter(|c| !c.passed) {
            writeln!(err, "FAILED: {} (value {:e} > threshold {:e})", c.name, c.value, c.threshold).ok();
        }
        Ok(EXIT_FAILED)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                write!(err, "{text}").ok();
            } else {
                write!(out, "{text}").ok();
            }
            return code;
        }
    };
    let cfg = match RunConfig::new(cli.tol, cli.format, cli.seed, cli.sieve_limit) {
        Ok(c) => c,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Constants => cmd_constants(&cfg, out, err),
        Command::Bound { a, delta } => cmd_bound(&cfg, a, delta, out, err),
        Command::Scan {
            delta,
            a_min,
            a_max,
            step,
        } => cmd_scan(&cfg, delta, a_min, a_max, step, out, err),
        Command::Verify { suite } => cmd_verify(&cfg, suite, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(6.497956123456789, 6), "6.49796");
        assert_eq!(format_sig(0.928129678567873, 12), "0.928129678568");
        assert_eq!(format_sig(11.02802773, 6), "11.0280");
        assert_eq!(format_sig(1.5e-12, 6), "1.50000e-12");
        assert_eq!(format_sig(0.0, 6), "0");
    }

    #[test]
    fn tolerance_range() {
        assert!(RunConfig::new(1e-15, Format::Json, 0, 10).is_err());
        assert!(RunConfig::new(1e-3, Format::Json, 0, 10).is_err());
        assert!(RunConfig::new(1e-10, Format::Json, 0, 10).is_ok());
    }

    #[test]
    fn usage_errors_exit_two() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run(["rankbound", "bound", "--a", "1.0"], &mut out, &mut err), EXIT_USAGE);
        assert!(String::from_utf8_lossy(&err).contains("open interval"));
        assert_eq!(run(["rankbound", "nonsense"], &mut out, &mut err), EXIT_USAGE);
    }
}
