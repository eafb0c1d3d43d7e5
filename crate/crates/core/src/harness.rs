//! Grid sweeps producing one row per point, serialised as CSV or JSON.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::all_character_sums;
use crate::counting::{
    count_friable, count_friable_progression, count_ultrafriable, count_ultrafriable_residues, gcd,
    CountValue,
};
use crate::error::{Error, Result};
use crate::estimators::{
    compare, estimate_noncoprime, estimate_progression, estimate_t2, estimate_upsilon_q, t3_bound,
    Constants, EstimateBreakdown, TheoremTag,
};
use crate::primes::{classify_log, modulus_context, PrimePowerTable};
use crate::saddle::{self, SaddleKind};

pub const CSV_HEADER: [&str; 22] = [
    "mode",
    "x",
    "log_x",
    "y",
    "q",
    "a",
    "variant",
    "regime",
    "exact_value_or_log",
    "est_log_main",
    "rel_error",
    "budget",
    "error_over_budget",
    "beta",
    "sigma2",
    "u",
    "eta",
    "omega_q",
    "delta_q",
    "d_q",
    "c_q",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Count,
    Saddle,
    Estimate,
    Compare,
    Chars,
    Sweep,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Count => "count",
            Mode::Saddle => "saddle",
            Mode::Estimate => "estimate",
            Mode::Compare => "compare",
            Mode::Chars => "chars",
            Mode::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Domain(format!("unknown format {s:?}"))),
        }
    }
}

/// An `x` value with the text it was given as and its logarithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XValue {
    pub text: String,
    pub x: f64,
    pub log_x: f64,
}

impl XValue {
    fn from_log(log_x: f64) -> Self {
        Self {
            text: format!("e^{log_x}"),
            x: log_x.exp(),
            log_x,
        }
    }
}

fn parse_positive(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("cannot parse {s:?} as a number")))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "{s:?} is not a positive finite number"
        )))
    }
}

/// One `x`: decimal, scientific, `e^k` or `ek`.
pub fn parse_x(s: &str) -> Result<XValue> {
    let s = s.trim();
    if let Some(k) = s.strip_prefix("e^").or_else(|| s.strip_prefix('e')) {
        let log_x: f64 = k
            .parse()
            .map_err(|_| Error::Domain(format!("cannot parse exponent in {s:?}")))?;
        if !log_x.is_finite() {
            return Err(Error::Domain(format!("{s:?} is not finite")));
        }
        return Ok(XValue {
            text: s.to_string(),
            x: log_x.exp(),
            log_x,
        });
    }
    let x = parse_positive(s)?;
    Ok(XValue {
        text: s.to_string(),
        x,
        log_x: x.ln(),
    })
}

/// A comma-separated list of `x` values or log-spaced grids `from:to:n`
/// (for example `e20:e40:5` or `1e3:1e6:4`).
pub fn parse_x_grid(s: &str) -> Result<Vec<XValue>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [one] => out.push(parse_x(one)?),
            [from, to, n] => {
                let (from, to) = (parse_x(from)?, parse_x(to)?);
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad point count in {part:?}")))?;
                if n == 0 {
                    return Err(Error::Domain(format!("empty grid {part:?}")));
                }
                if n == 1 {
                    out.push(from);
                } else {
                    for i in 0..n {
                        let t = i as f64 / (n - 1) as f64;
                        out.push(XValue::from_log(from.log_x + (to.log_x - from.log_x) * t));
                    }
                }
            }
            _ => return Err(Error::Domain(format!("cannot parse x grid {part:?}"))),
        }
    }
    if out.is_empty() {
        return Err(Error::Domain("empty x grid".into()));
    }
    Ok(out)
}

/// Comma-separated integers or inclusive ranges `lo-hi`.
pub fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Domain(format!("cannot parse integer list entry {part:?}"));
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            if hi < lo {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(Error::Domain("empty integer list".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub mode: Mode,
    pub xs: Vec<XValue>,
    pub ys: Vec<u64>,
    pub qs: Vec<u64>,
    /// `None` means no residue restriction in `count`, and every coprime
    /// residue in the progression variants.
    pub a: Option<Vec<u64>>,
    pub variants: Vec<TheoremTag>,
    /// Count friable rather than ultrafriable integers in `count` mode.
    pub friable: bool,
    pub format: Format,
    pub constants: Constants,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
    /// Include wall-clock timing in JSON metadata (breaks byte-identical reruns).
    pub timing: bool,
}

impl SweepConfig {
    pub fn new(mode: Mode, xs: Vec<XValue>, ys: Vec<u64>) -> Self {
        Self {
            mode,
            xs,
            ys,
            qs: vec![1],
            a: None,
            variants: vec![TheoremTag::T1i],
            friable: false,
            format: Format::Csv,
            constants: Constants::default(),
            jobs: None,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.xs.is_empty()
            || self.ys.is_empty()
            || self.qs.is_empty()
            || self.variants.is_empty()
        {
            return Err(Error::Domain("every grid must be nonempty".into()));
        }
        if let Some(a) = &self.a {
            if a.is_empty() {
                return Err(Error::Domain("residue list is empty".into()));
            }
        }
        if self.ys.iter().any(|&y| y < 2) {
            return Err(Error::Domain("y must be at least 2".into()));
        }
        if self.qs.contains(&0) {
            return Err(Error::Domain("q must be positive".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Domain("--jobs must be positive".into()));
        }
        self.constants.validate()
    }
}

/// One output row; `None` fields are printed empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub mode: String,
    pub x: String,
    pub log_x: f64,
    pub y: u64,
    pub q: u64,
    pub a: Option<String>,
    pub variant: Option<String>,
    pub regime: String,
    pub exact_value_or_log: Option<String>,
    pub est_log_main: Option<f64>,
    pub rel_error: Option<f64>,
    pub budget: Option<f64>,
    pub error_over_budget: Option<f64>,
    pub beta: Option<f64>,
    pub sigma2: Option<f64>,
    pub u: f64,
    pub eta: f64,
    pub omega_q: Option<usize>,
    pub delta_q: Option<f64>,
    pub d_q: Option<f64>,
    pub c_q: Option<f64>,
    pub status: String,
}

/// Exact below `10^30`, otherwise `log10=...`.
pub fn format_count(c: &CountValue) -> String {
    let limit = BigUint::from(10u32).pow(30);
    if c.value() < &limit {
        c.to_string()
    } else {
        format!("log10={}", c.ln() / std::f64::consts::LN_10)
    }
}

#[derive(Debug, Clone)]
struct Point {
    x: XValue,
    y: u64,
    q: u64,
    a: Option<u64>,
    variant: TheoremTag,
}

fn points(config: &SweepConfig) -> Vec<Point> {
    let mut out = Vec::new();
    for x in &config.xs {
        for &y in &config.ys {
            for &q in &config.qs {
                for &variant in &config.variants {
                    let residues: Vec<Option<u64>> = match &config.a {
                        Some(list) => list.iter().map(|&a| Some(a)).collect(),
                        None if needs_residue(config.mode, variant) => {
                            (0..q).filter(|&a| gcd(a, q) == 1).map(Some).collect()
                        }
                        None => vec![None],
                    };
                    for a in residues {
                        out.push(Point {
                            x: x.clone(),
                            y,
                            q,
                            a,
                            variant,
                        });
                    }
                }
            }
        }
    }
    out
}

fn needs_residue(mode: Mode, variant: TheoremTag) -> bool {
    matches!(mode, Mode::Estimate | Mode::Compare | Mode::Sweep)
        && matches!(variant, TheoremTag::T4 | TheoremTag::T5 | TheoremTag::R6)
}

fn base_row(config: &SweepConfig, p: &Point, table: &PrimePowerTable) -> Row {
    let regime = classify_log(p.x.log_x, table, config.constants.epsilon);
    Row {
        mode: config.mode.to_string(),
        x: p.x.text.clone(),
        log_x: p.x.log_x,
        y: p.y,
        q: p.q,
        a: p.a.map(|a| a.to_string()),
        variant: None,
        regime: regime.to_string(),
        exact_value_or_log: None,
        est_log_main: None,
        rel_error: None,
        budget: None,
        error_over_budget: None,
        beta: None,
        sigma2: None,
        u: regime.u,
        eta: table.psi() / p.x.log_x - 2.0,
        omega_q: None,
        delta_q: None,
        d_q: None,
        c_q: None,
        status: String::new(),
    }
}

fn fill_estimate(row: &mut Row, est: &EstimateBreakdown) {
    row.est_log_main = Some(est.log_main);
    row.budget = Some(est.budget.theorem_bound);
    row.beta = est.beta();
    row.sigma2 = est.saddle.as_ref().map(|s| s.sigma2());
    row.delta_q = Some(est.budget.delta_q);
    row.d_q = Some(est.budget.dd_q);
    row.c_q = Some(est.budget.cc_q);
    let mut status = String::from("ok");
    for n in &est.notes {
        status.push_str("; ");
        status.push_str(n);
    }
    row.status = status;
}

fn estimate(config: &SweepConfig, p: &Point, table: &PrimePowerTable) -> Result<EstimateBreakdown> {
    let ctx = modulus_context(p.q, table)?;
    let k = &config.constants;
    match p.variant {
        TheoremTag::T1i | TheoremTag::T1ii | TheoremTag::T1iii | TheoremTag::REMC => {
            estimate_upsilon_q(p.x.x, table, &ctx, p.variant, k)
        }
        TheoremTag::T2 => estimate_t2(p.x.x, table, &ctx, k),
        TheoremTag::T4 | TheoremTag::T5 => {
            let a =
                p.a.ok_or_else(|| Error::Domain("a residue --a is required".into()))?;
            estimate_progression(p.x.x, table, &ctx, a, p.variant, k)
        }
        TheoremTag::R6 => {
            let a =
                p.a.ok_or_else(|| Error::Domain("a residue --a is required".into()))?;
            estimate_noncoprime(p.x.x, table, p.q, a, k)
        }
        TheoremTag::T3 => Err(Error::Domain("T3 rows come from the chars mode".into())),
    }
}

/// The exact count an estimate variant is compared with.
fn exact_for(p: &Point, table: &PrimePowerTable) -> Result<CountValue> {
    match (p.variant, p.a) {
        (TheoremTag::T4 | TheoremTag::T5 | TheoremTag::R6, Some(a)) => {
            Ok(count_ultrafriable_residues(p.x.x, table, p.q)?
                .get(a % p.q)
                .clone())
        }
        _ => count_ultrafriable(p.x.x, table, &modulus_context(p.q, table)?),
    }
}

fn error_status(e: &Error) -> String {
    format!("error: {e}")
}

fn point_rows(config: &SweepConfig, p: &Point) -> Vec<Row> {
    let table = match PrimePowerTable::build(p.y) {
        Ok(t) => t,
        Err(e) => {
            return vec![Row {
                mode: config.mode.to_string(),
                x: p.x.text.clone(),
                log_x: p.x.log_x,
                y: p.y,
                q: p.q,
                a: p.a.map(|a| a.to_string()),
                variant: None,
                regime: "OUT_OF_DOMAIN".into(),
                exact_value_or_log: None,
                est_log_main: None,
                rel_error: None,
                budget: None,
                error_over_budget: None,
                beta: None,
                sigma2: None,
                u: f64::NAN,
                eta: f64::NAN,
                omega_q: None,
                delta_q: None,
                d_q: None,
                c_q: None,
                status: error_status(&e),
            }]
        }
    };
    let mut row = base_row(config, p, &table);
    if let Ok(ctx) = modulus_context(p.q, &table) {
        row.omega_q = Some(ctx.omega_q);
    }
    match config.mode {
        Mode::Count => {
            let res = if config.friable {
                row.variant = Some("friable".into());
                match p.a {
                    Some(a) => count_friable_progression(p.x.x, p.y, a, p.q),
                    None => count_friable(p.x.x, p.y, p.q),
                }
            } else {
                row.variant = Some("ultrafriable".into());
                match p.a {
                    Some(a) => count_ultrafriable_residues(p.x.x, &table, p.q)
                        .map(|v| v.get(a % p.q).clone()),
                    None => modulus_context(p.q, &table)
                        .and_then(|ctx| count_ultrafriable(p.x.x, &table, &ctx)),
                }
            };
            match res {
                Ok(c) => {
                    row.exact_value_or_log = Some(format_count(&c));
                    row.status = "ok".into();
                }
                Err(e) => row.status = error_status(&e),
            }
            vec![row]
        }
        Mode::Saddle => {
            let res = saddle::solve_beta_log(p.x.log_x, &table).map(|b| {
                let alpha = if p.x.x >= p.y as f64 {
                    saddle::solve_alpha(p.x.x, &table).ok()
                } else {
                    None
                };
                (b, alpha)
            });
            match res {
                Ok((b, alpha)) => {
                    debug_assert_eq!(b.kind, SaddleKind::Beta);
                    row.variant = Some("beta".into());
                    row.beta = Some(b.sigma);
                    row.sigma2 = Some(b.sigma2());
                    let mut status = format!(
                        "ok; residual={}; sigma3={}; sigma4={}; iterations={}",
                        b.residual, b.sigma_j[1], b.sigma_j[2], b.iterations
                    );
                    if let Some(a) = alpha {
                        status.push_str(&format!(
                            "; alpha={}; alpha_residual={}",
                            a.sigma, a.residual
                        ));
                    }
                    row.status = status;
                }
                Err(e) => row.status = error_status(&e),
            }
            vec![row]
        }
        Mode::Estimate => {
            row.variant = Some(p.variant.to_string());
            match estimate(config, p, &table) {
                Ok(est) => fill_estimate(&mut row, &est),
                Err(e) => row.status = error_status(&e),
            }
            vec![row]
        }
        Mode::Compare | Mode::Sweep => {
            row.variant = Some(p.variant.to_string());
            match estimate(config, p, &table).and_then(|est| Ok((exact_for(p, &table)?, est))) {
                Ok((exact, est)) => {
                    fill_estimate(&mut row, &est);
                    let r = compare(&exact, &est);
                    row.exact_value_or_log = Some(format_count(&exact));
                    row.rel_error = Some(r.rel_error);
                    row.error_over_budget = Some(r.error_over_budget);
                    if r.degenerate {
                        row.status = "degenerate: exact count is 0".into();
                    }
                }
                Err(e) => row.status = error_status(&e),
            }
            vec![row]
        }
        Mode::Chars => chars_rows(config, p, &table, row),
    }
}

fn chars_rows(config: &SweepConfig, p: &Point, table: &PrimePowerTable, template: Row) -> Vec<Row> {
    let fail = |e: Error| {
        let mut r = template.clone();
        r.variant = Some("T3".into());
        r.status = error_status(&e);
        vec![r]
    };
    let ctx = match modulus_context(p.q, table) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let (total, sums) = match all_character_sums(p.x.x, table, p.q) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let denom = total.to_f64();
    let mut rows = Vec::new();
    for (chi, s) in sums.into_iter().filter(|(chi, _)| !chi.is_principal()) {
        let mut r = template.clone();
        r.variant = Some("T3".into());
        r.a = Some(chi.to_string());
        let ratio = s.norm() / denom;
        r.exact_value_or_log = Some(format!("{ratio}"));
        match t3_bound(p.x.x, table, &ctx, &chi, &config.constants) {
            Ok((b0, b1)) => {
                r.budget = Some(b0);
                r.error_over_budget = Some(ratio / b0);
                r.status = format!("ok; bound_theta1={b1}; re={}; im={}", s.re, s.im);
            }
            Err(e) => r.status = error_status(&e),
        }
        rows.push(r);
    }
    if rows.is_empty() {
        let mut r = template;
        r.variant = Some("T3".into());
        r.status = "no nonprincipal characters".into();
        rows.push(r);
    }
    rows
}

/// Computes every row, in grid order, on a pool of `config.jobs` workers.
pub fn run(config: &SweepConfig) -> Result<Vec<Row>> {
    config.validate()?;
    let pts = points(config);
    let work = || -> Vec<Row> {
        pts.par_iter()
            .map(|p| point_rows(config, p))
            .collect::<Vec<_>>()
            .concat()
    };
    match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))
            .map(|pool| pool.install(work)),
        None => Ok(work()),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[Row], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    for r in rows {
        let fields = [
            r.mode.clone(),
            r.x.clone(),
            r.log_x.to_string(),
            r.y.to_string(),
            r.q.to_string(),
            opt(&r.a),
            opt(&r.variant),
            r.regime.clone(),
            opt(&r.exact_value_or_log),
            opt(&r.est_log_main),
            opt(&r.rel_error),
            opt(&r.budget),
            opt(&r.error_over_budget),
            opt(&r.beta),
            opt(&r.sigma2),
            r.u.to_string(),
            r.eta.to_string(),
            opt(&r.omega_q),
            opt(&r.delta_q),
            opt(&r.d_q),
            opt(&r.c_q),
            r.status.clone(),
        ];
        let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Metadata<'a> {
    version: &'static str,
    config: &'a SweepConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<f64>,
}

#[derive(Serialize)]
struct JsonOutput<'a> {
    metadata: Metadata<'a>,
    rows: &'a [Row],
}

pub fn write_json<W: Write>(
    rows: &[Row],
    config: &SweepConfig,
    timing_ms: Option<f64>,
    w: W,
) -> std::io::Result<()> {
    let out = JsonOutput {
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION"),
            config,
            timing_ms: if config.timing { timing_ms } else { None },
        },
        rows,
    };
    serde_json::to_writer_pretty(w, &out)?;
    Ok(())
}
