//! Empirical constants for the asymptotic statements.
//!
//! Each statistic below is a function of a grid. `calibrate` evaluates them on
//! training grids and freezes the observed extreme with a factor 2 of
//! headroom; the acceptance suite evaluates the same statistics on its own
//! grids against the frozen values.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::characters::all_character_sums;
use crate::counting::{count_friable, count_ultrafriable, count_ultrafriable_residues, gcd};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_noncoprime, estimate_progression, estimate_upsilon_q, Constants, TheoremTag,
};
use crate::primes::{modulus_context, PrimePowerTable};
use crate::saddle::{self, l_epsilon};

/// Headroom applied to every observed extreme.
pub const HEADROOM: f64 = 2.0;

/// `|exact/main - 1|` from logarithms.
fn deviation(log_exact: f64, log_main: f64) -> f64 {
    (log_exact - log_main).exp_m1().abs()
}

/// `log x` values `from, ..., to` in `n` equal steps.
pub fn log_grid(from: f64, to: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![from];
    }
    (0..n)
        .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandPoint {
    pub label: String,
    /// Observed deviation from the main term.
    pub deviation: f64,
    /// The theorem's error term at the point.
    pub budget: f64,
}

impl BandPoint {
    pub fn ratio(&self) -> f64 {
        self.deviation / self.budget
    }
}

/// Saddle-point estimate of `Upsilon_q(x, y)` against the exact count, budget
/// `(1 + D_q^2)/u + D_q(1 + eta)/(sqrt u + eta u)`.
pub fn t1_points(
    y: u64,
    qs: &[u64],
    log_xs: &[f64],
    constants: &Constants,
) -> Result<Vec<BandPoint>> {
    let table = PrimePowerTable::build(y)?;
    let mut out = Vec::new();
    for &q in qs {
        let ctx = modulus_context(q, &table)?;
        for &lx in log_xs {
            let x = lx.exp();
            let est = estimate_upsilon_q(x, &table, &ctx, TheoremTag::T1i, constants)?;
            let exact = count_ultrafriable(x, &table, &ctx)?;
            out.push(BandPoint {
                label: format!("y={y} q={q} log_x={lx:.4} u={:.4}", est.budget.u),
                deviation: deviation(exact.ln(), est.log_main),
                budget: est.budget.theorem_bound,
            });
        }
    }
    Ok(out)
}

/// `|Upsilon_q/Psi_q - 1|` against `q u log 2u/(phi(q) sqrt(y) log y)`.
pub fn t2_points(x: f64, ys: &[u64], qs: &[u64]) -> Result<Vec<BandPoint>> {
    let mut out = Vec::new();
    for &y in ys {
        let table = PrimePowerTable::build(y)?;
        for &q in qs {
            let ctx = modulus_context(q, &table)?;
            let ups = count_ultrafriable(x, &table, &ctx)?;
            let psi = count_friable(x, y, q)?;
            let u = x.ln() / table.log_y();
            let bound = q as f64 * u * (2.0 * u).ln()
                / (ctx.phi_q as f64 * (y as f64).sqrt() * table.log_y());
            out.push(BandPoint {
                label: format!("x={x} y={y} q={q}"),
                deviation: deviation(ups.ln(), psi.ln()),
                budget: bound,
            });
        }
    }
    Ok(out)
}

/// `|Upsilon(x, y; a, q) phi(q)/Upsilon_q - 1|` for every `a` coprime to `q`,
/// with the `T4` or `T5` budget.
pub fn progression_points(
    x: f64,
    y: u64,
    q: u64,
    variant: TheoremTag,
    constants: &Constants,
) -> Result<Vec<BandPoint>> {
    let table = PrimePowerTable::build(y)?;
    let ctx = modulus_context(q, &table)?;
    let counts = count_ultrafriable_residues(x, &table, q)?;
    let mut out = Vec::new();
    for a in (1..q).filter(|&a| gcd(a, q) == 1) {
        let est = estimate_progression(x, &table, &ctx, a, variant, constants)?;
        out.push(BandPoint {
            label: format!("{variant} log_x={:.4} y={y} q={q} a={a}", x.ln()),
            deviation: deviation(counts.get(a).ln(), est.log_main),
            budget: est.budget.theorem_bound,
        });
    }
    Ok(out)
}

/// The non-coprime residue estimate against the exact residue count.
pub fn noncoprime_point(
    x: f64,
    y: u64,
    q: u64,
    a: u64,
    constants: &Constants,
) -> Result<BandPoint> {
    let table = PrimePowerTable::build(y)?;
    let est = estimate_noncoprime(x, &table, q, a, constants)?;
    let exact = count_ultrafriable_residues(x, &table, q)?;
    Ok(BandPoint {
        label: format!("log_x={:.4} y={y} q={q} a={a}", x.ln()),
        deviation: deviation(exact.get(a).ln(), est.log_main),
        budget: est.budget.theorem_bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterRatio {
    pub label: String,
    /// `|Upsilon(x, y; chi)| / Upsilon_q(x, y)`.
    pub ratio: f64,
    pub u: f64,
}

/// Exact ratios for every nonprincipal character modulo `q`.
pub fn character_ratios(x: f64, y: u64, q: u64) -> Result<Vec<CharacterRatio>> {
    let table = PrimePowerTable::build(y)?;
    let (total, sums) = all_character_sums(x, &table, q)?;
    let denom = total.to_f64();
    let u = x.ln() / table.log_y();
    Ok(sums
        .into_iter()
        .filter(|(chi, _)| !chi.is_principal())
        .map(|(chi, s)| CharacterRatio {
            label: format!("q={q} chi={chi}"),
            ratio: s.norm() / denom,
            u,
        })
        .collect())
}

/// Largest `c1` with `ratio <= exp(-c1 u/(1 + (log u)^4)) + 1/Y_eps`.
///
/// A ratio already under the floor `1/Y_eps` constrains nothing; the
/// exponential is then pinned to the floor itself, the point past which a
/// larger `c1` no longer changes the bound.
pub fn max_c1(r: &CharacterRatio, y: u64, epsilon: f64) -> f64 {
    let floor = 1.0 / saddle::y_epsilon(y as f64, epsilon);
    let excess = (r.ratio - floor).max(floor);
    -excess.ln() * (1.0 + r.u.ln().powi(4)) / r.u
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleShape {
    /// `|beta/(log(1 + eta)/log y) - 1| log y`.
    pub beta_small_y: f64,
    /// `(1 - beta) log y / log 2u`.
    pub one_minus_beta: f64,
    /// `y^{1 - beta}/(u log 2u)`.
    pub y_pow: f64,
}

/// Shape statistics of `beta` at `log x = u log y`, or `None` when that point
/// is outside `u >= 1`, `log x <= 0.45 psi(y)`.
pub fn saddle_shape(y: u64, u: f64) -> Result<Option<SaddleShape>> {
    let table = PrimePowerTable::build(y)?;
    let log_y = table.log_y();
    let log_x = u * log_y;
    if u < 1.0 || log_x > 0.45 * table.psi() {
        return Ok(None);
    }
    let beta = saddle::solve_beta_log(log_x, &table)?.sigma;
    let l2u = (2.0 * u).ln();
    let approx = saddle::beta_small_y_approx(log_x, &table);
    Ok(Some(SaddleShape {
        beta_small_y: (beta / approx - 1.0).abs() * log_y,
        one_minus_beta: (1.0 - beta) * log_y / l2u,
        y_pow: ((1.0 - beta) * log_y).exp() / (u * l2u),
    }))
}

/// Every in-range shape point on `ys x us`.
pub fn saddle_shapes(ys: &[u64], us: &[f64]) -> Result<Vec<SaddleShape>> {
    let mut out = Vec::new();
    for &y in ys {
        for &u in us {
            out.extend(saddle_shape(y, u)?);
        }
    }
    Ok(out)
}

/// `|alpha - (1 - xi(u)/log y)|` in units of `1/(u (log y)^2) + 1/L_eps(y)`.
pub fn alpha_band(x: f64, y: u64, epsilon: f64) -> Result<f64> {
    let table = PrimePowerTable::build(y)?;
    let alpha = saddle::solve_alpha(x, &table)?.sigma;
    let log_y = table.log_y();
    let u = x.ln() / log_y;
    let approx = saddle::saddle_large_y_approx(x.ln(), log_y)?;
    let unit = 1.0 / (u * log_y * log_y) + 1.0 / l_epsilon(y as f64, epsilon);
    Ok((alpha - approx).abs() / unit)
}

/// Parameters the calibration sweep runs with; `c0` is widened so that the
/// small-`y` progression estimate admits the moduli of interest.
pub fn calibration_constants() -> Constants {
    Constants {
        c0: 1.0,
        ..Constants::default()
    }
}

fn max_ratio(points: &[BandPoint]) -> f64 {
    points.iter().map(BandPoint::ratio).fold(0.0, f64::max)
}

/// Runs every training sweep and returns the frozen constants.
pub fn calibrate(constants: &Constants) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();

    let mut t1 = Vec::new();
    for y in [90u64, 110] {
        let table = PrimePowerTable::build(y)?;
        let top = (table.psi() / 2.0 - 2.5).min(40.0);
        t1.extend(t1_points(
            y,
            &[1, 2, 10, 42],
            &log_grid(18.0, top, 8),
            constants,
        )?);
    }
    out.insert("t1_c".to_string(), HEADROOM * max_ratio(&t1));

    let t2 = t2_points(1e6, &[700, 1500, 3000], &[1, 3, 10, 30])?;
    out.insert("t2_c".to_string(), HEADROOM * max_ratio(&t2));

    let mut t4 = Vec::new();
    for lx in [25.0f64, 35.0] {
        for q in [4u64, 5, 8, 9, 13, 16, 17, 19] {
            t4.extend(progression_points(
                lx.exp(),
                100,
                q,
                TheoremTag::T4,
                constants,
            )?);
        }
    }
    out.insert("t4_c".to_string(), HEADROOM * max_ratio(&t4));

    let mut t5 = Vec::new();
    // the statistic is a maximum of residue-class noise, so it needs many moduli
    for q in [4u64, 5, 7, 8, 9, 13, 16, 17, 19, 23, 29] {
        t5.extend(progression_points(1e6, 1000, q, TheoremTag::T5, constants)?);
    }
    out.insert("t5_c".to_string(), HEADROOM * max_ratio(&t5));

    let r6: Vec<BandPoint> = [(14u64, 2u64), (21, 7), (35, 5)]
        .iter()
        .map(|&(q, a)| noncoprime_point((25.0f64).exp(), 50, q, a, constants))
        .collect::<Result<_>>()?;
    out.insert("r6_c".to_string(), HEADROOM * max_ratio(&r6));

    let mut c1 = f64::INFINITY;
    for q in [4u64, 9, 13] {
        for r in character_ratios((30.0f64).exp(), 100, q)? {
            c1 = c1.min(max_c1(&r, 100, constants.epsilon));
        }
    }
    out.insert("t3_c1".to_string(), c1 / HEADROOM);

    let shapes = saddle_shapes(
        &[50, 150, 600, 3000, 20_000],
        &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
    )?;
    let fold = |f: fn(&SaddleShape) -> f64, init: f64, g: fn(f64, f64) -> f64| {
        shapes.iter().map(f).fold(init, g)
    };
    out.insert(
        "beta_small_y_k".to_string(),
        HEADROOM * fold(|s| s.beta_small_y, 0.0, f64::max),
    );
    out.insert(
        "one_minus_beta_lo".to_string(),
        fold(|s| s.one_minus_beta, f64::INFINITY, f64::min) / HEADROOM,
    );
    out.insert(
        "one_minus_beta_hi".to_string(),
        HEADROOM * fold(|s| s.one_minus_beta, 0.0, f64::max),
    );
    out.insert(
        "y_pow_lo".to_string(),
        fold(|s| s.y_pow, f64::INFINITY, f64::min) / HEADROOM,
    );
    out.insert(
        "y_pow_hi".to_string(),
        HEADROOM * fold(|s| s.y_pow, 0.0, f64::max),
    );

    let mut alpha = 0.0f64;
    for (x, y) in [(1e7, 3000u64), (1e9, 20_000), (1e10, 5000)] {
        alpha = alpha.max(alpha_band(x, y, constants.epsilon)?);
    }
    out.insert("alpha_k".to_string(), HEADROOM * alpha);
    Ok(out)
}

/// `key=value` lines in key order.
pub fn format_constants(values: &BTreeMap<String, f64>) -> String {
    let mut s = String::new();
    for (k, v) in values {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_constants(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Domain(format!("line {}: expected key=value", n + 1)))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("line {}: bad number {v:?}", n + 1)))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}
