//! Main terms and error budgets for `Upsilon_q(x, y)` and its progression
//! counterparts, and exact-versus-estimate comparison records.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::characters::DirichletCharacter;
use crate::counting::{count_friable, count_ultrafriable, gcd, CountValue};
use crate::error::{Error, Result};
use crate::primes::{classify_log, modulus_context, ModulusContext, PrimePowerTable, RegimeTag};
use crate::saddle::{self, SaddleResult};
use crate::special::gaussian_g;

/// Tunable constants. The theorems only assert that suitable values exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub epsilon: f64,
    /// `q <= y^{c0 / log log y}` in the small-`y` progression estimate.
    pub c0: f64,
    /// Rate in `exp(-c1 u / (log u)^4)`.
    pub c1: f64,
    /// Exponent in `log q / (u^{c2} log y)`.
    pub c2: f64,
    /// The explicit `omega(q)/sqrt(pi u)` correction applies when `eta sqrt(u)` is below this.
    pub t1iii_threshold: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            epsilon: crate::primes::DEFAULT_EPSILON,
            c0: 0.25,
            c1: 0.1,
            c2: 0.1,
            t1iii_threshold: 0.2,
        }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("c0", self.c0),
            ("c1", self.c1),
            ("c2", self.c2),
            ("t1iii_threshold", self.t1iii_threshold),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TheoremTag {
    T1i,
    T1ii,
    T1iii,
    T2,
    T3,
    T4,
    T5,
    R6,
    REMC,
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for TheoremTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "T1I" => Self::T1i,
            "T1II" => Self::T1ii,
            "T1III" => Self::T1iii,
            "T2" => Self::T2,
            "T3" => Self::T3,
            "T4" => Self::T4,
            "T5" => Self::T5,
            "R6" => Self::R6,
            "REMC" => Self::REMC,
            _ => return Err(Error::Domain(format!("unknown variant {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub u: f64,
    /// `psi(y)/log x - 2`; negative outside the small-`y` domain.
    pub eta: f64,
    pub theta_q: f64,
    pub delta_q: f64,
    /// 1 or 2: which expression defines `delta_q`.
    pub delta_branch: u8,
    /// The expression not selected, `NaN` when undefined.
    pub delta_q_other: f64,
    pub dd_q: f64,
    pub cc_q: f64,
    pub theorem_bound: f64,
    #[serde(serialize_with = "serialize_regime")]
    pub regime: RegimeTag,
}

fn serialize_regime<S: serde::Serializer>(
    r: &RegimeTag,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

fn delta_first(log_x: f64, log_y: f64, theta: f64, eta: f64) -> f64 {
    log_x.powf(theta) / log_y * (1.0 + 1.0 / (theta * eta.ln_1p()))
}

fn delta_second(u: f64, theta: f64) -> f64 {
    let l = (2.0 * u).ln();
    theta * (u * l).powf(theta) / (1.0 + theta * l)
}

/// `(1 + D^2)/u + D(1 + eta)/(sqrt u + eta u)`.
fn t1i_bound(u: f64, eta: f64, d: f64) -> f64 {
    (1.0 + d * d) / u + d * (1.0 + eta) / (u.sqrt() + eta * u)
}

fn error_budget_log(
    log_x: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
    eps: f64,
) -> ErrorBudget {
    let regime = classify_log(log_x, table, eps);
    let log_y = table.log_y();
    let u = log_x / log_y;
    let eta = table.psi() / log_x - 2.0;
    let theta = (ctx.z_q as f64).ln() / log_y;
    let first = if eta > 0.0 {
        delta_first(log_x, log_y, theta, eta)
    } else {
        f64::NAN
    };
    let second = delta_second(u, theta);
    let use_first = eta > 0.0 && table.psi() <= log_x * log_x;
    let (delta_q, delta_q_other, delta_branch) = if use_first {
        (first, second, 1)
    } else {
        (second, first, 2)
    };
    let omega = ctx.omega_q as f64;
    let dd_q = omega.min(delta_q);
    ErrorBudget {
        u,
        eta,
        theta_q: theta,
        delta_q,
        delta_branch,
        delta_q_other,
        dd_q,
        cc_q: omega.min(delta_q * delta_q),
        theorem_bound: t1i_bound(u, eta.max(0.0), dd_q),
        regime,
    }
}

/// Budget quantities at `x`; `theorem_bound` holds the general small-`y` term
/// `(1 + D_q^2)/u + D_q(1 + eta)/(sqrt u + eta u)`.
pub fn error_budget(
    x: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
    constants: &Constants,
) -> Result<ErrorBudget> {
    Ok(error_budget_log(log_of(x)?, table, ctx, constants.epsilon))
}

fn log_of(x: f64) -> Result<f64> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "x must be a finite real >= 2, got {x}"
        )));
    }
    Ok(x.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateBreakdown {
    /// Natural logarithm of the main term.
    pub log_main: f64,
    /// Logarithms of the factors whose sum is `log_main`.
    pub factors: BTreeMap<&'static str, f64>,
    /// Values reported alongside but not part of the product.
    pub info: BTreeMap<&'static str, f64>,
    pub saddle: Option<SaddleResult>,
    pub budget: ErrorBudget,
    pub theorem_tag: TheoremTag,
    /// Side conditions of the theorem that are reported rather than enforced.
    pub notes: Vec<String>,
}

impl EstimateBreakdown {
    fn new(tag: TheoremTag, budget: ErrorBudget, factors: BTreeMap<&'static str, f64>) -> Self {
        let log_main = factors.values().sum();
        Self {
            log_main,
            factors,
            info: BTreeMap::new(),
            saddle: None,
            budget,
            theorem_tag: tag,
            notes: Vec::new(),
        }
    }

    pub fn main(&self) -> f64 {
        self.log_main.exp()
    }

    pub fn beta(&self) -> Option<f64> {
        self.saddle.as_ref().map(|s| s.sigma)
    }
}

fn require_small_y(log_x: f64, table: &PrimePowerTable, what: &str) -> Result<()> {
    if table.psi() > 2.0 * log_x {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what} needs psi(y) > 2 log x; psi(y) = {:.6}, 2 log x = {:.6}",
            table.psi(),
            2.0 * log_x
        )))
    }
}

/// `x^beta Z_q(beta, y) G(beta sqrt(sigma_2))` in log form.
fn saddle_factors(
    log_x: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
) -> Result<(SaddleResult, BTreeMap<&'static str, f64>)> {
    let s = saddle::solve_beta_log(log_x, table)?;
    let beta = s.sigma;
    let mut factors = BTreeMap::new();
    factors.insert("x_pow_beta", beta * log_x);
    factors.insert("Z_q_beta", saddle::log_z_q(beta, table, ctx)?);
    factors.insert("G_factor", gaussian_g(beta * s.sigma2().sqrt())?.ln());
    Ok((s, factors))
}

/// `Upsilon(x, y) ~ x^beta Z(beta, y) G(beta sqrt(sigma_2))` with budget `1/u`.
pub fn estimate_upsilon(
    x: f64,
    table: &PrimePowerTable,
    constants: &Constants,
) -> Result<EstimateBreakdown> {
    let one = modulus_context(1, table)?;
    let mut est = estimate_upsilon_q(x, table, &one, TheoremTag::T1i, constants)?;
    est.budget.theorem_bound = 1.0 / est.budget.u;
    Ok(est)
}

/// `Upsilon_q(x, y)` through the saddle point: variants `T1i`, `T1ii`, `T1iii`, `REMC`.
pub fn estimate_upsilon_q(
    x: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
    variant: TheoremTag,
    constants: &Constants,
) -> Result<EstimateBreakdown> {
    let log_x = log_of(x)?;
    ctx.require_y_friable(table.y())?;
    require_small_y(log_x, table, "the saddle-point estimate")?;
    let mut budget = error_budget_log(log_x, table, ctx, constants.epsilon);
    let (u, eta) = (budget.u, budget.eta);
    let omega = ctx.omega_q as f64;
    let mut notes = Vec::new();
    let correction = match variant {
        TheoremTag::T1i => None,
        TheoremTag::T1ii => {
            if eta > 0.5 {
                return Err(Error::Domain(format!(
                    "T1ii needs eta <= 1/2, got eta = {eta:.6}"
                )));
            }
            None
        }
        TheoremTag::T1iii => {
            let e = eta * u.sqrt();
            if e >= constants.t1iii_threshold {
                return Err(Error::Domain(format!(
                    "T1iii needs eta sqrt(u) < {}, got {e:.6}",
                    constants.t1iii_threshold
                )));
            }
            Some(omega / (std::f64::consts::PI * u).sqrt())
        }
        TheoremTag::REMC => {
            if !budget.regime.large_y {
                return Err(Error::Domain(format!(
                    "REMC needs y >= (log x)^(2+eps) with eps = {}",
                    constants.epsilon
                )));
            }
            let y = table.y() as f64;
            if omega > y.sqrt() / table.log_y() {
                notes.push("omega(q) exceeds sqrt(y)/log y".to_string());
            }
            None
        }
        other => {
            return Err(Error::Domain(format!(
                "{other} is not a saddle-point variant"
            )))
        }
    };
    if table.psi().ln() > log_x.powf(0.2) {
        notes.push("psi(y) exceeds exp((log x)^(1/5)), outside the proven range".to_string());
    }
    let q = ctx.q as f64;
    let phi = ctx.phi_q as f64;
    let log_y = table.log_y();
    budget.theorem_bound = match variant {
        TheoremTag::T1ii => (1.0 + omega * omega) / u + omega * (1.0 + eta) / (u.sqrt() + eta * u),
        TheoremTag::T1iii => eta.abs() * omega + q.ln() / (u.sqrt() * log_y) + omega * omega / u,
        TheoremTag::REMC => {
            let l = (2.0 * u).ln();
            q * u * l / (phi * (table.y() as f64).sqrt() * log_y) + 1.0 / u
        }
        _ => budget.theorem_bound,
    };
    let (s, mut factors) = saddle_factors(log_x, table, ctx)?;
    if let Some(c) = correction {
        factors.insert("correction_T1iii", c.ln_1p());
    }
    let g = saddle::arithmetic_factors(s.sigma, ctx, table, None)?;
    let mut est = EstimateBreakdown::new(variant, budget, factors);
    est.info.insert("g_q_beta", g.g_q);
    est.info.insert("beta", s.sigma);
    est.info.insert("sigma2", s.sigma2());
    est.saddle = Some(s);
    est.notes = notes;
    Ok(est)
}

/// Large-`y` comparison with the exact friable count `Psi_q(x, y)` as main term.
pub fn estimate_t2(
    x: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
    constants: &Constants,
) -> Result<EstimateBreakdown> {
    let log_x = log_of(x)?;
    ctx.require_y_friable(table.y())?;
    let mut budget = error_budget_log(log_x, table, ctx, constants.epsilon);
    if !budget.regime.large_y {
        return Err(Error::Domain(format!(
            "T2 needs y >= (log x)^(2+eps) with eps = {}",
            constants.epsilon
        )));
    }
    let psi = count_friable(x, table.y(), ctx.q)?;
    if psi.is_zero() {
        return Err(Error::Domain("Psi_q(x, y) = 0".into()));
    }
    let u = budget.u;
    let y = table.y() as f64;
    budget.theorem_bound =
        ctx.q as f64 * u * (2.0 * u).ln() / (ctx.phi_q as f64 * y.sqrt() * table.log_y());
    let mut factors = BTreeMap::new();
    factors.insert("reference", psi.ln());
    let mut est = EstimateBreakdown::new(TheoremTag::T2, budget, factors);
    if ctx.omega_q as f64 > y.sqrt() {
        est.notes.push("omega(q) exceeds sqrt(y)".to_string());
    }
    Ok(est)
}

/// `exp(-c1 u/(log u)^4) + 1/Y_eps`.
fn t4_bound(u: f64, table: &PrimePowerTable, constants: &Constants) -> f64 {
    let lu = u.ln().powi(4);
    (-constants.c1 * u / lu).exp() + 1.0 / saddle::y_epsilon(table.y() as f64, constants.epsilon)
}

/// `Upsilon(x, y; a, q) ~ Upsilon_q(x, y)/phi(q)` for `(a, q) = 1`, variants `T4` (small `y`) and `T5` (large `y`).
pub fn estimate_progression(
    x: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
    a: u64,
    variant: TheoremTag,
    constants: &Constants,
) -> Result<EstimateBreakdown> {
    let log_x = log_of(x)?;
    ctx.require_y_friable(table.y())?;
    if gcd(a % ctx.q, ctx.q) != 1 {
        return Err(Error::Domain(format!(
            "(a, q) = ({a}, {}) > 1; use the non-coprime estimate",
            ctx.q
        )));
    }
    let mut budget = error_budget_log(log_x, table, ctx, constants.epsilon);
    let u = budget.u;
    let log_y = table.log_y();
    let q = ctx.q as f64;
    match variant {
        TheoremTag::T4 => {
            require_small_y(log_x, table, "T4")?;
            let limit = (constants.c0 / log_y.ln() * log_y).exp();
            if q > limit {
                return Err(Error::Domain(format!(
                    "T4 needs q <= y^(c0/log log y) = {limit:.4} with c0 = {}",
                    constants.c0
                )));
            }
            budget.theorem_bound = t4_bound(u, table, constants);
        }
        TheoremTag::T5 => {
            if !budget.regime.large_y {
                return Err(Error::Domain(format!(
                    "T5 needs y >= (log x)^(2+eps) with eps = {}",
                    constants.epsilon
                )));
            }
            if q * q > table.y() as f64 {
                return Err(Error::Domain(format!(
                    "T5 needs q <= sqrt(y), got q = {}",
                    ctx.q
                )));
            }
            budget.theorem_bound = q.ln() / (u.powf(constants.c2) * log_y) + 1.0 / log_y;
        }
        other => {
            return Err(Error::Domain(format!(
                "{other} is not a progression variant"
            )))
        }
    }
    let reference = count_ultrafriable(x, table, ctx)?;
    if reference.is_zero() {
        return Err(Error::Domain("Upsilon_q(x, y) = 0".into()));
    }
    let mut factors = BTreeMap::new();
    factors.insert("reference", reference.ln());
    factors.insert("phi_q", -(ctx.phi_q as f64).ln());
    Ok(EstimateBreakdown::new(variant, budget, factors))
}

/// `Upsilon(x, y; a, q) ~ h_d(beta) Upsilon_{q/d}(x/d, y)/phi(q/d)` for
/// `d = (a, q)` squarefree with `(q/d, d) = 1`.
///
/// `beta = beta(x, y)` when `psi(y) > 2 log x`; otherwise `beta(x/d, y)` is
/// used when it exists, and a note records the substitution.
pub fn estimate_noncoprime(
    x: f64,
    table: &PrimePowerTable,
    q: u64,
    a: u64,
    constants: &Constants,
) -> Result<EstimateBreakdown> {
    let log_x = log_of(x)?;
    if q == 0 {
        return Err(Error::Domain("modulus q must be positive".into()));
    }
    let ctx = modulus_context(q, table)?;
    ctx.require_y_friable(table.y())?;
    let d = gcd(a % q, q);
    let e = q / d;
    if gcd(e, d) != 1 || ctx.prime_divisors.iter().any(|&p| d.is_multiple_of(p * p)) {
        return Err(Error::Unsupported(format!(
            "d = (a, q) = {d} must be squarefree and coprime to q/d = {e}"
        )));
    }
    let log_d = (d as f64).ln();
    let mut notes = Vec::new();
    let s = if table.psi() > 2.0 * log_x {
        saddle::solve_beta_log(log_x, table)?
    } else {
        let s = saddle::solve_beta_log(log_x - log_d, table)?;
        notes.push("beta(x, y) undefined; h_d evaluated at beta(x/d, y)".to_string());
        s
    };
    let h_d = saddle::arithmetic_factors(s.sigma, &ctx, table, Some(d))?.h_d;
    let sub = modulus_context(e, table)?;
    let reference = count_ultrafriable(x / d as f64, table, &sub)?;
    if reference.is_zero() {
        return Err(Error::Domain(format!("Upsilon_{e}(x/{d}, y) = 0")));
    }
    let mut budget = error_budget_log(log_x, table, &ctx, constants.epsilon);
    budget.theorem_bound = t4_bound(budget.u, table, constants);
    let mut factors = BTreeMap::new();
    factors.insert("h_d", h_d.ln());
    factors.insert("reference", reference.ln());
    factors.insert("phi_q", -(sub.phi_q as f64).ln());
    let tag = if d == 1 {
        TheoremTag::T4
    } else {
        TheoremTag::R6
    };
    let mut est = EstimateBreakdown::new(tag, budget, factors);
    est.info.insert("d", d as f64);
    est.saddle = Some(s);
    est.notes = notes;
    Ok(est)
}

/// The bracket `exp(-c1 u/(1 + theta (log u)^4)) + 1/Y_eps` of the character
/// sum bound, for `theta = 0` and `theta = 1`.
pub fn t3_bound(
    x: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
    chi: &DirichletCharacter,
    constants: &Constants,
) -> Result<(f64, f64)> {
    let log_x = log_of(x)?;
    if chi.is_principal() {
        return Err(Error::Domain(
            "the character-sum bound needs a nonprincipal character".into(),
        ));
    }
    if chi.modulus() != ctx.q {
        return Err(Error::Domain(format!(
            "character modulus {} differs from q = {}",
            chi.modulus(),
            ctx.q
        )));
    }
    require_small_y(log_x, table, "the character-sum bound")?;
    let u = log_x / table.log_y();
    let floor = 1.0 / saddle::y_epsilon(table.y() as f64, constants.epsilon);
    let lu = u.ln().powi(4);
    let bound = |theta: f64| (-constants.c1 * u / (1.0 + theta * lu)).exp() + floor;
    Ok((bound(0.0), bound(1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub exact: CountValue,
    pub log_exact: f64,
    pub log_main: f64,
    /// `(exact - main)/exact`.
    pub rel_error: f64,
    pub budget: f64,
    pub error_over_budget: f64,
    pub theorem_tag: TheoremTag,
    /// Set when `exact = 0`, in which case the ratios are `NaN`.
    pub degenerate: bool,
}

pub fn compare(exact: &CountValue, est: &EstimateBreakdown) -> ComparisonRecord {
    let budget = est.budget.theorem_bound;
    if exact.is_zero() {
        return ComparisonRecord {
            exact: exact.clone(),
            log_exact: f64::NEG_INFINITY,
            log_main: est.log_main,
            rel_error: f64::NAN,
            budget,
            error_over_budget: f64::NAN,
            theorem_tag: est.theorem_tag,
            degenerate: true,
        };
    }
    let log_exact = exact.ln();
    let rel_error = -(est.log_main - log_exact).exp_m1();
    ComparisonRecord {
        exact: exact.clone(),
        log_exact,
        log_main: est.log_main,
        rel_error,
        budget,
        error_over_budget: rel_error.abs() / budget,
        theorem_tag: est.theorem_tag,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;

    fn table(y: u64) -> PrimePowerTable {
        PrimePowerTable::build(y).unwrap()
    }

    fn k() -> Constants {
        Constants::default()
    }

    #[test]
    fn budget_q1() {
        let t = table(100);
        let one = modulus_context(1, &t).unwrap();
        let b = error_budget(1e6, &t, &one, &k()).unwrap();
        assert_eq!(b.dd_q, 0.0);
        assert_eq!(b.cc_q, 0.0);
        assert!((b.theta_q - 2f64.ln() / t.log_y()).abs() < 1e-15);
    }

    #[test]
    fn delta_branches_independently_computed() {
        let t = table(100);
        let six = modulus_context(6, &t).unwrap();
        let x: f64 = 1e6;
        let b = error_budget(x, &t, &six, &k()).unwrap();
        assert_eq!(b.delta_branch, 1);
        // second implementation, written out directly
        let lx = x.ln();
        let ly = 100f64.ln();
        let theta = 3f64.ln() / ly;
        let eta = t.psi() / lx - 2.0;
        let first = lx.powf(theta) / ly + lx.powf(theta) / (ly * theta * (1.0 + eta).ln());
        assert!((b.delta_q - first).abs() < 1e-12 * first);
        let u = lx / ly;
        let second = theta * (u * (2.0 * u).ln()).powf(theta) / (1.0 + theta * (2.0 * u).ln());
        assert!((b.delta_q_other - second).abs() < 1e-12 * second);
        assert!(b.dd_q <= 2.0 && b.cc_q <= b.dd_q * b.dd_q + 1e-15);

        let t = table(1000);
        let six = modulus_context(6, &t).unwrap();
        assert_eq!(error_budget(1e4, &t, &six, &k()).unwrap().delta_branch, 2);
    }

    #[test]
    fn d_q_monotone_in_omega() {
        // Delta_q itself is not monotone: (log x)^theta/theta dips while
        // theta < 1/log log x (here between omega = 1 and omega = 2).
        let t = table(100);
        let x = (30.0f64).exp();
        let mut prev = 0.0;
        let mut deltas = Vec::new();
        for q in [1u64, 2, 6, 30, 210, 2310] {
            let ctx = modulus_context(q, &t).unwrap();
            let b = error_budget(x, &t, &ctx, &k()).unwrap();
            assert!(b.dd_q >= prev);
            prev = b.dd_q;
            deltas.push(b.delta_q);
        }
        assert!(deltas[2] < deltas[1]);
    }

    #[test]
    fn upsilon_at_100_10() {
        // psi(10) = 7.83 < 2 log 100, so the saddle estimate does not apply
        let t = table(10);
        assert!(estimate_upsilon(100.0, &t, &k()).is_err());
        let est = estimate_upsilon(20.0, &t, &k()).unwrap();
        assert!(est.log_main.is_finite());
    }

    #[test]
    fn factors_sum_to_log_main() {
        let t = table(100);
        let ctx = modulus_context(6, &t).unwrap();
        let est = estimate_upsilon_q((30.0f64).exp(), &t, &ctx, TheoremTag::T1i, &k()).unwrap();
        let sum: f64 = est.factors.values().sum();
        assert!((sum - est.log_main).abs() <= 1e-12 * est.log_main.abs());
        assert!(est.main() > 0.0 && est.main().is_finite());
    }

    #[test]
    fn g_consistency() {
        let t = table(100);
        let x = (30.0f64).exp();
        let base = estimate_upsilon(x, &t, &k()).unwrap();
        for q in [6u64, 30] {
            let ctx = modulus_context(q, &t).unwrap();
            let est = estimate_upsilon_q(x, &t, &ctx, TheoremTag::T1i, &k()).unwrap();
            let via_g = est.info["g_q_beta"].ln() + base.log_main;
            assert!((via_g - est.log_main).abs() <= 1e-11 * est.log_main.abs());
        }
    }

    #[test]
    fn q1_variants_agree() {
        let t = table(100);
        let one = modulus_context(1, &t).unwrap();
        let x = (40.0f64).exp();
        let base = estimate_upsilon(x, &t, &k()).unwrap();
        let est = estimate_upsilon_q(x, &t, &one, TheoremTag::T1i, &k()).unwrap();
        assert_eq!(base.log_main, est.log_main);
    }

    #[test]
    fn t1iii_with_zero_omega_is_t1i() {
        // near the boundary eta sqrt(u) is small
        let t = table(100);
        let one = modulus_context(1, &t).unwrap();
        let x = (t.psi() / 2.0 * 0.999).exp();
        let a = estimate_upsilon_q(x, &t, &one, TheoremTag::T1i, &k()).unwrap();
        let b = estimate_upsilon_q(x, &t, &one, TheoremTag::T1iii, &k()).unwrap();
        assert_eq!(a.log_main, b.log_main);
        let six = modulus_context(6, &t).unwrap();
        let c = estimate_upsilon_q(x, &t, &six, TheoremTag::T1iii, &k()).unwrap();
        assert!(c.factors["correction_T1iii"] > 0.0);
        assert!(estimate_upsilon_q((20.0f64).exp(), &t, &six, TheoremTag::T1iii, &k()).is_err());
        assert!(estimate_upsilon_q((20.0f64).exp(), &t, &six, TheoremTag::T1ii, &k()).is_err());
    }

    #[test]
    fn remark_a_band() {
        // 0 < eta <= 1: Delta_q comparable to (1 + omega)/eta
        let t = table(100);
        for q in [1u64, 6, 30] {
            let ctx = modulus_context(q, &t).unwrap();
            for frac in [0.34, 0.4, 0.45, 0.49] {
                let x = (t.psi() * frac).exp();
                let b = error_budget(x, &t, &ctx, &k()).unwrap();
                assert!(b.eta > 0.0 && b.eta <= 1.0);
                let r = b.delta_q / ((1.0 + ctx.omega_q as f64) / b.eta);
                assert!(r > 0.01 && r < 10.0, "q={q} frac={frac}: {r}");
            }
        }
    }

    #[test]
    fn t2_zero_difference_when_y_exceeds_x() {
        let t = table(2000);
        let one = modulus_context(1, &t).unwrap();
        let est = estimate_t2(1500.0, &t, &one, &k()).unwrap();
        let exact = count_ultrafriable(1500.0, &t, &one).unwrap();
        assert_eq!(compare(&exact, &est).rel_error, 0.0);
    }

    #[test]
    fn progression_checks() {
        let t = table(100);
        let one = modulus_context(1, &t).unwrap();
        let x = (30.0f64).exp();
        let est = estimate_progression(x, &t, &one, 0, TheoremTag::T4, &k()).unwrap();
        let exact = count_ultrafriable(x, &t, &one).unwrap();
        assert!(compare(&exact, &est).rel_error.abs() < 1e-15);

        let seven = modulus_context(7, &t).unwrap();
        assert!(estimate_progression(x, &t, &seven, 3, TheoremTag::T4, &k()).is_err());
        let wide = Constants { c0: 1.0, ..k() };
        assert!(estimate_progression(x, &t, &seven, 3, TheoremTag::T4, &wide).is_ok());
        assert!(estimate_progression(x, &t, &seven, 14, TheoremTag::T4, &wide).is_err());
    }

    #[test]
    fn noncoprime_cases() {
        let t = table(50);
        let x = (25.0f64).exp();
        for (q, a) in [(6u64, 2u64), (15, 5), (10, 4)] {
            let est = estimate_noncoprime(x, &t, q, a, &k()).unwrap();
            assert_eq!(est.theorem_tag, TheoremTag::R6);
            assert!(est.notes.iter().any(|n| n.contains("x/d")));
            assert!(est.factors["h_d"] < 0.0);
        }
        assert!(matches!(
            estimate_noncoprime(x, &t, 12, 2, &k()),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            estimate_noncoprime(x, &t, 8, 4, &k()),
            Err(Error::Unsupported(_))
        ));
        let t = table(100);
        let x = (30.0f64).exp();
        let wide = Constants { c0: 1.0, ..k() };
        let five = modulus_context(5, &t).unwrap();
        let a = estimate_noncoprime(x, &t, 5, 2, &wide).unwrap();
        let b = estimate_progression(x, &t, &five, 2, TheoremTag::T4, &wide).unwrap();
        assert!((a.log_main - b.log_main).abs() < 1e-12);
    }

    #[test]
    fn t3_bounds() {
        let t = table(100);
        let ctx = modulus_context(3, &t).unwrap();
        let chars = enumerate_characters(3).unwrap();
        assert!(t3_bound(1e10, &t, &ctx, &chars[0], &k()).is_err());
        let mut prev = f64::INFINITY;
        for lx in [20.0f64, 30.0, 40.0] {
            let (b0, b1) = t3_bound(lx.exp(), &t, &ctx, &chars[1], &k()).unwrap();
            assert!(b1 >= b0);
            assert!(b0 < prev);
            prev = b0;
        }
    }

    #[test]
    fn compare_arithmetic() {
        let t = table(100);
        let one = modulus_context(1, &t).unwrap();
        let mut est = estimate_upsilon_q(1e10, &t, &one, TheoremTag::T1i, &k()).unwrap();
        est.log_main = 50f64.ln();
        let r = compare(&CountValue::from(48u64), &est);
        assert!((r.rel_error + 1.0 / 24.0).abs() < 1e-15);
        est.log_main = 48f64.ln();
        assert_eq!(compare(&CountValue::from(48u64), &est).rel_error, 0.0);
        assert!(compare(&CountValue::from(0u64), &est).degenerate);
    }

    #[test]
    fn tags_round_trip() {
        for tag in [
            TheoremTag::T1i,
            TheoremTag::T1iii,
            TheoremTag::REMC,
            TheoremTag::R6,
        ] {
            assert_eq!(tag.to_string().parse::<TheoremTag>().unwrap(), tag);
        }
        assert!("T9".parse::<TheoremTag>().is_err());
    }
}
