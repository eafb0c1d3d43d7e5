//! Saddle points `alpha`, `beta`, the finite Euler product `Z_q(s, y)` and its
//! logarithmic derivatives, and the arithmetic correction factors.
//!
//! Each prime contributes `log Z_p(s) = log(1 - p^{-(nu+1)s}) - log(1 - p^{-s})`.
//! With `t = s log p` and `P_j(t) = sum_k k^{j-1} e^{-kt}`, the `j`-th
//! derivative term is `(log p)^j [P_j(t) - (nu+1)^j P_j((nu+1)t)]`. Both
//! `P_j` have the pole `(j-1)!/t^j`, which cancels exactly, so the code works
//! with the regular part `R_j(t) = P_j(t) - (j-1)!/t^j`.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::{ModulusContext, PrimePowerTable};
use crate::roots;

/// Below this `t` the regular parts come from their Taylor series.
const SERIES_CUTOFF: f64 = 2.0;
const SERIES_TERMS: usize = 20;

/// Below `sigma log y` of this size, `gamma_q'` and `gamma_q''` take their
/// limiting values at 0.
pub const GAMMA_CROSSOVER: f64 = 1e-6;

/// Target relative residual of the saddle-point solvers.
pub const SADDLE_TOLERANCE: f64 = 1e-10;

/// `c_k = B_{2k}/(2k)! = (-1)^{k+1} 2 zeta(2k)/(2 pi)^{2k}`.
fn bernoulli_coefficients() -> &'static [f64; SERIES_TERMS] {
    static C: OnceLock<[f64; SERIES_TERMS]> = OnceLock::new();
    C.get_or_init(|| {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut c = [0.0; SERIES_TERMS];
        for (i, ck) in c.iter_mut().enumerate() {
            let k = i + 1;
            let zeta = match k {
                1 => std::f64::consts::PI.powi(2) / 6.0,
                2 => std::f64::consts::PI.powi(4) / 90.0,
                _ => (1..=2000)
                    .rev()
                    .map(|n| (n as f64).powi(-2 * k as i32))
                    .sum(),
            };
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *ck = sign * 2.0 * zeta / two_pi.powi(2 * k as i32);
        }
        c
    })
}

/// `R_j(t)` for `j = 1..=4`, `t >= 0`.
fn regular_part(j: u32, t: f64) -> f64 {
    debug_assert!((1..=4).contains(&j));
    if t < SERIES_CUTOFF {
        // R_1(t) = -1/2 + sum c_k t^{2k-1}, R_j = (-1)^{j-1} R_1^{(j-1)}
        let c = bernoulli_coefficients();
        let mut sum = 0.0;
        for (i, &ck) in c.iter().enumerate() {
            let n = 2 * (i as i32 + 1) - 1;
            // d^{j-1}/dt^{j-1} t^n
            let m = n - (j as i32 - 1);
            if m < 0 {
                continue;
            }
            let falling: f64 = (0..(j as i32 - 1)).map(|r| (n - r) as f64).product();
            sum += ck * falling * t.powi(m);
        }
        let constant = if j == 1 { -0.5 } else { 0.0 };
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        sign * (constant + sum)
    } else {
        let b = 1.0 / t.exp_m1();
        let p = match j {
            1 => b,
            2 => b * (1.0 + b),
            3 => b * (1.0 + b) * (1.0 + 2.0 * b),
            _ => b * (1.0 + b) * (1.0 + 6.0 * b + 6.0 * b * b),
        };
        let factorial = [1.0, 1.0, 2.0, 6.0][j as usize - 1];
        p - factorial / t.powi(j as i32)
    }
}

/// `P_j(t) = sum_k k^{j-1} e^{-kt}` for `t > 0`.
fn pole_part(j: u32, t: f64) -> f64 {
    let factorial = [1.0, 1.0, 2.0, 6.0][j as usize - 1];
    regular_part(j, t) + factorial / t.powi(j as i32)
}

/// The `j`-th derivative summand of one prime at real `s >= 0`.
fn phi_term(j: u32, s: f64, log_p: f64, nu: u32) -> f64 {
    let t = s * log_p;
    let m = f64::from(nu + 1);
    log_p.powi(j as i32) * (regular_part(j, t) - m.powi(j as i32) * regular_part(j, m * t))
}

fn check_j(j: u32) -> Result<()> {
    if (1..=4).contains(&j) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "phi_j is implemented for 1 <= j <= 4, got {j}"
        )))
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("s must be a positive real, got {s}")))
    }
}

/// `phi_{j,q}(s, y) = (-1)^j d^{j-1}/ds^{j-1} Z_q'/Z_q (s, y)`, summed over
/// `p <= y` not dividing `q`.
pub fn phi_j_q(j: u32, s: f64, table: &PrimePowerTable, ctx: &ModulusContext) -> Result<f64> {
    check_j(j)?;
    check_s(s)?;
    ctx.require_y_friable(table.y())?;
    Ok(table
        .entries()
        .iter()
        .filter(|e| !ctx.is_divisor(e.p))
        .map(|e| phi_term(j, s, e.log_p, e.nu))
        .sum())
}

/// `phi_j(s, y)`, the unrestricted case `q = 1`.
pub fn phi_j(j: u32, s: f64, table: &PrimePowerTable) -> Result<f64> {
    check_j(j)?;
    check_s(s)?;
    Ok(table
        .entries()
        .iter()
        .map(|e| phi_term(j, s, e.log_p, e.nu))
        .sum())
}

/// `phi_1(s, y) = sum_{p <= y} log p/(p^s - 1) - (nu_p + 1) log p/(p^{(nu_p+1)s} - 1)`,
/// including `s = 0` where it equals `psi(y)/2`.
pub fn phi_1(s: f64, table: &PrimePowerTable) -> f64 {
    table
        .entries()
        .iter()
        .map(|e| phi_term(1, s.max(0.0), e.log_p, e.nu))
        .sum()
}

/// `phi_{j,q}` from the double series
/// `sum_p sum_k k^{j-1} (log p)^j [p^{-ks} - (nu+1)^j p^{-(nu+1)ks}]`,
/// truncated once a term drops below `1e-16` of the partial sum.
pub fn phi_j_q_series(
    j: u32,
    s: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
) -> Result<f64> {
    check_j(j)?;
    check_s(s)?;
    let mut total = 0.0;
    for e in table.entries().iter().filter(|e| !ctx.is_divisor(e.p)) {
        let t = s * e.log_p;
        let m = f64::from(e.nu + 1);
        let k_max = (60.0 / t).ceil().max(1.0) as u64 * 4;
        let mut partial = 0.0;
        for k in 1..=k_max {
            let kf = k as f64;
            let term =
                kf.powi(j as i32 - 1) * ((-kf * t).exp() - m.powi(j as i32) * (-kf * m * t).exp());
            partial += term;
            if term.abs() < 1e-16 * partial.abs() {
                break;
            }
        }
        total += e.log_p.powi(j as i32) * partial;
    }
    Ok(total)
}

/// `log Z_q(s, y)` for real `s > 0`.
pub fn log_z_q(s: f64, table: &PrimePowerTable, ctx: &ModulusContext) -> Result<f64> {
    check_s(s)?;
    ctx.require_y_friable(table.y())?;
    Ok(table
        .entries()
        .iter()
        .filter(|e| !ctx.is_divisor(e.p))
        .map(|e| {
            let t = s * e.log_p;
            let m = f64::from(e.nu + 1);
            (-(-m * t).exp_m1()).ln() - (-(-t).exp_m1()).ln()
        })
        .sum())
}

/// `e^z - 1` for complex `z` without cancellation near 0.
fn complex_exp_m1(z: Complex64) -> Complex64 {
    let half = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half * half,
        z.re.exp() * z.im.sin(),
    )
}

/// `log Z_q(s, y)` for complex `s`, `Re s > 0`, as a sum of principal-branch
/// logarithms of the Euler factors.
pub fn log_z_q_complex(
    s: Complex64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
) -> Result<Complex64> {
    if !(s.re > 0.0) || !s.im.is_finite() {
        return Err(Error::Domain(format!("log Z_q needs Re s > 0, got {s}")));
    }
    ctx.require_y_friable(table.y())?;
    Ok(table
        .entries()
        .iter()
        .filter(|e| !ctx.is_divisor(e.p))
        .map(|e| {
            let z = s * e.log_p;
            let m = f64::from(e.nu + 1);
            (-complex_exp_m1(-z * m)).ln() - (-complex_exp_m1(-z)).ln()
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SaddleKind {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleResult {
    pub kind: SaddleKind,
    pub sigma: f64,
    /// `|equation mismatch| / log x`.
    pub residual: f64,
    /// Derivative values for `j = 2, 3, 4` at `sigma`. For `Beta` these are
    /// `sigma_j = phi_j(beta, y)`; for `Alpha` the analogous derivatives of
    /// `log zeta(s, y)`.
    pub sigma_j: [f64; 3],
    pub iterations: u32,
    pub log_x: f64,
}

impl SaddleResult {
    pub fn sigma2(&self) -> f64 {
        self.sigma_j[0]
    }
}

fn check_x(x: f64) -> Result<f64> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "x must be a finite real >= 2, got {x}"
        )));
    }
    Ok(x.ln())
}

/// Expands `[lo, hi]` geometrically until the decreasing `f` changes sign.
fn expand_bracket(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let mut steps = 0;
    while f(lo) <= 0.0 {
        lo *= 0.5;
        steps += 1;
        if steps > 2000 || lo == 0.0 {
            return Err(Error::Domain("saddle bracket collapsed toward 0".into()));
        }
    }
    while f(hi) >= 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > 4000 || !hi.is_finite() {
            return Err(Error::Domain("saddle bracket diverged".into()));
        }
    }
    Ok((lo, hi))
}

/// `beta(x, y)`: the solution of `phi_1(beta, y) = log x`, which exists iff
/// `psi(y) > 2 log x`.
pub fn solve_beta(x: f64, table: &PrimePowerTable) -> Result<SaddleResult> {
    let log_x = check_x(x)?;
    solve_beta_log(log_x, table)
}

/// As [`solve_beta`], with `log x` given directly.
pub fn solve_beta_log(log_x: f64, table: &PrimePowerTable) -> Result<SaddleResult> {
    if !(log_x > 0.0) || !log_x.is_finite() {
        return Err(Error::Domain(format!(
            "log x must be positive, got {log_x}"
        )));
    }
    let limit = table.psi() / 2.0;
    if !(limit > log_x) {
        return Err(Error::Regime { limit, log_x });
    }
    let f = |s: f64| phi_1(s, table) - log_x;
    let start = 1.0 / table.log_y();
    let (lo, hi) = expand_bracket(f, start, start)?;
    let root = roots::hybrid(
        |s| (f(s), -phi_j(2, s, table).unwrap_or(f64::NAN)),
        lo,
        hi,
        1e-3,
        |_| 0.25 * SADDLE_TOLERANCE * log_x,
    )?;
    let sigma = root.x;
    Ok(SaddleResult {
        kind: SaddleKind::Beta,
        sigma,
        residual: f(sigma).abs() / log_x,
        sigma_j: [
            phi_j(2, sigma, table)?,
            phi_j(3, sigma, table)?,
            phi_j(4, sigma, table)?,
        ],
        iterations: root.iterations,
        log_x,
    })
}

/// `sum_{p <= y} (log p)^j P_j(s log p)`: `j = 1` is `sum log p/(p^s - 1)`.
fn friable_phi(j: u32, s: f64, table: &PrimePowerTable) -> f64 {
    table
        .entries()
        .iter()
        .map(|e| e.log_p.powi(j as i32) * pole_part(j, s * e.log_p))
        .sum()
}

/// `alpha(x, y)`: the positive solution of `sum_{p <= y} log p/(p^alpha - 1) = log x`.
pub fn solve_alpha(x: f64, table: &PrimePowerTable) -> Result<SaddleResult> {
    let log_x = check_x(x)?;
    if x < table.y() as f64 {
        return Err(Error::Domain(format!(
            "alpha needs x >= y, got x = {x}, y = {}",
            table.y()
        )));
    }
    solve_alpha_log(log_x, table)
}

/// As [`solve_alpha`], with `log x` given directly.
pub fn solve_alpha_log(log_x: f64, table: &PrimePowerTable) -> Result<SaddleResult> {
    if !log_x.is_finite() || log_x < table.log_y() {
        return Err(Error::Domain(format!(
            "alpha needs log x >= log y = {}, got {log_x}",
            table.log_y()
        )));
    }
    let f = |s: f64| friable_phi(1, s, table) - log_x;
    let (lo, hi) = expand_bracket(f, 0.5, 1.0)?;
    let root = roots::hybrid(
        |s| (f(s), -friable_phi(2, s, table)),
        lo,
        hi,
        1e-3,
        |_| 0.25 * SADDLE_TOLERANCE * log_x,
    )?;
    let sigma = root.x;
    Ok(SaddleResult {
        kind: SaddleKind::Alpha,
        sigma,
        residual: f(sigma).abs() / log_x,
        sigma_j: [
            friable_phi(2, sigma, table),
            friable_phi(3, sigma, table),
            friable_phi(4, sigma, table),
        ],
        iterations: root.iterations,
        log_x,
    })
}

/// `sum_{p <= y} log p/(p^s - 1)`.
pub fn friable_log_derivative(s: f64, table: &PrimePowerTable) -> Result<f64> {
    check_s(s)?;
    Ok(friable_phi(1, s, table))
}

/// `L_eps(y) = exp((log y)^{3/5 - eps})`.
pub fn l_epsilon(y: f64, epsilon: f64) -> f64 {
    y.ln().powf(0.6 - epsilon).exp()
}

/// `Y_eps = exp((log y)^{3/2 - eps})`.
pub fn y_epsilon(y: f64, epsilon: f64) -> f64 {
    y.ln().powf(1.5 - epsilon).exp()
}

/// First-order large-`y` approximation `1 - xi(u)/log y`.
pub fn saddle_large_y_approx(log_x: f64, log_y: f64) -> Result<f64> {
    let u = log_x / log_y;
    Ok(1.0 - crate::special::xi(u.max(1.0))? / log_y)
}

/// Small-`y` approximation `log(1 + eta)/log y`.
pub fn beta_small_y_approx(log_x: f64, table: &PrimePowerTable) -> f64 {
    let eta = table.psi() / log_x - 2.0;
    eta.ln_1p() / table.log_y()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArithmeticFactors {
    pub g_q: f64,
    /// `gamma_q'(s) = (log g_q)'(s)`.
    pub gamma1_q: f64,
    /// `gamma_q''(s)`.
    pub gamma2_q: f64,
    pub f_q: f64,
    /// `h_d(s)`, `1` when no divisor is supplied.
    pub h_d: f64,
}

/// `(1 - p^{-a s})/(1 - p^{-b s})` for real `s > 0`.
fn euler_ratio(s: f64, log_p: f64, a: f64, b: f64) -> f64 {
    let t = s * log_p;
    (-a * t).exp_m1() / (-b * t).exp_m1()
}

/// `g_q`, `gamma_q'`, `gamma_q''`, `f_q` and optionally `h_d` at real `s > 0`.
pub fn arithmetic_factors(
    s: f64,
    ctx: &ModulusContext,
    table: &PrimePowerTable,
    d: Option<u64>,
) -> Result<ArithmeticFactors> {
    check_s(s)?;
    ctx.require_y_friable(table.y())?;
    let mut g_q = 1.0;
    let mut f_q = 1.0;
    let mut gamma1 = 0.0;
    let mut gamma2 = 0.0;
    let small = s * table.log_y() < GAMMA_CROSSOVER;
    for &p in &ctx.prime_divisors {
        let e = table
            .get(p)
            .ok_or_else(|| Error::Precondition(format!("prime {p} | q exceeds y")))?;
        let nu = f64::from(e.nu);
        g_q *= euler_ratio(s, e.log_p, 1.0, nu + 1.0);
        f_q *= -(-s * e.log_p).exp_m1();
        if small {
            gamma1 += 0.5 * nu * e.log_p;
            gamma2 -= nu * (nu + 2.0) * e.log_p * e.log_p / 12.0;
        } else {
            gamma1 += phi_term(1, s, e.log_p, e.nu);
            gamma2 -= phi_term(2, s, e.log_p, e.nu);
        }
    }
    let mut h_d = 1.0;
    if let Some(d) = d {
        if d == 0 || !ctx.q.is_multiple_of(d) {
            return Err(Error::Domain(format!(
                "d = {d} does not divide q = {}",
                ctx.q
            )));
        }
        for &p in ctx.prime_divisors.iter().filter(|&&p| d % p == 0) {
            let e = table.get(p).expect("checked above");
            let nu = f64::from(e.nu);
            h_d *= euler_ratio(s, e.log_p, nu, nu + 1.0);
        }
    }
    Ok(ArithmeticFactors {
        g_q,
        gamma1_q: gamma1,
        gamma2_q: gamma2,
        f_q,
        h_d,
    })
}
