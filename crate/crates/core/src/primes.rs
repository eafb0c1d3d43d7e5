//! Prime-power tables, modulus contexts and regime classification.
//!
//! Everything downstream (exact counts, the Euler products, the saddle
//! equations) iterates over the primes `p <= y` together with the maximal
//! exponent `nu_p` such that `p^nu_p <= y`. The exponents are found by exact
//! integer multiplication, never from `floor(log y / log p)`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default largest `y` accepted by [`PrimePowerTable::build`].
pub const DEFAULT_MAX_Y: u64 = 100_000_000;

/// Default `epsilon` in the large-y condition `y >= (log x)^(2+epsilon)`.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Sieve of Eratosthenes over odd numbers; returns all primes `<= limit`.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let half = ((limit - 1) / 2) as usize; // odd numbers 3, 5, ..., index i -> 2i+3
    let mut composite = vec![false; half];
    let mut i = 0usize;
    loop {
        let p = 2 * i as u64 + 3;
        if p * p > limit {
            break;
        }
        if !composite[i] {
            let mut j = ((p * p - 3) / 2) as usize;
            while j < half {
                composite[j] = true;
                j += p as usize;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_pi(limit));
    primes.push(2);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 3),
    );
    primes
}

fn estimate_pi(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize
    }
}

/// Largest `nu` with `p^nu <= y`, by repeated exact multiplication.
pub fn max_exponent(p: u64, y: u64) -> u32 {
    debug_assert!(p >= 2 && p <= y);
    let mut nu = 0;
    let mut power = 1u64;
    while let Some(next) = power.checked_mul(p) {
        if next > y {
            break;
        }
        power = next;
        nu += 1;
    }
    nu
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimePower {
    pub p: u64,
    pub nu: u32,
    pub log_p: f64,
}

impl PrimePower {
    /// `p^nu_p`, the largest power of `p` not exceeding `y`.
    pub fn max_power(&self) -> u64 {
        self.p.pow(self.nu)
    }
}

/// The primes `p <= y` with their maximal exponents and `psi(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimePowerTable {
    y: u64,
    entries: Vec<PrimePower>,
    psi: f64,
}

impl PrimePowerTable {
    pub fn build(y: u64) -> Result<Self> {
        Self::build_with_budget(y, DEFAULT_MAX_Y)
    }

    pub fn build_with_budget(y: u64, max_y: u64) -> Result<Self> {
        if y < 2 {
            return Err(Error::Domain(format!("y must be at least 2, got {y}")));
        }
        if y > max_y {
            return Err(Error::Resource(format!(
                "y = {y} exceeds the prime table budget {max_y}"
            )));
        }
        let entries: Vec<PrimePower> = sieve_primes(y)
            .into_iter()
            .map(|p| PrimePower {
                p,
                nu: max_exponent(p, y),
                log_p: (p as f64).ln(),
            })
            .collect();
        let psi = entries.iter().map(|e| e.nu as f64 * e.log_p).sum();
        Ok(Self { y, entries, psi })
    }

    pub fn y(&self) -> u64 {
        self.y
    }

    pub fn log_y(&self) -> f64 {
        (self.y as f64).ln()
    }

    pub fn entries(&self) -> &[PrimePower] {
        &self.entries
    }

    /// Chebyshev's `psi(y) = sum nu_p log p`.
    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// `pi(y)`.
    pub fn prime_count(&self) -> usize {
        self.entries.len()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.p)
    }

    pub fn get(&self, p: u64) -> Option<&PrimePower> {
        self.entries
            .binary_search_by_key(&p, |e| e.p)
            .ok()
            .map(|i| &self.entries[i])
    }

    /// `psi_q(y)`: the sum restricted to primes not dividing `q`.
    pub fn psi_q(&self, ctx: &ModulusContext) -> f64 {
        self.entries
            .iter()
            .filter(|e| !ctx.is_divisor(e.p))
            .map(|e| e.nu as f64 * e.log_p)
            .sum()
    }

    /// `N_{q,y}`, the product of `p^nu_p` over `p <= y`, `p` not dividing `q`.
    pub fn n_q(&self, ctx: &ModulusContext) -> BigUint {
        self.entries
            .iter()
            .filter(|e| !ctx.is_divisor(e.p))
            .fold(BigUint::one(), |acc, e| acc * BigUint::from(e.max_power()))
    }
}

/// A modulus `q`, factored, with the quantities the estimates depend on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusContext {
    pub q: u64,
    pub prime_divisors: Vec<u64>,
    pub omega_q: usize,
    pub phi_q: u64,
    /// The `omega(q)`-th prime, with `p_0 = 2`.
    pub z_q: u64,
    /// `log z_q / log y` for the attached table.
    pub theta_q: f64,
    /// Whether `P+(q) <= y`.
    pub y_friable: bool,
}

impl ModulusContext {
    pub fn new(q: u64, table: &PrimePowerTable) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("modulus q must be positive".into()));
        }
        let prime_divisors = factor_distinct(q, table);
        let omega_q = prime_divisors.len();
        let phi_q = prime_divisors.iter().fold(q, |acc, &p| acc / p * (p - 1));
        let z_q = nth_prime(omega_q);
        let y_friable = prime_divisors.last().is_none_or(|&p| p <= table.y());
        Ok(Self {
            q,
            theta_q: (z_q as f64).ln() / table.log_y(),
            prime_divisors,
            omega_q,
            phi_q,
            z_q,
            y_friable,
        })
    }

    pub fn is_divisor(&self, p: u64) -> bool {
        self.prime_divisors.binary_search(&p).is_ok()
    }

    pub fn require_y_friable(&self, y: u64) -> Result<()> {
        if self.y_friable {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "largest prime factor of q = {} exceeds y = {y}",
                self.q
            )))
        }
    }
}

/// Convenience wrapper matching the table-first argument order used elsewhere.
pub fn modulus_context(q: u64, table: &PrimePowerTable) -> Result<ModulusContext> {
    ModulusContext::new(q, table)
}

/// Distinct prime factors of `q`, ascending. Trial division by the table's
/// primes, then by odd numbers up to `sqrt` of what remains.
pub fn factor_distinct(q: u64, table: &PrimePowerTable) -> Vec<u64> {
    let mut rest = q;
    let mut out = Vec::new();
    for p in table.primes() {
        if rest == 1 || p.saturating_mul(p) > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            out.push(p);
            while rest.is_multiple_of(p) {
                rest /= p;
            }
        }
    }
    if rest > 1 {
        let start = table.y() + 1;
        let mut d = if start.is_multiple_of(2) { start + 1 } else { start }.max(3);
        while d.saturating_mul(d) <= rest {
            if rest.is_multiple_of(d) {
                out.push(d);
                while rest.is_multiple_of(d) {
                    rest /= d;
                }
            }
            d += 2;
        }
        if rest > 1 {
            out.push(rest);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// `p_k`, the k-th prime, with `p_0 = 2`.
pub fn nth_prime(k: usize) -> u64 {
    if k == 0 {
        return 2;
    }
    let mut limit = 64u64;
    loop {
        let primes = sieve_primes(limit);
        if primes.len() >= k {
            return primes[k - 1];
        }
        limit *= 2;
    }
}

/// `tau(N_{q,y}) = prod (1 + nu_p)` over `p <= y`, `p` not dividing `q`.
pub fn tau_n(table: &PrimePowerTable, ctx: &ModulusContext) -> Result<BigUint> {
    ctx.require_y_friable(table.y())?;
    Ok(table
        .entries()
        .iter()
        .filter(|e| !ctx.is_divisor(e.p))
        .fold(BigUint::one(), |acc, e| acc * (e.nu + 1)))
}

/// Which of the two asymptotic domains a point `(x, y)` lies in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeTag {
    /// `psi(y) > 2 log x`.
    pub small_y: bool,
    /// `y >= (log x)^(2+epsilon)`.
    pub large_y: bool,
    /// `psi(y)/log x - 2`, present when `small_y`.
    pub eta: Option<f64>,
    pub u: f64,
}

impl RegimeTag {
    pub fn is_out_of_domain(&self) -> bool {
        !self.small_y && !self.large_y
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.small_y, self.large_y) {
            (true, true) => f.write_str("SMALL_Y|LARGE_Y"),
            (true, false) => f.write_str("SMALL_Y"),
            (false, true) => f.write_str("LARGE_Y"),
            (false, false) => f.write_str("OUT_OF_DOMAIN"),
        }
    }
}

pub fn classify_regime(x: f64, table: &PrimePowerTable, epsilon: f64) -> Result<RegimeTag> {
    if !(x >= 2.0) {
        return Err(Error::Domain(format!("x must be at least 2, got {x}")));
    }
    let log_x = x.ln();
    Ok(classify_log(log_x, table, epsilon))
}

/// As [`classify_regime`], from `log x` directly.
pub fn classify_log(log_x: f64, table: &PrimePowerTable, epsilon: f64) -> RegimeTag {
    let small_y = table.psi() > 2.0 * log_x;
    let large_y = table.log_y() >= (2.0 + epsilon) * log_x.ln();
    RegimeTag {
        small_y,
        large_y,
        eta: small_y.then(|| table.psi() / log_x - 2.0),
        u: log_x / table.log_y(),
    }
}
