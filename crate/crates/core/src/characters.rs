//! Dirichlet characters and character-side sums.
//!
//! A character modulo `q` is stored as an exponent vector over the cyclic
//! factors of `(Z/qZ)*` (one per odd prime power, up to two for a power of
//! two). Values are roots of unity `zeta_L^k` with `L` the group exponent;
//! the integer index `k` is computed exactly from discrete-log tables.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::counting::{character_sum_from, gcd, CountValue, ResidueCounter};
use crate::error::{Error, Result};
use crate::primes::{ModulusContext, PrimePowerTable};

pub const DEFAULT_MAX_CHARACTER_MODULUS: u64 = 10_000;

const NO_LOG: u32 = u32::MAX;

#[derive(Debug)]
struct CyclicFactor {
    /// Modulus of the prime-power component this factor lives in.
    modulus: u64,
    order: u32,
    /// Discrete log base the factor's generator, indexed by `n mod modulus`;
    /// `NO_LOG` for non-units.
    dlog: Vec<u32>,
}

/// The character group of `(Z/qZ)*`.
#[derive(Debug)]
pub struct CharacterGroup {
    q: u64,
    factors: Vec<CyclicFactor>,
    /// Group exponent (lcm of the factor orders).
    exponent: u32,
    roots: Vec<Complex64>,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn prime_factorization(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut k = 0;
            while n.is_multiple_of(d) {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn primitive_root_mod_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = prime_factorization(p - 1);
    (2..p)
        .find(|&g| {
            factors
                .iter()
                .all(|&(r, _)| pow_mod(g, (p - 1) / r, p) != 1)
        })
        .expect("every prime has a primitive root")
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a as u64, b as u64) as u32 * b
}

fn cyclic_factor(modulus: u64, generator: u64, order: u32) -> CyclicFactor {
    let mut dlog = vec![NO_LOG; modulus as usize];
    let mut g = 1 % modulus;
    for j in 0..order {
        dlog[g as usize] = j;
        g = g * generator % modulus;
    }
    CyclicFactor {
        modulus,
        order,
        dlog,
    }
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self> {
        Self::with_max_modulus(q, DEFAULT_MAX_CHARACTER_MODULUS)
    }

    pub fn with_max_modulus(q: u64, max_q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("modulus q must be positive".into()));
        }
        if q > max_q {
            return Err(Error::Resource(format!(
                "character modulus {q} exceeds the bound {max_q}"
            )));
        }
        let mut factors = Vec::new();
        for (p, k) in prime_factorization(q) {
            let m = p.pow(k);
            if p == 2 {
                match k {
                    1 => {}
                    2 => factors.push(cyclic_factor(4, 3, 2)),
                    _ => {
                        // n = (-1)^a 5^b: the sign factor, then the 5-factor
                        let half = (m / 4) as u32;
                        let mut sign = vec![NO_LOG; m as usize];
                        let mut five = vec![NO_LOG; m as usize];
                        let mut f = 1u64;
                        for b in 0..half {
                            sign[f as usize] = 0;
                            five[f as usize] = b;
                            sign[(m - f) as usize] = 1;
                            five[(m - f) as usize] = b;
                            f = f * 5 % m;
                        }
                        factors.push(CyclicFactor {
                            modulus: m,
                            order: 2,
                            dlog: sign,
                        });
                        factors.push(CyclicFactor {
                            modulus: m,
                            order: half,
                            dlog: five,
                        });
                    }
                }
            } else {
                let mut g = primitive_root_mod_prime(p);
                if k > 1 && pow_mod(g, p - 1, p * p) == 1 {
                    g += p;
                }
                let order = (m / p * (p - 1)) as u32;
                factors.push(cyclic_factor(m, g, order));
            }
        }
        let exponent = factors.iter().fold(1, |acc, f| lcm(acc, f.order));
        let roots = (0..exponent)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / exponent as f64))
            .collect();
        Ok(Self {
            q,
            factors,
            exponent,
            roots,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `phi(q)`, the number of characters.
    pub fn size(&self) -> u64 {
        self.factors.iter().map(|f| f.order as u64).product()
    }
}

/// A Dirichlet character modulo `q`.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    group: Arc<CharacterGroup>,
    exponents: Vec<u32>,
}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.group.q
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Exact index `k` with `chi(n) = exp(2 pi i k / L)`, or `None` when
    /// `(n, q) > 1`.
    pub fn index(&self, n: u64) -> Option<u32> {
        let l = self.group.exponent as u64;
        let mut k = 0u64;
        for (f, &e) in self.group.factors.iter().zip(&self.exponents) {
            let log = f.dlog[(n % f.modulus) as usize];
            if log == NO_LOG {
                return None;
            }
            k += e as u64 * log as u64 * (l / f.order as u64);
        }
        if self.group.q > 1 && gcd(n, self.group.q) != 1 {
            return None;
        }
        Some((k % l) as u32)
    }

    pub fn value(&self, n: u64) -> Complex64 {
        match self.index(n) {
            Some(k) => self.group.roots[k as usize],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn order(&self) -> u32 {
        self.group
            .factors
            .iter()
            .zip(&self.exponents)
            .fold(1, |acc, (f, &e)| {
                lcm(acc, f.order / gcd(e as u64, f.order as u64) as u32)
            })
    }

    /// `chi` is real iff `chi^2` is principal.
    pub fn is_real(&self) -> bool {
        self.order() <= 2
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi_{}{:?}", self.group.q, self.exponents)
    }
}

/// All `phi(q)` characters modulo `q`, in lexicographic order of exponent
/// vectors (the principal character first).
pub fn enumerate_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    let group = Arc::new(CharacterGroup::new(q)?);
    let orders: Vec<u32> = group.factors.iter().map(|f| f.order).collect();
    let mut out = Vec::with_capacity(group.size() as usize);
    let mut current = vec![0u32; orders.len()];
    loop {
        out.push(DirichletCharacter {
            group: Arc::clone(&group),
            exponents: current.clone(),
        });
        // odometer increment, last factor fastest
        let mut pos = orders.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < orders[pos] {
                break;
            }
            current[pos] = 0;
        }
    }
}

/// `chi(p) p^{-i tau}`.
fn twisted(chi: &DirichletCharacter, p: u64, log_p: f64, tau: f64) -> Complex64 {
    chi.value(p) * Complex64::from_polar(1.0, -tau * log_p)
}

/// `W_q(y, tau; chi) = sum_{p <= y, p not dividing q} (1 - Re(chi(p)/p^{i tau}))^2 / p^beta`.
pub fn w_q(
    tau: f64,
    beta: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
    chi: &DirichletCharacter,
) -> Result<f64> {
    check_beta(beta)?;
    Ok(table
        .entries()
        .iter()
        .filter(|e| !ctx.is_divisor(e.p))
        .map(|e| {
            let t = 1.0 - twisted(chi, e.p, e.log_p, tau).re;
            t * t * (-beta * e.log_p).exp()
        })
        .sum())
}

/// `D(y, tau; chi) = sum_{p <= y} (1 - Re(chi(p)/p^{i tau})) log p / p^beta`.
pub fn d_sum(
    tau: f64,
    beta: f64,
    table: &PrimePowerTable,
    chi: &DirichletCharacter,
) -> Result<f64> {
    check_beta(beta)?;
    Ok(table
        .entries()
        .iter()
        .map(|e| (1.0 - twisted(chi, e.p, e.log_p, tau).re) * e.log_p * (-beta * e.log_p).exp())
        .sum())
}

/// `S(y, tau; chi) = sum_{n <= y} chi(n) Lambda(n) / n^{beta + i tau}`.
pub fn s_sum(
    tau: f64,
    beta: f64,
    table: &PrimePowerTable,
    chi: &DirichletCharacter,
) -> Result<Complex64> {
    check_beta(beta)?;
    let s = Complex64::new(beta, tau);
    let mut total = Complex64::new(0.0, 0.0);
    for e in table.entries() {
        let chi_p = chi.value(e.p);
        if chi_p.norm_sqr() == 0.0 {
            continue;
        }
        let mut chi_pk = Complex64::new(1.0, 0.0);
        for k in 1..=e.nu {
            chi_pk *= chi_p;
            total += chi_pk * e.log_p * (-s * (k as f64 * e.log_p)).exp();
        }
    }
    Ok(total)
}

/// `sum_{n <= y} Lambda(n)`.
pub fn von_mangoldt_sum(table: &PrimePowerTable) -> f64 {
    table.entries().iter().map(|e| e.nu as f64 * e.log_p).sum()
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("beta must be positive, got {beta}")))
    }
}

/// Recovers `Upsilon(x, y; a, q)` from the character sums by orthogonality:
/// `(1/phi(q)) sum_chi conj(chi(a)) Upsilon(x, y; chi)`.
pub fn reconstruct_progression(
    x: f64,
    table: &PrimePowerTable,
    a: u64,
    q: u64,
) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::Domain("modulus q must be positive".into()));
    }
    if gcd(a % q, q) != 1 {
        return Err(Error::Domain(format!("(a, q) = ({a}, {q}) is not coprime")));
    }
    let counts = ResidueCounter::new(table, q)?.count(x)?;
    let chars = enumerate_characters(q)?;
    let total: Complex64 = chars
        .iter()
        .map(|chi| chi.value(a).conj() * character_sum_from(&counts, chi))
        .sum();
    Ok(total / chars.len() as f64)
}

/// Exact character sums for every character modulo `q`, sharing one
/// residue count.
pub fn all_character_sums(
    x: f64,
    table: &PrimePowerTable,
    q: u64,
) -> Result<(CountValue, Vec<(DirichletCharacter, Complex64)>)> {
    let counts = ResidueCounter::new(table, q)?.count(x)?;
    let chars = enumerate_characters(q)?;
    let sums = chars
        .into_iter()
        .map(|chi| {
            let s = character_sum_from(&counts, &chi);
            (chi, s)
        })
        .collect();
    Ok((counts.coprime_total(), sums))
}
