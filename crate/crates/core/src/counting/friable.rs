//! Exact friable counts `Psi_q(x, y)` and `Psi(x, y; a, q)`.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::{floor_biguint, CountValue};
use crate::error::{Error, Result};
use crate::primes::sieve_primes;

/// Default largest `x` for exact friable counting.
pub const DEFAULT_MAX_FRIABLE_X: u64 = 1_000_000_000;

/// Up to this `x` a largest-prime-factor sieve is used.
const SIEVE_MAX_X: u64 = 10_000_000;

fn checked_floor(x: f64, max_x: u64) -> Result<u64> {
    let big = floor_biguint(x)?;
    match big.to_u64() {
        Some(v) if v <= max_x => Ok(v),
        _ => Err(Error::Resource(format!(
            "x = {x} exceeds the exact friable-count bound {max_x}"
        ))),
    }
}

fn distinct_prime_factors(mut q: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            out.push(d);
            while q.is_multiple_of(d) {
                q /= d;
            }
        }
        d += 1;
    }
    if q > 1 {
        out.push(q);
    }
    out
}

/// `lpf[n]` = largest prime factor of `n`, with `lpf[1] = 1`.
fn largest_prime_factors(limit: usize) -> Vec<u32> {
    let mut lpf = vec![0u32; limit + 1];
    if limit >= 1 {
        lpf[1] = 1;
    }
    for p in 2..=limit {
        if lpf[p] == 0 {
            let mut m = p;
            while m <= limit {
                lpf[m] = p as u32;
                m += p;
            }
        }
    }
    lpf
}

/// `Psi_q(x, y)`: the number of `y`-friable `n <= x` with `(n, q) = 1`.
pub fn count_friable(x: f64, y: u64, q: u64) -> Result<CountValue> {
    count_friable_with_max(x, y, q, DEFAULT_MAX_FRIABLE_X)
}

pub fn count_friable_with_max(x: f64, y: u64, q: u64, max_x: u64) -> Result<CountValue> {
    if q == 0 {
        return Err(Error::Domain("modulus q must be positive".into()));
    }
    let big_x = checked_floor(x, max_x)?;
    let q_primes = distinct_prime_factors(q);
    let count = if big_x <= SIEVE_MAX_X {
        let lpf = largest_prime_factors(big_x as usize);
        (1..=big_x as usize)
            .filter(|&n| lpf[n] as u64 <= y && q_primes.iter().all(|&p| !(n as u64).is_multiple_of(p)))
            .count() as u64
    } else {
        FriableRecursion::new(big_x, y, &q_primes).count(big_x)
    };
    Ok(CountValue::from(count))
}

/// `Psi(x, y; a, q)`: the number of `y`-friable `n <= x` with `n = a (mod q)`.
pub fn count_friable_progression(x: f64, y: u64, a: u64, q: u64) -> Result<CountValue> {
    count_friable_progression_with_max(x, y, a, q, DEFAULT_MAX_FRIABLE_X)
}

pub fn count_friable_progression_with_max(
    x: f64,
    y: u64,
    a: u64,
    q: u64,
    max_x: u64,
) -> Result<CountValue> {
    if q == 0 {
        return Err(Error::Domain("modulus q must be positive".into()));
    }
    let big_x = checked_floor(x, max_x)?;
    let a = a % q;
    let count = if big_x <= SIEVE_MAX_X {
        let lpf = largest_prime_factors(big_x as usize);
        (1..=big_x)
            .filter(|&n| n % q == a && lpf[n as usize] as u64 <= y)
            .count() as u64
    } else {
        let primes = sieve_primes(y.min(big_x));
        enumerate_progression(&primes, big_x, primes.len(), 1 % q, a, q)
    };
    Ok(CountValue::from(count))
}

/// Counts `m <= bound` composed of `primes[..end]` with `r*m = a (mod q)`.
fn enumerate_progression(primes: &[u64], bound: u64, end: usize, r: u64, a: u64, q: u64) -> u64 {
    let mut count = (r == a) as u64;
    for (j, &p) in primes[..end].iter().enumerate() {
        if p > bound {
            break;
        }
        let mut pk = p;
        let mut rr = r * (p % q) % q;
        loop {
            count += enumerate_progression(primes, bound / pk, j, rr, a, q);
            match pk.checked_mul(p) {
                Some(next) if next <= bound => pk = next,
                _ => break,
            }
            rr = rr * (p % q) % q;
        }
    }
    count
}

/// Memoised recursion on the largest prime factor:
/// `Psi_q(x, p_i) = Psi_q(x, 2) + sum_{1 <= j <= i, p_j not dividing q} Psi_q(x/p_j, p_j)`.
struct FriableRecursion {
    primes: Vec<u64>,
    excluded: Vec<bool>,
    /// Signed squarefree divisors of `rad(q)` for inclusion-exclusion.
    mobius: Vec<(u64, i64)>,
    memo: HashMap<(u64, u32), u64>,
}

impl FriableRecursion {
    fn new(x: u64, y: u64, q_primes: &[u64]) -> Self {
        let primes = sieve_primes(y.min(x));
        let excluded = primes.iter().map(|p| q_primes.contains(p)).collect();
        let mut mobius = vec![(1u64, 1i64)];
        for &p in q_primes {
            let extra: Vec<(u64, i64)> = mobius
                .iter()
                .filter_map(|&(d, s)| d.checked_mul(p).map(|dp| (dp, -s)))
                .collect();
            mobius.extend(extra);
        }
        Self {
            primes,
            excluded,
            mobius,
            memo: HashMap::new(),
        }
    }

    fn count(&mut self, x: u64) -> u64 {
        if self.primes.is_empty() {
            return x.min(1);
        }
        let top = self.primes.len() - 1;
        self.psi(x, top)
    }

    /// `#{m <= z : (m, q) = 1}`.
    fn coprime_upto(&self, z: u64) -> u64 {
        let total: i64 = self.mobius.iter().map(|&(d, s)| s * (z / d) as i64).sum();
        total as u64
    }

    fn psi(&mut self, x: u64, i: usize) -> u64 {
        if x < 2 {
            return x;
        }
        let top = self.primes.partition_point(|&p| p <= x);
        if top == 0 {
            return 1;
        }
        let i = i.min(top - 1);
        let powers_of_two = if self.excluded[0] {
            1
        } else {
            x.ilog2() as u64 + 1
        };
        if i == 0 {
            return powers_of_two;
        }
        if let Some(&v) = self.memo.get(&(x, i as u32)) {
            return v;
        }
        let mut total = powers_of_two;
        for j in 1..=i {
            if self.excluded[j] {
                continue;
            }
            let p = self.primes[j];
            let m = x / p;
            total += if p.saturating_mul(p) > x {
                // m < p: every m' <= m is p-friable
                self.coprime_upto(m)
            } else {
                self.psi(m, j)
            };
        }
        self.memo.insert((x, i as u32), total);
        total
    }
}
