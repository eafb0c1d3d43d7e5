//! Definitional test oracle: factor every `n <= x` and test it directly.

use super::{gcd, CountValue};
use crate::error::{Error, Result};

pub const ORACLE_MAX_X: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Friable,
    Ultrafriable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleFilter {
    All,
    CoprimeTo(u64),
    Residue { a: u64, q: u64 },
}

impl OracleFilter {
    fn keeps(&self, n: u64) -> bool {
        match *self {
            OracleFilter::All => true,
            OracleFilter::CoprimeTo(q) => gcd(n, q) == 1,
            OracleFilter::Residue { a, q } => n % q == a % q,
        }
    }
}

/// Per-`n` factorisation data up to a fixed limit, reusable across queries.
#[derive(Debug, Clone)]
pub struct NaiveOracle {
    /// Largest prime factor.
    lpf: Vec<u32>,
    /// Largest prime power `p^k` exactly dividing `n`.
    max_prime_power: Vec<u64>,
}

impl NaiveOracle {
    pub fn new(limit: u64) -> Result<Self> {
        if limit > ORACLE_MAX_X {
            return Err(Error::Resource(format!(
                "oracle limit {limit} exceeds {ORACLE_MAX_X}"
            )));
        }
        let limit = limit as usize;
        let mut spf = vec![0u32; limit + 1];
        for p in 2..=limit {
            if spf[p] == 0 {
                let mut m = p;
                while m <= limit {
                    if spf[m] == 0 {
                        spf[m] = p as u32;
                    }
                    m += p;
                }
            }
        }
        let mut lpf = vec![1u32; limit + 1];
        let mut max_prime_power = vec![1u64; limit + 1];
        for n in 2..=limit {
            let mut m = n;
            while m > 1 {
                let p = spf[m] as usize;
                let mut pk = 1u64;
                while m % p == 0 {
                    m /= p;
                    pk *= p as u64;
                }
                lpf[n] = lpf[n].max(p as u32);
                max_prime_power[n] = max_prime_power[n].max(pk);
            }
        }
        Ok(Self {
            lpf,
            max_prime_power,
        })
    }

    pub fn limit(&self) -> u64 {
        (self.lpf.len() - 1) as u64
    }

    fn admits(&self, n: usize, y: u64, mode: OracleMode) -> bool {
        match mode {
            OracleMode::Friable => self.lpf[n] as u64 <= y,
            // divisible by no prime power exceeding y
            OracleMode::Ultrafriable => self.max_prime_power[n] <= y,
        }
    }

    pub fn count(
        &self,
        x: u64,
        y: u64,
        filter: OracleFilter,
        mode: OracleMode,
    ) -> Result<CountValue> {
        self.check(x)?;
        let n = (1..=x as usize)
            .filter(|&n| self.admits(n, y, mode) && filter.keeps(n as u64))
            .count();
        Ok(CountValue::from(n as u64))
    }

    /// Counts for every residue modulo `q` in one pass.
    pub fn residues(&self, x: u64, y: u64, q: u64, mode: OracleMode) -> Result<Vec<u64>> {
        self.check(x)?;
        let mut out = vec![0u64; q as usize];
        for n in 1..=x as usize {
            if self.admits(n, y, mode) {
                out[n % q as usize] += 1;
            }
        }
        Ok(out)
    }

    fn check(&self, x: u64) -> Result<()> {
        if x > self.limit() {
            Err(Error::Resource(format!(
                "x = {x} beyond the oracle's sieve limit {}",
                self.limit()
            )))
        } else {
            Ok(())
        }
    }
}

/// One-shot oracle: `a` selects a residue class modulo `q`; `q` alone
/// restricts to `n` coprime to `q`.
pub fn naive_oracle(
    x: u64,
    y: u64,
    a: Option<u64>,
    q: Option<u64>,
    mode: OracleMode,
) -> Result<CountValue> {
    let filter = match (a, q) {
        (_, Some(0)) => return Err(Error::Domain("modulus q must be positive".into())),
        (Some(a), Some(q)) => OracleFilter::Residue { a, q },
        (None, Some(q)) => OracleFilter::CoprimeTo(q),
        (Some(_), None) => return Err(Error::Domain("a residue needs a modulus".into())),
        (None, None) => OracleFilter::All,
    };
    NaiveOracle::new(x)?.count(x, y, filter, mode)
}
