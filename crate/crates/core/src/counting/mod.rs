//! Exact counts of ultrafriable and friable integers.
//!
//! Ultrafriable integers coprime to `q` are exactly the divisors of
//! `N_{q,y}`, so `Upsilon_q(x, y)` is a bounded divisor count; see
//! [`UltrafriableCounter`]. Friable counts use either a largest-prime-factor
//! sieve or a memoised Buchstab-type recursion, see [`friable`].

use std::fmt;

use num_bigint::BigUint;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub mod friable;
pub mod oracle;
mod ultra;

pub use friable::{count_friable, count_friable_progression, DEFAULT_MAX_FRIABLE_X};
pub use oracle::{naive_oracle, NaiveOracle, OracleFilter, OracleMode, ORACLE_MAX_X};
pub use ultra::{
    character_sum, character_sum_from, count_ultrafriable, count_ultrafriable_residues,
    ResidueCounter, UltrafriableCounter, DEFAULT_MAX_RESIDUE_MODULUS,
};

/// An exact, arbitrary-precision count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CountValue {
    value: BigUint,
}

impl CountValue {
    pub fn new(value: BigUint) -> Self {
        Self { value }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn into_inner(self) -> BigUint {
        self.value
    }

    /// Counts produced by this crate are always exact.
    pub fn exact(&self) -> bool {
        true
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn to_u128(&self) -> Option<u128> {
        self.value.to_u128()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Natural logarithm, finite for arbitrarily large values; `-inf` for 0.
    pub fn ln(&self) -> f64 {
        ln_biguint(&self.value)
    }
}

impl From<u128> for CountValue {
    fn from(v: u128) -> Self {
        Self::new(BigUint::from(v))
    }
}

impl From<u64> for CountValue {
    fn from(v: u64) -> Self {
        Self::new(BigUint::from(v))
    }
}

impl From<BigUint> for CountValue {
    fn from(v: BigUint) -> Self {
        Self::new(v)
    }
}

impl fmt::Display for CountValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

impl Serialize for CountValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.value.to_string())
    }
}

pub(crate) fn ln_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        v.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        (v >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `floor(x)` as an exact integer, for finite `x >= 0`.
pub(crate) fn floor_biguint(x: f64) -> Result<BigUint> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "x must be finite and nonnegative, got {x}"
        )));
    }
    Ok(BigUint::from_f64(x.floor()).expect("finite nonnegative float"))
}

/// Exact per-residue counts `Upsilon(x, y; a, q)` for `a = 0, ..., q-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueCountVector {
    q: u64,
    counts: Vec<CountValue>,
}

impl ResidueCountVector {
    pub(crate) fn from_raw(q: u64, raw: Vec<u128>) -> Self {
        debug_assert_eq!(raw.len() as u64, q);
        Self {
            q,
            counts: raw.into_iter().map(CountValue::from).collect(),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn counts(&self) -> &[CountValue] {
        &self.counts
    }

    pub fn get(&self, a: u64) -> &CountValue {
        &self.counts[(a % self.q) as usize]
    }

    /// Sum over all residues: the unrestricted count.
    pub fn total(&self) -> CountValue {
        CountValue::new(self.counts.iter().map(|c| c.value()).sum())
    }

    /// Sum over residues coprime to `q`: `Upsilon_q(x, y)`.
    pub fn coprime_total(&self) -> CountValue {
        CountValue::new(
            self.counts
                .iter()
                .enumerate()
                .filter(|(a, _)| gcd(*a as u64, self.q) == 1)
                .map(|(_, c)| c.value())
                .sum(),
        )
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_of_large_values() {
        let v = BigUint::from(10u32).pow(400);
        let got = ln_biguint(&v);
        assert!((got - 400.0 * 10f64.ln()).abs() < 1e-10);
        assert_eq!(ln_biguint(&BigUint::zero()), f64::NEG_INFINITY);
    }

    #[test]
    fn floor_rejects_negative() {
        assert!(floor_biguint(-1.0).is_err());
        assert!(floor_biguint(f64::NAN).is_err());
        assert_eq!(floor_biguint(2.999).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn residue_vector_totals() {
        let v = ResidueCountVector::from_raw(4, vec![1, 2, 3, 4]);
        assert_eq!(v.total(), CountValue::from(10u64));
        assert_eq!(v.coprime_total(), CountValue::from(6u64));
        assert_eq!(v.get(7), &CountValue::from(4u64));
    }
}
