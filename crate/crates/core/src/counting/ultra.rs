use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};

use super::{floor_biguint, CountValue, ResidueCountVector};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::primes::{ModulusContext, PrimePowerTable};

/// Default largest modulus for per-residue counting.
pub const DEFAULT_MAX_RESIDUE_MODULUS: u64 = 10_000;

/// Largest divisor list materialised for the smallest primes.
const TAIL_LIMIT: u128 = 1 << 18;

/// Divisors of `prod p^nu`, organised for counting those below a bound.
///
/// The smallest primes form a tail whose divisors are kept sorted; the
/// remaining primes are visited in descending order. A node whose bound
/// covers the whole remaining suffix adds its divisor count at once.
#[derive(Debug, Clone)]
struct DivisorTree {
    /// Head primes, descending.
    head: Vec<(u128, u32)>,
    /// `suffix_product[i]`: product of `p^nu` over `head[i..]` and the tail,
    /// saturating at `u128::MAX`. One extra slot for the tail alone.
    suffix_product: Vec<u128>,
    suffix_tau: Vec<u128>,
    tail: Vec<u128>,
}

impl DivisorTree {
    fn new(ascending: &[(u64, u32)]) -> Self {
        let mut split = 0;
        let mut tau: u128 = 1;
        let mut product: u128 = 1;
        for &(p, nu) in ascending {
            let pk = (p as u128).pow(nu);
            match product.checked_mul(pk) {
                Some(next) if tau * (nu as u128 + 1) <= TAIL_LIMIT => {
                    product = next;
                    tau *= nu as u128 + 1;
                    split += 1;
                }
                _ => break,
            }
        }
        let mut tail = vec![1u128];
        for &(p, nu) in &ascending[..split] {
            let p = p as u128;
            let base = tail.len();
            let mut pk = 1;
            for _ in 0..nu {
                pk *= p;
                for j in 0..base {
                    tail.push(tail[j] * pk);
                }
            }
        }
        tail.sort_unstable();

        let head: Vec<(u128, u32)> = ascending[split..]
            .iter()
            .rev()
            .map(|&(p, nu)| (p as u128, nu))
            .collect();
        let mut suffix_product = vec![product; head.len() + 1];
        let mut suffix_tau = vec![tau; head.len() + 1];
        for i in (0..head.len()).rev() {
            let (p, nu) = head[i];
            suffix_product[i] = suffix_product[i + 1].saturating_mul(p.saturating_pow(nu));
            suffix_tau[i] = suffix_tau[i + 1].saturating_mul(nu as u128 + 1);
        }
        Self {
            head,
            suffix_product,
            suffix_tau,
            tail,
        }
    }

    /// First head index at or after `i` whose prime does not exceed `bound`.
    fn skip_large(&self, i: usize, bound: u128) -> usize {
        i + self.head[i..].partition_point(|&(p, _)| p > bound)
    }

    /// Whether every divisor of the suffix starting at `i` is `<= bound`.
    fn covers(&self, i: usize, bound: u128) -> bool {
        let product = self.suffix_product[i];
        product != u128::MAX && product <= bound
    }

    fn count_at_most(&self, bound: u128) -> u128 {
        self.count_from(0, bound)
    }

    fn count_from(&self, i: usize, bound: u128) -> u128 {
        let i = self.skip_large(i, bound);
        if self.covers(i, bound) {
            return self.suffix_tau[i];
        }
        if i == self.head.len() {
            return self.tail.partition_point(|&d| d <= bound) as u128;
        }
        let (p, nu) = self.head[i];
        let mut total = 0;
        let mut b = bound;
        for k in 0..=nu {
            total += self.count_from(i + 1, b);
            if k == nu {
                break;
            }
            b /= p;
            if b == 0 {
                break;
            }
        }
        total
    }
}

/// Counts `Upsilon_q(x, y)`: ultrafriable `n <= x` coprime to `q`.
#[derive(Debug, Clone)]
pub struct UltrafriableCounter {
    tree: DivisorTree,
    n: BigUint,
    tau: BigUint,
}

impl UltrafriableCounter {
    pub fn new(table: &PrimePowerTable, ctx: &ModulusContext) -> Result<Self> {
        ctx.require_y_friable(table.y())?;
        let powers: Vec<(u64, u32)> = table
            .entries()
            .iter()
            .filter(|e| !ctx.is_divisor(e.p))
            .map(|e| (e.p, e.nu))
            .collect();
        Ok(Self {
            tree: DivisorTree::new(&powers),
            n: table.n_q(ctx),
            tau: crate::primes::tau_n(table, ctx)?,
        })
    }

    /// `N_{q,y}`.
    pub fn n(&self) -> &BigUint {
        &self.n
    }

    /// `tau(N_{q,y})`.
    pub fn tau(&self) -> &BigUint {
        &self.tau
    }

    /// Number of divisors `d <= bound` of `N_{q,y}`, by direct recursion.
    pub fn count_at_most(&self, bound: &BigUint) -> Result<CountValue> {
        if bound >= &self.n {
            return Ok(CountValue::new(self.tau.clone()));
        }
        let b = bound.to_u128().ok_or_else(|| {
            Error::Resource(format!("divisor bound {bound} does not fit in 128 bits"))
        })?;
        Ok(CountValue::from(self.tree.count_at_most(b)))
    }

    /// `Upsilon_q(x, y)`. For `x >= sqrt(N)` the count is reflected through
    /// `Upsilon_q(x) = tau(N) - #{d | N : d < N/x}`.
    pub fn count(&self, x: f64) -> Result<CountValue> {
        let big_x = floor_biguint(x)?;
        if big_x >= self.n {
            return Ok(CountValue::new(self.tau.clone()));
        }
        if &big_x * &big_x >= self.n {
            // d < N/X  <=>  d*X < N  <=>  d <= (N-1)/X
            let reflected = (&self.n - BigUint::one()) / &big_x;
            let below = self.count_at_most(&reflected)?;
            return Ok(CountValue::new(&self.tau - below.into_inner()));
        }
        self.count_at_most(&big_x)
    }
}

/// `Upsilon_q(x, y)`, the number of `y`-ultrafriable `n <= x` with `(n, q) = 1`.
pub fn count_ultrafriable(
    x: f64,
    table: &PrimePowerTable,
    ctx: &ModulusContext,
) -> Result<CountValue> {
    UltrafriableCounter::new(table, ctx)?.count(x)
}

/// Per-residue counter for all `y`-ultrafriable integers modulo `q`.
#[derive(Debug, Clone)]
pub struct ResidueCounter {
    tree: DivisorTree,
    q: u64,
    /// Residue histogram of the full divisor set of each suffix, where the
    /// suffix product is representable.
    suffix_vecs: Vec<Option<Vec<u128>>>,
    tail_by_residue: Vec<Vec<u128>>,
    n: BigUint,
}

impl ResidueCounter {
    pub fn new(table: &PrimePowerTable, q: u64) -> Result<Self> {
        Self::with_max_modulus(table, q, DEFAULT_MAX_RESIDUE_MODULUS)
    }

    pub fn with_max_modulus(table: &PrimePowerTable, q: u64, max_q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("modulus q must be positive".into()));
        }
        if q > max_q {
            return Err(Error::Resource(format!(
                "modulus {q} exceeds the residue-count bound {max_q}"
            )));
        }
        let powers: Vec<(u64, u32)> = table.entries().iter().map(|e| (e.p, e.nu)).collect();
        let tree = DivisorTree::new(&powers);
        let qq = q as u128;
        let qs = q as usize;

        let mut tail_by_residue = vec![Vec::new(); qs];
        for &d in &tree.tail {
            tail_by_residue[(d % qq) as usize].push(d);
        }
        let mut base = vec![0u128; qs];
        for (c, list) in tail_by_residue.iter().enumerate() {
            base[c] = list.len() as u128;
        }
        let len = tree.head.len();
        let mut suffix_vecs = vec![None; len + 1];
        suffix_vecs[len] = Some(base);
        for i in (0..len).rev() {
            if tree.suffix_product[i] == u128::MAX {
                break;
            }
            let prev = suffix_vecs[i + 1].as_ref().expect("suffix built in order");
            let (p, nu) = tree.head[i];
            let mut next = vec![0u128; qs];
            let mut pk = 1 % qq;
            for _ in 0..=nu {
                for (c, &n) in prev.iter().enumerate() {
                    if n != 0 {
                        next[(c as u128 * pk % qq) as usize] += n;
                    }
                }
                pk = pk * (p % qq) % qq;
            }
            suffix_vecs[i] = Some(next);
        }
        let one = ModulusContext::new(1, table)?;
        Ok(Self {
            tree,
            q,
            suffix_vecs,
            tail_by_residue,
            n: table.n_q(&one),
        })
    }

    pub fn count(&self, x: f64) -> Result<ResidueCountVector> {
        let big_x = floor_biguint(x)?;
        let bound = if big_x >= self.n {
            u128::MAX
        } else {
            big_x.to_u128().ok_or_else(|| {
                Error::Resource(format!(
                    "x = {x} does not fit the 128-bit residue recursion"
                ))
            })?
        };
        let mut out = vec![0u128; self.q as usize];
        if bound == u128::MAX && self.tree.suffix_product[0] == u128::MAX {
            return Err(Error::Resource(
                "full divisor set of N_{1,y} exceeds 128 bits".into(),
            ));
        }
        self.count_from(0, bound, 1 % self.q, &mut out);
        Ok(ResidueCountVector::from_raw(self.q, out))
    }

    fn count_from(&self, i: usize, bound: u128, r: u64, out: &mut [u128]) {
        let q = self.q;
        let i = self.tree.skip_large(i, bound);
        if self.tree.covers(i, bound) {
            if let Some(v) = &self.suffix_vecs[i] {
                for (c, &n) in v.iter().enumerate() {
                    if n != 0 {
                        out[(r * c as u64 % q) as usize] += n;
                    }
                }
                return;
            }
        }
        if i == self.tree.head.len() {
            for (c, list) in self.tail_by_residue.iter().enumerate() {
                let n = list.partition_point(|&d| d <= bound);
                if n != 0 {
                    out[(r * c as u64 % q) as usize] += n as u128;
                }
            }
            return;
        }
        let (p, nu) = self.tree.head[i];
        let p_mod = (p % q as u128) as u64;
        let mut b = bound;
        let mut rr = r;
        for k in 0..=nu {
            self.count_from(i + 1, b, rr, out);
            if k == nu {
                break;
            }
            b /= p;
            if b == 0 {
                break;
            }
            rr = rr * p_mod % q;
        }
    }
}

/// Exact counts `Upsilon(x, y; a, q)` for every residue `a` modulo `q`.
pub fn count_ultrafriable_residues(
    x: f64,
    table: &PrimePowerTable,
    q: u64,
) -> Result<ResidueCountVector> {
    ResidueCounter::new(table, q)?.count(x)
}

/// `Upsilon(x, y; chi) = sum over ultrafriable n <= x of chi(n)`.
pub fn character_sum(
    x: f64,
    table: &PrimePowerTable,
    chi: &DirichletCharacter,
) -> Result<Complex64> {
    let counts = count_ultrafriable_residues(x, table, chi.modulus())?;
    Ok(character_sum_from(&counts, chi))
}

/// `sum_a chi(a) counts[a]` for an already computed residue vector.
pub fn character_sum_from(counts: &ResidueCountVector, chi: &DirichletCharacter) -> Complex64 {
    assert_eq!(counts.modulus(), chi.modulus(), "modulus mismatch");
    counts
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(a, c)| chi.value(a as u64) * c.to_f64())
        .sum()
}
