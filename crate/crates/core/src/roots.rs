//! Bracketed bisection + Newton hybrid for strictly monotone functions.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `f(x)` at the returned point.
    pub value: f64,
    pub iterations: u32,
}

const MAX_ITERATIONS: u32 = 400;

/// Finds the root of `f` in `[lo, hi]` where `f(lo)` and `f(hi)` have
/// opposite signs. `f` returns `(value, derivative)`.
///
/// Bisects until the bracket is narrower than `switch_width * |mid|`, then
/// takes Newton steps, falling back to bisection whenever a step leaves the
/// bracket or fails to halve `|f|`. Stops when `|f| <= tol(x)`.
pub fn hybrid<F, T>(mut f: F, mut lo: f64, mut hi: f64, switch_width: f64, tol: T) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
    T: Fn(f64) -> f64,
{
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            value: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            value: 0.0,
            iterations: 0,
        });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Domain(format!(
            "root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    let lo_negative = f_lo < 0.0;
    let mut iterations = 0;
    let mut x = 0.5 * (lo + hi);
    let mut newton = false;
    let mut last_abs = f64::INFINITY;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (v, dv) = f(x);
        if v.abs() <= tol(x) {
            return Ok(Root {
                x,
                value: v,
                iterations,
            });
        }
        if (v < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        if !newton && (hi - lo).abs() <= switch_width * x.abs().max(f64::MIN_POSITIVE) {
            newton = true;
        }
        let bisect = 0.5 * (lo + hi);
        let mut next = bisect;
        if newton && dv != 0.0 && dv.is_finite() && v.abs() < 0.5 * last_abs {
            let step = x - v / dv;
            if step > lo.min(hi) && step < lo.max(hi) {
                next = step;
            }
        }
        last_abs = v.abs();
        if next == x || lo == hi {
            return Ok(Root {
                x,
                value: v,
                iterations,
            });
        }
        x = next;
    }
    let (v, _) = f(x);
    Ok(Root {
        x,
        value: v,
        iterations,
    })
}
