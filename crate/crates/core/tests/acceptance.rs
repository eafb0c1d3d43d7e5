//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ultrafriable::calibration::{
    self, character_ratios, noncoprime_point, progression_points, t1_points, t2_points, BandPoint,
};
use ultrafriable::characters::{all_character_sums, reconstruct_progression};
use ultrafriable::counting::{NaiveOracle, OracleFilter, UltrafriableCounter};
use ultrafriable::saddle::{
    friable_log_derivative, log_z_q, phi_1, phi_j_q, solve_alpha_log, solve_beta_log,
};
use ultrafriable::special::{gaussian_g, xi};
use ultrafriable::{
    count_friable, count_friable_progression, count_ultrafriable, count_ultrafriable_residues,
    estimators::t3_bound, modulus_context, naive_oracle, Constants, OracleMode, PrimePowerTable,
    TheoremTag,
};

const FROZEN: &str = include_str!("../calibration/frozen_constants.txt");

const SEED: u64 = 0x5eed_0ff1_ab1e;
const ORACLE_TUPLES: usize = 500;
const ORACLE_MAX_X: u64 = 1_000_000;
const SYMMETRY_TUPLES: usize = 120;
const RECONSTRUCTION_TOL: f64 = 1e-6;
const SADDLE_RESIDUAL_TOL: f64 = 1e-10;
const FD_TOL: f64 = 1e-5;
const G_TOL: f64 = 1e-12;
const XI_RESIDUAL_TOL: f64 = 1e-12;
const XI_BAND: f64 = 1.0;
const T3_DECREASING_SHARE: f64 = 0.8;

type Outcome = Result<String, String>;

fn frozen() -> BTreeMap<String, f64> {
    calibration::parse_constants(FROZEN).expect("frozen constants parse")
}

fn frozen_value(key: &str) -> f64 {
    *frozen()
        .get(key)
        .unwrap_or_else(|| panic!("frozen constant {key} missing"))
}

fn largest_prime_factor(mut q: u64) -> u64 {
    let mut p = 2;
    let mut big = 1;
    while p * p <= q {
        while q.is_multiple_of(p) {
            big = p;
            q /= p;
        }
        p += 1;
    }
    if q > 1 {
        q
    } else {
        big
    }
}

fn oracle_equality() -> Outcome {
    let oracle = NaiveOracle::new(ORACLE_MAX_X).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks = 0usize;
    for i in 0..ORACLE_TUPLES {
        let x = (rng.gen_range(0.0..(ORACLE_MAX_X as f64).ln()))
            .exp()
            .floor()
            .max(1.0) as u64;
        let y = rng.gen_range(2..=200u64);
        let q = loop {
            let q = rng.gen_range(1..=50u64);
            if largest_prime_factor(q) <= y {
                break q;
            }
        };
        let label = format!("tuple {i}: x={x} y={y} q={q}");
        let table = PrimePowerTable::build(y).map_err(|e| e.to_string())?;
        let ctx = modulus_context(q, &table).map_err(|e| e.to_string())?;
        let mismatch = |what: &str, got: String, want: String| {
            Err(format!("{label}: {what} {got} != oracle {want}"))
        };

        let got = count_ultrafriable(x as f64, &table, &ctx).map_err(|e| e.to_string())?;
        let want = oracle
            .count(x, y, OracleFilter::CoprimeTo(q), OracleMode::Ultrafriable)
            .map_err(|e| e.to_string())?;
        if got != want {
            return mismatch(
                "Upsilon_q",
                got.value().to_string(),
                want.value().to_string(),
            );
        }
        let got = count_friable(x as f64, y, q).map_err(|e| e.to_string())?;
        let want = oracle
            .count(x, y, OracleFilter::CoprimeTo(q), OracleMode::Friable)
            .map_err(|e| e.to_string())?;
        if got != want {
            return mismatch("Psi_q", got.value().to_string(), want.value().to_string());
        }

        let residues =
            count_ultrafriable_residues(x as f64, &table, q).map_err(|e| e.to_string())?;
        let want = oracle
            .residues(x, y, q, OracleMode::Ultrafriable)
            .map_err(|e| e.to_string())?;
        let want_friable = oracle
            .residues(x, y, q, OracleMode::Friable)
            .map_err(|e| e.to_string())?;
        for a in 0..q {
            if residues.get(a).to_u128() != Some(want[a as usize] as u128) {
                return mismatch(
                    &format!("Upsilon(a={a})"),
                    residues.get(a).value().to_string(),
                    want[a as usize].to_string(),
                );
            }
            let got = count_friable_progression(x as f64, y, a, q).map_err(|e| e.to_string())?;
            if got.to_u128() != Some(want_friable[a as usize] as u128) {
                return mismatch(
                    &format!("Psi(a={a})"),
                    got.value().to_string(),
                    want_friable[a as usize].to_string(),
                );
            }
        }
        checks += 2 + 2 * q as usize;
    }
    // the convenience entry point agrees with the shared sieve
    for (x, y, q) in [(1000u64, 10u64, 6u64), (54_321, 37, 35)] {
        let direct = naive_oracle(x, y, None, Some(q), OracleMode::Ultrafriable)
            .map_err(|e| e.to_string())?;
        let shared = oracle
            .count(x, y, OracleFilter::CoprimeTo(q), OracleMode::Ultrafriable)
            .map_err(|e| e.to_string())?;
        if direct != shared {
            return Err(format!(
                "naive_oracle({x}, {y}, q={q}) disagrees with the shared sieve"
            ));
        }
    }
    Ok(format!(
        "{ORACLE_TUPLES} tuples, {checks} exact counts equal"
    ))
}

fn random_below(rng: &mut ChaCha8Rng, bound: &BigUint) -> BigUint {
    let bytes = bound.to_bytes_le().len() + 8;
    let raw: Vec<u8> = (0..bytes).map(|_| rng.gen()).collect();
    BigUint::from_bytes_le(&raw) % bound
}

fn symmetry_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let mut at_divisors = 0usize;
    for i in 0..SYMMETRY_TUPLES {
        let y = rng.gen_range(2..=60u64);
        let q = loop {
            let q = rng.gen_range(1..=30u64);
            if largest_prime_factor(q) <= y {
                break q;
            }
        };
        let table = PrimePowerTable::build(y).map_err(|e| e.to_string())?;
        let ctx = modulus_context(q, &table).map_err(|e| e.to_string())?;
        let counter = UltrafriableCounter::new(&table, &ctx).map_err(|e| e.to_string())?;
        let n = counter.n().clone();
        let mut root = n.sqrt();
        if &root * &root < n {
            root += 1u32;
        }
        let x = if i % 3 == 0 {
            // a divisor of N at or above sqrt(N)
            let mut d = BigUint::one();
            for e in table.entries().iter().filter(|e| q % e.p != 0) {
                let k = rng.gen_range(0..=e.nu);
                d *= BigUint::from(e.p).pow(k);
            }
            at_divisors += 1;
            if &d * &d < n {
                &n / &d
            } else {
                d
            }
        } else {
            &root + random_below(&mut rng, &(&n - &root + BigUint::one()))
        };
        if &x * &x < n || x > n {
            return Err(format!(
                "tuple {i}: x = {x} outside [sqrt N, N] for N = {n}"
            ));
        }
        let upper = counter.count_at_most(&x).map_err(|e| e.to_string())?;
        // d < N/x  <=>  d <= (N - 1)/x
        let lower = counter
            .count_at_most(&((&n - BigUint::one()) / &x))
            .map_err(|e| e.to_string())?;
        let sum = upper.value() + lower.value();
        if &sum != counter.tau() {
            return Err(format!(
                "y={y} q={q} x={x}: {} + {} != tau = {}",
                upper.value(),
                lower.value(),
                counter.tau()
            ));
        }
    }
    Ok(format!(
        "{SYMMETRY_TUPLES} tuples ({at_divisors} at divisors of N) sum to tau(N)"
    ))
}

fn orthogonality() -> Outcome {
    let mut worst = 0.0f64;
    let mut n = 0usize;
    for q in [3u64, 4, 5, 7, 8, 9, 12, 16, 21, 30] {
        for x in [2520.0, 1e5] {
            for y in [10u64, 50] {
                let table = PrimePowerTable::build(y).map_err(|e| e.to_string())?;
                let exact = count_ultrafriable_residues(x, &table, q).map_err(|e| e.to_string())?;
                for a in (1..q).filter(|&a| num_integer_gcd(a, q) == 1) {
                    let rec =
                        reconstruct_progression(x, &table, a, q).map_err(|e| e.to_string())?;
                    let want = exact.get(a).to_f64();
                    let err = (rec.re - want).abs().max(rec.im.abs());
                    let scaled = err / (1.0 + want);
                    worst = worst.max(scaled);
                    n += 1;
                    if scaled > RECONSTRUCTION_TOL {
                        return Err(format!("q={q} x={x} y={y} a={a}: {rec} vs {want}"));
                    }
                }
            }
        }
    }
    Ok(format!("{n} residues, worst |err|/(1+exact) = {worst:.2e}"))
}

fn num_integer_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `d^j/ds^j f` at `s`, central differences with two Richardson steps.
fn derivative(f: &dyn Fn(f64) -> f64, s: f64, j: u32, h: f64) -> f64 {
    let stencil = |h: f64| -> f64 {
        match j {
            1 => (f(s + h) - f(s - h)) / (2.0 * h),
            2 => (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h),
            3 => {
                (f(s + 2.0 * h) - 2.0 * f(s + h) + 2.0 * f(s - h) - f(s - 2.0 * h))
                    / (2.0 * h.powi(3))
            }
            4 => {
                (f(s + 2.0 * h) - 4.0 * f(s + h) + 6.0 * f(s) - 4.0 * f(s - h) + f(s - 2.0 * h))
                    / h.powi(4)
            }
            _ => unreachable!(),
        }
    };
    let (d1, d2, d4) = (stencil(h), stencil(h / 2.0), stencil(h / 4.0));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

fn saddle_residuals() -> Outcome {
    let ys = [
        20u64, 50, 100, 200, 500, 1000, 3000, 10_000, 30_000, 100_000,
    ];
    let mut beta_worst = 0.0f64;
    let mut alpha_worst = 0.0f64;
    let mut fd_worst = 0.0f64;
    let mut points = 0usize;
    for &y in &ys {
        let table = PrimePowerTable::build(y).map_err(|e| e.to_string())?;
        let log_y = table.log_y();
        let top = 0.49 * table.psi();
        for k in 0..20 {
            // log x from just above log y up to just below psi(y)/2
            let log_x = 1.001 * log_y + (top - 1.001 * log_y) * k as f64 / 19.0;
            points += 1;
            let beta =
                solve_beta_log(log_x, &table).map_err(|e| format!("y={y} log_x={log_x}: {e}"))?;
            let r = (phi_1(beta.sigma, &table) - log_x).abs() / log_x;
            beta_worst = beta_worst.max(r);
            let alpha =
                solve_alpha_log(log_x, &table).map_err(|e| format!("y={y} log_x={log_x}: {e}"))?;
            let ld = friable_log_derivative(alpha.sigma, &table).map_err(|e| e.to_string())?;
            alpha_worst = alpha_worst.max((ld - log_x).abs() / log_x);

            if k % 4 == 1 {
                for q in [1u64, 6, 30] {
                    let ctx = modulus_context(q, &table).map_err(|e| e.to_string())?;
                    let lz = |s: f64| log_z_q(s, &table, &ctx).unwrap();
                    let b = beta.sigma;
                    for j in 1..=4u32 {
                        // derivatives scale like (log y)^j
                        let h = (b * 0.25).min(if j <= 2 { 0.05 } else { 0.4 } / log_y);
                        let fd = derivative(&lz, b, j, h) * if j % 2 == 0 { 1.0 } else { -1.0 };
                        let exact = phi_j_q(j, b, &table, &ctx).map_err(|e| e.to_string())?;
                        let rel = (fd - exact).abs() / exact.abs();
                        fd_worst = fd_worst.max(rel);
                        if rel > FD_TOL {
                            return Err(format!(
                                "sigma_{j},{q} at y={y} beta={b}: {exact} vs finite difference {fd}"
                            ));
                        }
                    }
                }
            }
        }
    }
    if beta_worst > SADDLE_RESIDUAL_TOL || alpha_worst > SADDLE_RESIDUAL_TOL {
        return Err(format!(
            "worst residuals beta {beta_worst:.2e}, alpha {alpha_worst:.2e}"
        ));
    }
    Ok(format!(
        "{points} points; residuals beta {beta_worst:.1e}, alpha {alpha_worst:.1e}; sigma_j,q vs FD {fd_worst:.1e}"
    ))
}

fn special_functions() -> Outcome {
    let g0 = gaussian_g(0.0).map_err(|e| e.to_string())?;
    if g0 != 0.5 {
        return Err(format!("G(0) = {g0:e}"));
    }
    let mut g_worst = 0.0f64;
    for i in 0..=500 {
        let z = 50.0 * i as f64 / 500.0;
        // G(z) = (2 pi)^{-1/2} int_0^inf exp(-z t - t^2/2) dt, in units of 1/(1 + z),
        // integrated piecewise over [0, 60]
        let w = 1.0 / (1.0 + z);
        let integral: f64 = (0..60)
            .map(|k| {
                quadrature::double_exponential::integrate(
                    |s| {
                        let t = s * w;
                        (-z * t - 0.5 * t * t).exp()
                    },
                    k as f64,
                    (k + 1) as f64,
                    1e-20,
                )
                .integral
            })
            .sum::<f64>()
            * w;
        let reference = integral / (2.0 * std::f64::consts::PI).sqrt();
        let g = gaussian_g(z).map_err(|e| e.to_string())?;
        let rel = (g - reference).abs() / reference;
        g_worst = g_worst.max(rel);
        if rel > G_TOL {
            return Err(format!("G({z}) = {g:e}, quadrature {reference:e}"));
        }
    }
    let mut xi_worst = 0.0f64;
    let mut band_worst = 0.0f64;
    for i in 0..=900 {
        let v = 10f64.powf(9.0 * i as f64 / 900.0);
        let t = xi(v).map_err(|e| e.to_string())?;
        let res = (t.exp_m1() - v * t).abs() / (1.0 + v * t);
        xi_worst = xi_worst.max(res);
        if res > XI_RESIDUAL_TOL {
            return Err(format!("xi({v}) = {t}: residual {res:e}"));
        }
        if v >= 1e3 {
            let gap = (t - (v * v.ln()).ln()).abs();
            band_worst = band_worst.max(gap);
            if gap > XI_BAND {
                return Err(format!("xi({v}) = {t} is {gap} from log(v log v)"));
            }
        }
    }
    Ok(format!(
        "G(0) = 1/2; G vs quadrature {g_worst:.1e}; xi residual {xi_worst:.1e}; xi band {band_worst:.3}"
    ))
}

fn check_band(points: &[BandPoint], c: f64) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for p in points {
        worst = worst.max(p.ratio());
        if p.deviation > c * p.budget {
            return Err(format!(
                "{}: deviation {:.4e} exceeds {c:.4} x budget {:.4e}",
                p.label, p.deviation, p.budget
            ));
        }
    }
    Ok(worst)
}

fn t1_accuracy() -> Outcome {
    let c = frozen_value("t1_c");
    let constants = calibration::calibration_constants();
    let log_xs = calibration::log_grid(20.0, 40.0, 10);
    let mut all = Vec::new();
    for q in [1u64, 6, 30] {
        all.extend(t1_points(100, &[q], &log_xs, &constants).map_err(|e| e.to_string())?);
    }
    let worst = check_band(&all, c)?;
    let first = all[0].deviation;
    let last = all[log_xs.len() - 1].deviation;
    if last >= first {
        return Err(format!(
            "q=1: error at u~8.7 ({last:.4e}) not below u~4.3 ({first:.4e})"
        ));
    }
    Ok(format!(
        "{} points, worst deviation/budget {worst:.3} <= C = {c:.3}; q=1 error {first:.4} -> {last:.4}",
        all.len()
    ))
}

fn t2_band() -> Outcome {
    let c = frozen_value("t2_c");
    let points = t2_points(1e6, &[500, 1000, 2000], &[1, 2, 6, 15]).map_err(|e| e.to_string())?;
    let worst = check_band(&points, c)?;
    Ok(format!(
        "{} points, worst ratio {worst:.3} <= C' = {c:.3}",
        points.len()
    ))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn equidistribution() -> Outcome {
    let constants = calibration::calibration_constants();
    let c4 = frozen_value("t4_c");
    let c5 = frozen_value("t5_c");
    let mut t4 = Vec::new();
    let mut medians = Vec::new();
    for q in [3u64, 7, 11] {
        let at = |lx: f64| {
            progression_points(lx.exp(), 100, q, TheoremTag::T4, &constants)
                .map_err(|e| e.to_string())
        };
        t4.extend(at(30.0)?);
        let lo = median(at(20.0)?.iter().map(|p| p.deviation).collect());
        let hi = median(at(40.0)?.iter().map(|p| p.deviation).collect());
        if hi > lo {
            return Err(format!(
                "q={q}: median deviation rises from {lo:.3e} at e^20 to {hi:.3e} at e^40"
            ));
        }
        medians.push(format!("q={q} {lo:.1e}->{hi:.1e}"));
    }
    let w4 = check_band(&t4, c4)?;
    let mut t5 = Vec::new();
    for q in [3u64, 11, 31] {
        t5.extend(
            progression_points(1e6, 1000, q, TheoremTag::T5, &constants)
                .map_err(|e| e.to_string())?,
        );
    }
    let w5 = check_band(&t5, c5)?;
    Ok(format!(
        "T4 worst ratio {w4:.2e} <= {c4:.2e}, medians {}; T5 worst ratio {w5:.2e} <= {c5:.2e}",
        medians.join(", ")
    ))
}

fn noncoprime_residues() -> Outcome {
    let c = frozen_value("r6_c");
    let constants = calibration::calibration_constants();
    let points: Vec<BandPoint> = [(6u64, 2u64), (15, 5), (10, 4)]
        .iter()
        .map(|&(q, a)| noncoprime_point(25f64.exp(), 50, q, a, &constants))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let worst = check_band(&points, c)?;
    let devs: Vec<String> = points
        .iter()
        .map(|p| format!("{:.3}", p.deviation))
        .collect();
    Ok(format!(
        "deviations [{}], worst ratio {worst:.3} <= {c:.3}",
        devs.join(", ")
    ))
}

fn character_diagnostic() -> Outcome {
    let constants = Constants {
        c1: frozen_value("t3_c1"),
        ..calibration::calibration_constants()
    };
    let y = 100u64;
    let table = PrimePowerTable::build(y).map_err(|e| e.to_string())?;
    let x = 30f64.exp();
    let mut total = 0usize;
    let mut decreasing = 0usize;
    let mut worst = 0.0f64;
    for q in [3u64, 5, 7, 8, 11] {
        let ctx = modulus_context(q, &table).map_err(|e| e.to_string())?;
        let (count, sums) = all_character_sums(x, &table, q).map_err(|e| e.to_string())?;
        let lo = character_ratios(20f64.exp(), y, q).map_err(|e| e.to_string())?;
        let hi = character_ratios(40f64.exp(), y, q).map_err(|e| e.to_string())?;
        for (k, (chi, s)) in sums
            .iter()
            .filter(|(chi, _)| !chi.is_principal())
            .enumerate()
        {
            let ratio = s.norm() / count.to_f64();
            let (_, bound1) =
                t3_bound(x, &table, &ctx, chi, &constants).map_err(|e| e.to_string())?;
            worst = worst.max(ratio / bound1);
            if ratio > bound1 {
                return Err(format!(
                    "{chi}: ratio {ratio:.3e} above the bound {bound1:.3e}"
                ));
            }
            total += 1;
            if hi[k].ratio < lo[k].ratio {
                decreasing += 1;
            }
        }
    }
    let share = decreasing as f64 / total as f64;
    if share < T3_DECREASING_SHARE {
        return Err(format!(
            "ratio decreases for {decreasing}/{total} characters"
        ));
    }
    Ok(format!(
        "{total} characters under the bound (worst ratio/bound {worst:.2e}); decreasing for {decreasing}/{total}"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equality", oracle_equality),
        ("divisor symmetry", symmetry_identity),
        ("orthogonality reconstruction", orthogonality),
        ("saddle residuals", saddle_residuals),
        ("special functions", special_functions),
        ("T1 accuracy", t1_accuracy),
        ("T2 band", t2_band),
        ("T4/T5 equidistribution", equidistribution),
        ("non-coprime residues", noncoprime_residues),
        ("T3 character diagnostic", character_diagnostic),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
