//! Special functions: the scaled complementary error function, the Gaussian
//! factor `G(z) = e^{z^2/2} Phi(z)`, and `xi(v)`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::roots;

// Cody's rational Chebyshev approximations (SPECFUN CALERF).
const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302,
    3_209.377_589_138_469_5,
    0.185_777_706_184_603_15,
];
const B: [f64; 4] = [
    23.601_290_952_344_122,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_171,
];
const C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_1,
    881.952_221_241_769,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_5,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_6,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
const P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_26,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

fn erfcx_positive(y: f64) -> f64 {
    if y <= 0.468_75 {
        let z = y * y;
        let num = (((A[4] * z + A[0]) * z + A[1]) * z + A[2]) * z + A[3];
        let den = (((z + B[0]) * z + B[1]) * z + B[2]) * z + B[3];
        z.exp() * (1.0 - y * num / den)
    } else if y <= 4.0 {
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        (num + C[7]) / (den + D[7])
    } else {
        let z = 1.0 / (y * y);
        let mut num = P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + P[i]) * z;
            den = (den + Q[i]) * z;
        }
        let r = z * (num + P[4]) / (den + Q[4]);
        (FRAC_1_SQRT_PI - r) / y
    }
}

/// `erfcx(x) = e^{x^2} erfc(x)`, finite for all `x > -26.6`.
pub fn erfcx(x: f64) -> f64 {
    if x >= 0.0 {
        erfcx_positive(x)
    } else {
        // erfcx(-y) = 2 e^{y^2} - erfcx(y); split the square to keep e^{y^2} accurate
        let y = -x;
        let y_hi = (y * 16.0).trunc() / 16.0;
        let e2 = (y_hi * y_hi).exp() * ((y - y_hi) * (y + y_hi)).exp();
        2.0 * e2 - erfcx_positive(y)
    }
}

/// `G(z) = e^{z^2/2} Phi(z)` with `Phi` the upper Gaussian tail, evaluated as
/// `erfcx(z/sqrt 2)/2`.
pub fn gaussian_g(z: f64) -> Result<f64> {
    if !(z >= -10.0) || !z.is_finite() {
        return Err(Error::Domain(format!(
            "G(z) is evaluated for finite z >= -10, got {z}"
        )));
    }
    Ok(0.5 * erfcx(z / SQRT_2))
}

/// `xi(v)`: the positive solution of `e^xi = 1 + v xi` for `v > 1`, and
/// `xi(1) = 0`.
pub fn xi(v: f64) -> Result<f64> {
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::Domain(format!("xi(v) needs finite v >= 1, got {v}")));
    }
    if v == 1.0 {
        return Ok(0.0);
    }
    let log_v = v.ln();
    let lo = log_v.max(0.0);
    let hi = (v * (1.0 + log_v).powi(2)).ln() + 1.0;
    // (e^xi - 1)/xi - v has no spurious root at 0 and keeps relative
    // accuracy when v is close to 1
    let root = roots::hybrid(
        |s| {
            let em1 = s.exp_m1();
            (em1 / s - v, (s.exp() * s - em1) / (s * s))
        },
        lo,
        hi,
        1e-3,
        |_| 1e-15 * v,
    )?;
    Ok(root.x)
}
