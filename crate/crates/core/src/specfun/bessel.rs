//! Modified Bessel function of the second kind for real order, always in the
//! exponentially scaled form `e^x K_ν(x)`.
//!
//! The fractional-order pair `K_μ, K_{μ+1}` with `|μ| ≤ 1/2` comes from
//! Temme's series for `x ≤ 2` and Steed's continued fraction (CF2) above;
//! integer steps in order use the forward recurrence, which is stable for `K`.
//! Large orders at small arguments overflow `f64`, so the recurrence carries a
//! binary exponent alongside the mantissa.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EPS: f64 = 1e-17;
const MAX_ITER: usize = 100_000;
const RESCALE_ABOVE: f64 = 1e280;
const RESCALE_BITS: i32 = 900;

/// Taylor coefficients of `1/Γ(1+z)` about `z = 0`.
const RGAMMA1P: [f64; 27] = [
    1.0,
    0.577_215_664_901_532_86,
    -0.655_878_071_520_253_88,
    -0.042_002_635_034_095_236,
    0.166_538_611_382_291_49,
    -0.042_197_734_555_544_337,
    -0.009_621_971_527_876_973_6,
    0.007_218_943_246_663_099_5,
    -0.001_165_167_591_859_065_1,
    -0.000_215_241_674_114_950_97,
    0.000_128_050_282_388_116_19,
    -0.000_020_134_854_780_788_239,
    -1.250_493_482_142_670_7e-6,
    1.133_027_231_981_695_9e-6,
    -2.056_338_416_977_607_1e-7,
    6.116_095_104_481_415_8e-9,
    5.002_007_644_469_222_9e-9,
    -1.181_274_570_487_020_1e-9,
    1.043_426_711_691_100_5e-10,
    7.782_263_439_905_071_3e-12,
    -3.696_805_618_642_205_7e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_506_8e-14,
    -5.348_122_539_423_018e-15,
    1.226_778_628_238_260_8e-15,
    -1.181_259_301_697_458_8e-16,
    1.186_692_254_751_600_3e-18,
];

/// `(1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)`, `(1/Γ(1-μ) + 1/Γ(1+μ)) / 2`,
/// `1/Γ(1+μ)`, `1/Γ(1-μ)` for `|μ| ≤ 1/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mu2 = mu * mu;
    let mut odd = 0.0; // Σ c_{2k+1} μ^{2k}
    let mut even = 0.0; // Σ c_{2k} μ^{2k}, k ≥ 0
    for k in (0..RGAMMA1P.len()).rev() {
        if k % 2 == 1 {
            odd = odd * mu2 + RGAMMA1P[k];
        } else {
            even = even * mu2 + RGAMMA1P[k];
        }
    }
    // 1/Γ(1+μ) = even + μ·odd, 1/Γ(1-μ) = even - μ·odd
    let gam1 = -odd;
    let gam2 = even;
    (gam1, gam2, even + mu * odd, even - mu * odd)
}

/// Scaled `(e^x K_μ(x), e^x K_{μ+1}(x))` for `|μ| ≤ 1/2`, `x > 0`.
fn k_pair_scaled(mu: f64, x: f64) -> Result<(f64, f64)> {
    if x <= 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < 1e-15 { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < 1e-15 { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mu2 = mu * mu;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Precision {
                what: "bessel_k Temme series".into(),
                estimate: f64::NAN,
                partial: sum,
            });
        }
        let scale = x.exp();
        Ok((sum * scale, sum1 * (2.0 / x) * scale))
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu * mu;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Precision {
                what: "bessel_k continued fraction".into(),
                estimate: f64::NAN,
                partial: s,
            });
        }
        h *= a1;
        let kmu = (PI / (2.0 * x)).sqrt() / s;
        let kmu1 = kmu * (mu + x + 0.5 - h) / x;
        Ok((kmu, kmu1))
    }
}

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_k requires finite x > 0, got {x}")));
    }
    Ok(())
}

/// `ln(e^x K_{a+n}(x))` for `n = 0..count` and `a ≥ 0`.
fn ln_k_upward(a: f64, x: f64, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    let nl = (a + 0.5).floor();
    let mu = a - nl;
    let nl = nl as usize;
    let (mut k0, mut k1) = k_pair_scaled(mu, x)?;
    let mut exp2: i32 = 0;
    let ln2 = std::f64::consts::LN_2;
    let two_over_x = 2.0 / x;
    // index `step` holds K_{mu+step} in k0 and K_{mu+step+1} in k1
    let mut step = 0usize;
    loop {
        if step >= nl {
            out.push(k0.ln() + exp2 as f64 * ln2);
            if out.len() == count {
                break;
            }
        }
        let next = (mu + (step + 1) as f64) * two_over_x * k1 + k0;
        k0 = k1;
        k1 = next;
        if k1 > RESCALE_ABOVE {
            k0 = libm::ldexp(k0, -RESCALE_BITS);
            k1 = libm::ldexp(k1, -RESCALE_BITS);
            exp2 += RESCALE_BITS;
        }
        step += 1;
    }
    Ok(out)
}

/// `e^x K_ν(x)`. Overflows to `+inf` only where the true value does.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    let a = nu.abs();
    let nl = (a + 0.5).floor();
    let mu = a - nl;
    let (mut k0, mut k1) = k_pair_scaled(mu, x)?;
    let mut exp2 = 0i32;
    let two_over_x = 2.0 / x;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * two_over_x * k1 + k0;
        k0 = k1;
        k1 = next;
        if k1 > RESCALE_ABOVE {
            k0 = libm::ldexp(k0, -RESCALE_BITS);
            k1 = libm::ldexp(k1, -RESCALE_BITS);
            exp2 += RESCALE_BITS;
        }
    }
    Ok(if exp2 == 0 { k0 } else if exp2 > 2000 { f64::INFINITY } else { libm::ldexp(k0, exp2) })
}

/// `ln(e^x K_ν(x))`, finite for every order.
pub fn ln_bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(ln_k_upward(nu.abs(), x, 1)?[0])
}

/// `ln(e^x K_{ν₀+n}(x))` for `n = 0..count`, sharing one fractional-order
/// evaluation across the whole ladder.
pub fn ln_bessel_k_scaled_ladder(nu0: f64, x: f64, count: usize) -> Result<Vec<f64>> {
    check_arg(x)?;
    // number of leading orders that are negative
    let n_neg = if nu0 < 0.0 { ((-nu0).ceil() as usize).min(count) } else { 0 };
    let mut out = Vec::with_capacity(count);
    if n_neg > 0 {
        // |ν₀+n| for n < n_neg runs downward from -ν₀ to -ν₀-(n_neg-1)
        let lowest = -nu0 - (n_neg - 1) as f64;
        let mut neg = ln_k_upward(lowest, x, n_neg)?;
        neg.reverse();
        out.extend(neg);
    }
    if count > n_neg {
        out.extend(ln_k_upward(nu0 + n_neg as f64, x, count - n_neg)?);
    }
    Ok(out)
}
