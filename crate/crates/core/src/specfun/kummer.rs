//! The Kummer `U(ν+1/2, 2ν+1, 2x)` family, which reduces to a Bessel `K`:
//! `K_ν(x) = √π e^{−x} (2x)^ν U(ν+1/2, 2ν+1, 2x)`.

use crate::error::Result;
use crate::specfun::bessel::{bessel_k_scaled, ln_bessel_k_scaled};

const LN_SQRT_PI: f64 = 0.572_364_942_924_700_087_071_713_675_677;

/// `U(ν+1/2, 2ν+1, 2x)` for `x > 0`.
pub fn kummer_u_bessel_family(nu: f64, x: f64) -> Result<f64> {
    let k = bessel_k_scaled(nu, x)?;
    let scale = (-nu * (2.0 * x).ln() - LN_SQRT_PI).exp();
    if k.is_finite() && scale.is_finite() && scale > 0.0 {
        Ok(k * scale)
    } else {
        Ok(ln_kummer_u_bessel_family(nu, x)?.exp())
    }
}

/// Natural log of [`kummer_u_bessel_family`]; the function is positive.
pub fn ln_kummer_u_bessel_family(nu: f64, x: f64) -> Result<f64> {
    Ok(ln_bessel_k_scaled(nu, x)? - nu * (2.0 * x).ln() - LN_SQRT_PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn order_zero_is_scaled_k0() {
        for &x in &[0.01, 1.0, 30.0] {
            let u = kummer_u_bessel_family(0.0, x).unwrap();
            let k = bessel_k_scaled(0.0, x).unwrap();
            assert!((u - k / PI.sqrt()).abs() < 1e-15 * u);
        }
    }

    #[test]
    fn half_order_at_one() {
        let u = kummer_u_bessel_family(0.5, 1.0).unwrap();
        assert!((u - 0.5).abs() < 1e-15);
    }

    #[test]
    fn half_order_is_power_law() {
        // U(1, 2, y) = 1/y
        for &x in &[0.003, 0.4, 7.0, 200.0] {
            let u = kummer_u_bessel_family(0.5, x).unwrap();
            assert!((u * 2.0 * x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn log_and_linear_agree() {
        for &(nu, x) in &[(-3.5, 0.2), (2.0, 5.0), (-12.0, 40.0), (7.5, 0.01)] {
            let u = kummer_u_bessel_family(nu, x).unwrap();
            let l = ln_kummer_u_bessel_family(nu, x).unwrap();
            assert!((u.ln() - l).abs() < 1e-12 * l.abs().max(1.0));
        }
    }
}
