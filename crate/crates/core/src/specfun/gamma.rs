//! Gamma-function family on the real line and the complex plane.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
pub fn ln_gamma(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() || is_pole(x) {
        return Err(Error::Domain(format!("ln_gamma pole or NaN at x = {x}")));
    }
    let (v, s) = libm::lgamma_r(x);
    Ok((v, if s < 0 { -1.0 } else { 1.0 }))
}

/// `ln Γ(x)` for `x > 0`. No pole check.
#[inline]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `1/Γ(x)`, an entire function: exactly zero at the poles of `Γ`.
pub fn rgamma(x: f64) -> f64 {
    if is_pole(x) {
        return 0.0;
    }
    if x > 170.0 {
        return (-lgamma(x)).exp();
    }
    1.0 / libm::tgamma(x)
}

/// Rising factorial `(x)_n = Γ(x+n)/Γ(x)`, with `(x)_0 = 1` for every `x`.
pub fn pochhammer(x: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n <= 64 || is_pole(x) {
        return (0..n).fold(1.0, |acc, k| acc * (x + k as f64));
    }
    let (v, s) = ln_pochhammer(x, n);
    s * v.exp()
}

/// `ln|(x)_n|` and the sign of `(x)_n`. A vanishing symbol returns `(-inf, 0)`.
pub fn ln_pochhammer(x: f64, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    if x > 0.0 {
        return (lgamma(x + n as f64) - lgamma(x), 1.0);
    }
    let mut acc = 0.0;
    let mut sign = 1.0;
    for k in 0..n {
        let f = x + k as f64;
        if f == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if f < 0.0 {
            sign = -sign;
        }
        acc += f.abs().ln();
    }
    (acc, sign)
}

/// Principal-branch-free complex log-gamma: the imaginary part is only
/// defined modulo `2π`, which is all the Mellin–Barnes integrands need.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Reflection: Γ(z)Γ(1-z) = π / sin(πz).
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_complex(1.0 - z);
    }
    let mut w = z;
    let mut shift = Complex64::new(1.0, 0.0);
    let mut ln_shift = Complex64::new(0.0, 0.0);
    while w.norm_sqr() < 144.0 {
        shift *= w;
        w += 1.0;
        if shift.norm_sqr() > 1e200 {
            ln_shift += shift.ln();
            shift = Complex64::new(1.0, 0.0);
        }
    }
    ln_shift += shift.ln();
    stirling(w) - ln_shift
}

fn stirling(z: Complex64) -> Complex64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for &c in C.iter().rev() {
        series = series * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series * inv
}

/// `ln sin(πz)` modulo `2πi`, stable for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 20.0 {
        return (z * PI).sin().ln();
    }
    // For Im z > 0, sin(πz) = -e^{-iπz}(1 - e^{2iπz}) / (2i).
    let upper = |w: Complex64| -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let small = (2.0 * PI * i * w).exp();
        -i * PI * w - Complex64::new(2.0_f64.ln(), PI / 2.0) + (1.0 - small).ln()
            + Complex64::new(0.0, PI)
    };
    if z.im > 0.0 {
        upper(z)
    } else {
        upper(z.conj()).conj()
    }
}
