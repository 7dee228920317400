//! Gaussian quadrature on `[0, ∞)` with weight `e^{−x²}`.
//!
//! The recurrence coefficients of the monic orthogonal polynomials come from
//! the modified moments `μ_n = Γ((n+1)/2)/2` through the Chebyshev algorithm,
//! carried out in exact rational arithmetic (with `√π` replaced by an 80-digit
//! rational) because the moment map is violently ill-conditioned. Nodes are the
//! eigenvalues of the Jacobi matrix, polished by Newton steps on the
//! recurrence; weights use the Christoffel formula so tiny tail weights keep
//! full relative accuracy.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

const SQRT_PI_DIGITS: &str =
    "17724538509055160272981674833411451827975494561223871282138077898529112845910322";

/// A Gaussian rule for `∫₀^∞ e^{−x²} f(x) dx ≈ Σ w_k f(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// The 15-point rule used by the quadrature form of the outage formula.
pub type GaussRule15 = GaussRule;

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_k f(t_k)`.
    pub fn apply(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

fn sqrt_pi_rational() -> BigRational {
    let num: BigInt = SQRT_PI_DIGITS.parse().expect("digit literal");
    let den = num_traits::pow(BigInt::from(10), SQRT_PI_DIGITS.len() - 1);
    BigRational::new(num, den)
}

/// `Γ((n+1)/2)/2` as a rational (exact for odd `n`, `√π`-approximated otherwise).
fn half_line_moments(count: usize) -> Vec<BigRational> {
    let sqrt_pi = sqrt_pi_rational();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut out = Vec::with_capacity(count);
    // Γ(1/2) and Γ(1), advanced by Γ(a+1) = a·Γ(a)
    let mut g_even = sqrt_pi;
    let mut g_odd = BigRational::one();
    for n in 0..count {
        if n % 2 == 0 {
            out.push(&g_even * &half);
            let a = BigRational::new(BigInt::from(2 * (n / 2) + 1), BigInt::from(2));
            g_even = g_even * a;
        } else {
            out.push(&g_odd * &half);
            let a = BigRational::from_integer(BigInt::from(n / 2 + 1));
            g_odd = g_odd * a;
        }
    }
    out
}

/// Recurrence coefficients `(α_k, β_k)`, `k < n`, of the monic orthogonal
/// polynomials for the given moments `μ_0..μ_{2n−1}`.
fn chebyshev_algorithm(mom: &[BigRational], n: usize) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let len = 2 * n;
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut prev: Vec<BigRational> = vec![BigRational::zero(); len];
    let mut cur: Vec<BigRational> = mom[..len].to_vec();
    alpha.push(&mom[1] / &mom[0]);
    beta.push(mom[0].clone());
    for k in 1..n {
        let mut next = vec![BigRational::zero(); len];
        for l in k..(len - k) {
            next[l] = &cur[l + 1] - &alpha[k - 1] * &cur[l] - &beta[k - 1] * &prev[l];
        }
        if next[k].is_zero() || cur[k - 1].is_zero() {
            return Err(Error::Consistency(format!("moment matrix singular at order {k}")));
        }
        let a = &next[k + 1] / &next[k] - &cur[k] / &cur[k - 1];
        let b = &next[k] / &cur[k - 1];
        if b <= BigRational::zero() {
            return Err(Error::Consistency(format!("non-positive recurrence coefficient at order {k}")));
        }
        alpha.push(a);
        beta.push(b);
        prev = cur;
        cur = next;
    }
    Ok((alpha, beta))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Orthonormal polynomial values `p̂_0..p̂_{n−1}` at `x` and `p̂_n`, `p̂_n'`.
fn orthonormal_eval(alpha: &[f64], sb: &[f64], x: f64, vals: &mut Vec<f64>) -> (f64, f64) {
    let n = alpha.len();
    vals.clear();
    let mut p_prev = 0.0;
    let mut d_prev = 0.0;
    let mut p = 1.0 / sb[0];
    let mut d = 0.0;
    for j in 0..n {
        vals.push(p);
        let s_next = if j + 1 < n { sb[j + 1] } else { 1.0 };
        let s_cur = if j == 0 { 0.0 } else { sb[j] };
        let p_next = ((x - alpha[j]) * p - s_cur * p_prev) / s_next;
        let d_next = ((x - alpha[j]) * d + p - s_cur * d_prev) / s_next;
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
    }
    (p, d)
}

/// The `n`-point Gaussian rule for weight `e^{−x²}` on `[0, ∞)`.
pub fn gauss_rule(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::InvalidParameter("gauss_rule needs at least one point".into()));
    }
    let mom = half_line_moments(2 * n);
    let (alpha_q, beta_q) = chebyshev_algorithm(&mom, n)?;
    let alpha: Vec<f64> = alpha_q.iter().map(to_f64).collect();
    // sb[0] = √μ₀, sb[k] = √β_k
    let sb: Vec<f64> = beta_q.iter().map(|b| to_f64(b).sqrt()).collect();

    let jac = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            sb[c]
        } else if c + 1 == r {
            sb[r]
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = jac.symmetric_eigen().eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let mut vals = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for t in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d) = orthonormal_eval(&alpha, &sb, *t, &mut vals);
            if d == 0.0 {
                break;
            }
            *t -= p / d;
        }
        orthonormal_eval(&alpha, &sb, *t, &mut vals);
        let s: f64 = vals.iter().map(|v| v * v).sum();
        weights.push(1.0 / s);
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) || nodes[0] <= 0.0 || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Consistency("Gauss rule construction produced invalid nodes".into()));
    }
    Ok(GaussRule { nodes, weights })
}

/// The 15-point rule, built once per process.
pub fn gauss_rule_15() -> &'static GaussRule15 {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_rule(15).expect("15-point rule construction is well conditioned in exact arithmetic"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn moment(n: usize) -> f64 {
        0.5 * libm::tgamma((n as f64 + 1.0) / 2.0)
    }

    #[test]
    fn zeroth_and_second_moments() {
        let r = gauss_rule_15();
        let sp = std::f64::consts::PI.sqrt();
        assert!((r.weights.iter().sum::<f64>() - sp / 2.0).abs() < 1e-12);
        assert!((r.apply(|t| t * t) - sp / 4.0).abs() < 1e-12);
    }

    #[test]
    fn exact_through_degree_29() {
        let r = gauss_rule_15();
        for n in 0..=29 {
            let got = r.apply(|t| t.powi(n as i32));
            let rel = (got / moment(n) - 1.0).abs();
            assert!(rel <= 1e-10, "n={n} rel={rel:e}");
        }
        // Γ(15)/2 at the top degree
        assert!((r.apply(|t| t.powi(29)) / (0.5 * 87_178_291_200.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nodes_ordered_and_positive() {
        let r = gauss_rule_15();
        assert_eq!(r.len(), 15);
        assert!(r.nodes[0] > 0.0);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn known_extreme_points() {
        // high-precision values for the smallest and largest node and weight
        let r = gauss_rule_15();
        assert!((r.nodes[0] / 0.021_686_942_698_851_217 - 1.0).abs() < 1e-12);
        assert!((r.nodes[14] / 5.460_488_773_864_857 - 1.0).abs() < 1e-13);
        assert!((r.weights[0] / 0.055_443_354_299_712_61 - 1.0).abs() < 1e-12);
        assert!((r.weights[14] / 9.562_291_451_848_748e-14 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_points_rejected() {
        assert!(gauss_rule(0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn smaller_rules_are_exact_to_their_degree(n in 1usize..=20) {
            let r = gauss_rule(n).unwrap();
            for d in 0..(2 * n) {
                let got = r.apply(|t| t.powi(d as i32));
                prop_assert!((got / moment(d) - 1.0).abs() < 1e-10, "n={} d={}", n, d);
            }
        }
    }
}
