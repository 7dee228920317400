//! Secrecy outage probability and the probability of non-zero secrecy
//! capacity.
//!
//! With `h(x₂, r) = (1+x₂)2^r − 1` the outage probability at target rate `r`
//! is `P_o(r) = 1 − Pr[γ₁ > h(γ₂, r)]`, and `P_o(0) = Pr[γ₂ > γ₁]` (up to a
//! null event). The probability of non-zero secrecy capacity is its
//! complement `Pr[γ₁ > γ₂]`; some literature labels `P_o(0)` itself as
//! "PNZSC", so both [`pzero`] and [`pnzsc`] are exposed under unambiguous
//! names.
//!
//! Evaluators, all built on the negative-binomial mixture of
//! [`crate::channel`]:
//!
//! * [`sop`] (default route): the inner `x₁` integral is closed in terms of
//!   the generalized-K survival function, a Meijer `G^{3,0}_{1,3}`; the outer
//!   single integral is done by adaptive Gauss–Kronrod. One Meijer evaluation
//!   per node suffices, the higher shadow orders following from a contiguous
//!   Bessel recurrence. Link exchange (`k₁ > k₂`) is handled by integrating
//!   the other variable on the outside.
//! * [`sop_steen15`]: the same single integral with the fixed 15-point
//!   half-range Gauss rule for `e^{−t²}` after `x = t⁴/(4A)`. Exact only for
//!   smooth, slowly varying integrands; it degrades when the mixture reaches
//!   high shadow orders (large `ρ·k`).
//! * [`sop_printed`]: the published quadrature formula transcribed verbatim.
//!   Its Meijer argument is `A₂(2^r(1+x₁) − 1)`, so it evaluates
//!   `1 − Pr[γ₂ > 2^r(1+γ₁) − 1]`, the outage probability with the two links'
//!   roles exchanged. Kept for comparison only.
//! * [`sop_oracle`]: nested adaptive quadrature of the joint density over the
//!   non-outage region; the reference for every other route.
//! * [`pzero`]: the closed-form series with `G^{2,3}_{3,3}` terms. Each term
//!   equals `Γ(b₁)Γ(b₂)Γ(m₁)Γ(m₂)·Pr[X₂ > X₁]` for the matching mixture
//!   component; all terms are evaluated on one shared Mellin–Barnes line.
//! * [`pzero_asymptotic`]: the high-SNR power law.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{
    canonical_order, derived_params, gk_cdf_pair, gk_ccdf_ladder, gk_ln_pdf_ladder, mixture_by_mass, LinkParams,
    Mixture, SeriesControl, TruncationRule, WiretapModel,
};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_vec, QuadOptions};
use crate::specfun::gamma::{lgamma, ln_pochhammer};
use crate::specfun::meijer::{line_integral_vec, line_offset, MeijerSpec};
use crate::specfun::{gauss_rule_15, ln_gamma_complex, ln_kummer_u_bessel_family};

/// Default absolute tolerance of the 2D reference integration.
pub const DEFAULT_QUAD_TOL: f64 = 1e-6;
/// Raw probabilities this far outside `[0, 1]` are clamped; larger
/// excursions are reported as errors.
pub const CLAMP_TOL: f64 = 1e-9;
/// Absolute tolerance of the single outer integral of the series routes.
const SERIES_QUAD_TOL: f64 = 1e-12;
/// Relative accuracy demanded of the shared Mellin–Barnes line.
const LINE_REL_TOL: f64 = 1e-12;
/// Candidate pool for the relative-increment rule.
const POOL_TAIL_TOL: f64 = 1e-12;

/// Which evaluation produced a [`SecrecyResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed inner integral, adaptive outer quadrature.
    SeriesQuadrature,
    /// Closed-form series (shared Mellin–Barnes line).
    SeriesClosed,
    /// Nested 2D quadrature of the joint density.
    Oracle2d,
    /// High-SNR power law.
    Asymptotic,
    /// Closed inner integral with the fixed 15-point half-range rule.
    SteenRule,
    /// The published quadrature formula, verbatim.
    PrintedFormula,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SeriesQuadrature => "series_quadrature",
            Method::SeriesClosed => "series_closed",
            Method::Oracle2d => "oracle_2d",
            Method::Asymptotic => "asymptotic",
            Method::SteenRule => "steen_rule",
            Method::PrintedFormula => "printed_formula",
        }
    }
}

/// A probability with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecrecyResult {
    pub value: f64,
    /// Truncation order `𝒩` (terms per index) of the double series.
    pub terms_used: usize,
    /// Neglected mixture mass, a bound on the truncation error.
    pub tail_estimate: f64,
    pub method: Method,
    /// Whether the links were exchanged to reach `k₁ ≤ k₂`.
    pub swapped: bool,
    /// Integration error estimate (quadrature or contour).
    pub quad_error: f64,
}

/// Route selector for [`sop_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SopMethod {
    Series,
    Oracle,
    Steen15,
    Printed,
}

/// `h(x₂, r) = (1 + x₂)·2^r − 1`.
pub fn outage_threshold(x2: f64, r: f64) -> f64 {
    (1.0 + x2) * r.exp2() - 1.0
}

fn check_rate(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("secrecy rate must be finite and ≥ 0, got {r}")));
    }
    Ok(())
}

/// Clamps roundoff excursions; anything beyond [`CLAMP_TOL`] is an error.
pub fn clamp_probability(raw: f64, what: &str) -> Result<f64> {
    if !raw.is_finite() || raw < -CLAMP_TOL || raw > 1.0 + CLAMP_TOL {
        return Err(Error::Consistency(format!("{what} evaluated to {raw}, outside [0, 1]")));
    }
    Ok(raw.clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Truncation

/// Mixture pool for a canonical model: the final truncation under the mass
/// rule, or a deeper candidate pool for the relative-increment rule.
fn mixture_pool(canon: &WiretapModel, ctrl: &SeriesControl) -> Result<Mixture> {
    ctrl.validate()?;
    match ctrl.rule {
        TruncationRule::TailMass => mixture_by_mass(canon, ctrl.tail_tol, ctrl.max_terms),
        TruncationRule::RelativeIncrement => mixture_by_mass(canon, POOL_TAIL_TOL.min(ctrl.tail_tol), ctrl.max_terms),
    }
}

/// Chosen order, summed value and neglected mass from per-shell
/// contributions (`shells[n]` collects the terms with `max(i, j) = n`).
fn select_order(shells: &[f64], mix: &Mixture, ctrl: &SeriesControl) -> Result<(usize, f64, f64)> {
    let n_max = shells.len();
    let order = match ctrl.rule {
        TruncationRule::TailMass => {
            if mix.capped {
                return Err(Error::TruncationCap { cap: ctrl.max_terms, tail: mix.deficit, partial: shells.iter().sum() });
            }
            n_max
        }
        TruncationRule::RelativeIncrement => {
            let mut partial = 0.0;
            let mut chosen = None;
            for (n, s) in shells.iter().enumerate() {
                partial += s;
                if n >= 1 && s.abs() < ctrl.tail_tol * partial.abs() {
                    chosen = Some(n + 1);
                    break;
                }
            }
            match chosen {
                Some(n) => n,
                None if n_max == 1 || !mix.capped => n_max,
                None => {
                    return Err(Error::TruncationCap { cap: ctrl.max_terms, tail: mix.deficit, partial: shells.iter().sum() })
                }
            }
        }
    };
    let value = shells[..order].iter().sum();
    let deficit = if order == n_max { mix.deficit } else { mix.restricted(order).deficit };
    Ok((order, value, deficit))
}

/// The square truncation order and the size of each shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// `𝒩`, terms per index.
    pub order: usize,
    /// Neglected mixture mass at that order.
    pub deficit: f64,
    pub rule: TruncationRule,
    /// Per-shell magnitudes: mixture mass under the mass rule, contribution
    /// to `P_o(0)` under the relative-increment rule.
    pub shell_terms: Vec<f64>,
    /// Whether `max_terms` stopped the search early.
    pub capped: bool,
}

/// Reports the truncation order the configured rule selects.
///
/// Under [`TruncationRule::TailMass`] this is the smallest square holding
/// all but `tail_tol` of the mixture mass. Under
/// [`TruncationRule::RelativeIncrement`] it is the first order at which the
/// newest shell of the `P_o(0)` series changes the partial sum by less than
/// `tail_tol` relative.
pub fn truncation_report(model: &WiretapModel, ctrl: &SeriesControl) -> Result<TruncationReport> {
    model.validate()?;
    let (canon, _) = canonical_order(model);
    let mix = mixture_pool(&canon, ctrl)?;
    match ctrl.rule {
        TruncationRule::TailMass => {
            let n = mix.order();
            let mut shells = vec![0.0; n];
            for (i, p1) in mix.p1.iter().enumerate() {
                for (j, p2) in mix.p2.iter().enumerate() {
                    shells[i.max(j)] += p1 * p2;
                }
            }
            Ok(TruncationReport { order: n, deficit: mix.deficit, rule: ctrl.rule, shell_terms: shells, capped: mix.capped })
        }
        TruncationRule::RelativeIncrement => {
            let (shells, _) = pzero_shells(&canon, &mix)?;
            let capped_ctrl = SeriesControl { ..*ctrl };
            let (order, _, deficit) = match select_order(&shells, &mix, &capped_ctrl) {
                Ok(v) => v,
                Err(Error::TruncationCap { tail, .. }) => (shells.len(), 0.0, tail),
                Err(e) => return Err(e),
            };
            let capped = order == shells.len() && mix.capped;
            Ok(TruncationReport { order, deficit, rule: ctrl.rule, shell_terms: shells, capped })
        }
    }
}

// ---------------------------------------------------------------------------
// Single-integral routes

/// Layout of a single-integral route over the canonical mixture.
struct Route {
    /// Generalized-K parameters `(m, k, A)` of the integrated variable.
    outer: (f64, f64, f64),
    /// Whether the integrated variable carries shadow order `i+j` (else `i`).
    outer_ij: bool,
    /// Parameters of the variable whose probability is closed in form.
    inner: (f64, f64, f64),
    /// Inner probability is a CDF (else a survival function).
    inner_cdf: bool,
    /// Threshold applied to the outer variable.
    threshold: fn(f64, f64) -> f64,
    /// Route value is `1 − series`.
    complement: bool,
}

fn printed_threshold(x1: f64, r: f64) -> f64 {
    r.exp2() * (1.0 + x1) - 1.0
}

/// Route computing the outage probability of `model` (its own orientation).
fn outage_route(model: &WiretapModel) -> (WiretapModel, bool, Route) {
    let (canon, swapped) = canonical_order(model);
    let d = derived_params(&canon);
    let l1 = (canon.link_b.m, canon.link_b.k, d.a1);
    let l2 = (canon.link_e.m, canon.link_e.k, d.a2);
    let route = if !swapped {
        // 1 − Σ p ∫ f₂_{i+j}(x₂) Pr[X₁ᵢ > h(x₂)] dx₂
        Route { outer: l2, outer_ij: true, inner: l1, inner_cdf: false, threshold: outage_threshold, complement: true }
    } else {
        // γ_B is the canonical second variable: Σ p ∫ f₁ᵢ(x) Pr[X₂_{i+j} ≤ h(x)] dx
        Route { outer: l1, outer_ij: false, inner: l2, inner_cdf: true, threshold: outage_threshold, complement: false }
    };
    (canon, swapped, route)
}

/// Adds the shell contributions of the route integrand at outer value `x`
/// (with Jacobian factor `ln_jac` in log form) into `out`.
fn route_integrand(route: &Route, mix: &Mixture, r: f64, x: f64, ln_jac: f64, out: &mut [f64]) -> Result<()> {
    let (ni, nj) = (mix.n_i(), mix.n_j());
    let long = ni + nj - 1;
    let (lo, li) = if route.outer_ij { (long, ni) } else { (ni, long) };
    let (mo, ko, ao) = route.outer;
    let dens: Vec<f64> = gk_ln_pdf_ladder(mo, ko, ao, x, lo)?.into_iter().map(|l| (l + ln_jac).exp()).collect();
    let (mi, ki, ai) = route.inner;
    let z = ai * (route.threshold)(x, r);
    let prob: Vec<f64> = if z <= 0.0 {
        vec![if route.inner_cdf { 0.0 } else { 1.0 }; li]
    } else {
        let c = gk_ccdf_ladder(mi, ki, z, li)?;
        if route.inner_cdf {
            c.into_iter().map(|v| 1.0 - v).collect()
        } else {
            c
        }
    };
    for (i, p1) in mix.p1.iter().enumerate() {
        for (j, p2) in mix.p2.iter().enumerate() {
            let (od, ip) = if route.outer_ij { (i + j, i) } else { (i, i + j) };
            out[i.max(j)] += p1 * p2 * dens[od] * prob[ip];
        }
    }
    Ok(())
}

/// Smallest SNR with generalized-K survival below `eps`.
fn upper_quantile(link: &LinkParams, eps: f64) -> Result<f64> {
    let mut x = link.snr_avg.max(1e-300);
    for _ in 0..400 {
        if gk_cdf_pair(link.m, link.k, link.rate() * x)?.1 < eps {
            return Ok(x);
        }
        x *= 2.0;
    }
    Err(Error::Precision { what: "marginal tail bound".into(), estimate: f64::NAN, partial: x })
}

/// The marginal link of the outer variable (its law does not depend on ρ).
fn outer_marginal(canon: &WiretapModel, route: &Route) -> LinkParams {
    let (m, k, _) = route.outer;
    let g = if (m, k) == (canon.link_e.m, canon.link_e.k) && route.outer_ij { canon.link_e.snr_avg } else { canon.link_b.snr_avg };
    LinkParams { m, k, snr_avg: g }
}

fn finish(
    route: &Route,
    shells: &[f64],
    mix: &Mixture,
    ctrl: &SeriesControl,
    method: Method,
    swapped: bool,
    quad_error: f64,
) -> Result<SecrecyResult> {
    let (order, series, tail) = match select_order(shells, mix, ctrl) {
        Ok(v) => v,
        Err(Error::TruncationCap { cap, tail, partial }) => {
            let partial = if route.complement { 1.0 - partial } else { partial };
            return Err(Error::TruncationCap { cap, tail, partial });
        }
        Err(e) => return Err(e),
    };
    let raw = if route.complement { 1.0 - series } else { series };
    Ok(SecrecyResult {
        value: clamp_probability(raw, "secrecy outage probability")?,
        terms_used: order,
        tail_estimate: tail,
        method,
        swapped,
        quad_error,
    })
}

/// Secrecy outage probability by the default series route.
pub fn sop(model: &WiretapModel, r: f64, ctrl: &SeriesControl) -> Result<SecrecyResult> {
    model.validate()?;
    check_rate(r)?;
    let (canon, swapped, route) = outage_route(model);
    let mix = mixture_pool(&canon, ctrl)?;
    let dim = mix.order();
    let (mo, _, ao) = route.outer;
    let _ = mo;
    let x_max = upper_quantile(&outer_marginal(&canon, &route), 1e-14)?;
    let y_max = (4.0 * ao * x_max).sqrt().sqrt();
    let mut failure = None;
    let res = integrate_vec(
        |y, out| {
            if y <= 0.0 || failure.is_some() {
                return;
            }
            let x = y.powi(4) / (4.0 * ao);
            let ln_jac = 3.0 * y.ln() - ao.ln();
            if let Err(e) = route_integrand(&route, &mix, r, x, ln_jac, out) {
                failure = Some(e);
            }
        },
        dim,
        0.0,
        y_max,
        &QuadOptions { abs_tol: SERIES_QUAD_TOL, rel_tol: 0.0, max_intervals: 4000 },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let res = res?;
    finish(&route, &res.values, &mix, ctrl, Method::SeriesQuadrature, swapped, res.error)
}

/// Secrecy outage probability with the fixed 15-point rule on the outer
/// integral.
pub fn sop_steen15(model: &WiretapModel, r: f64, ctrl: &SeriesControl) -> Result<SecrecyResult> {
    model.validate()?;
    check_rate(r)?;
    let (canon, swapped, route) = outage_route(model);
    let mix = mixture_pool(&canon, ctrl)?;
    let mut shells = vec![0.0; mix.order()];
    let ao = route.outer.2;
    let rule = gauss_rule_15();
    let mut buf = vec![0.0; shells.len()];
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        buf.iter_mut().for_each(|v| *v = 0.0);
        let x = t.powi(4) / (4.0 * ao);
        let ln_jac = 3.0 * t.ln() - ao.ln() + t * t;
        route_integrand(&route, &mix, r, x, ln_jac, &mut buf)?;
        for (s, v) in shells.iter_mut().zip(&buf) {
            *s += w * v;
        }
    }
    finish(&route, &shells, &mix, ctrl, Method::SteenRule, swapped, f64::NAN)
}

/// The published 15-point formula, term by term:
///
/// ```text
/// 1 − 4√π (1−ρ)^{k₂}/(Γ(m₁)Γ(m₂)) Σ_{i,j} (k₁)_i (k₂−k₁)_j 2^{−2i−2k₁+1} ρ^{i+j}
///       / (i! j! (i+k₂)_j Γ(i+k₁) Γ(i+k₂))
///     × Σ_k w_k t_k^{4m₁−1} G^{3,0}_{1,3}[A₂(2^r(1 + t_k⁴/(4A₁)) − 1) | 1; 0, i+j+k₂, m₂]
///       × U(m₁−i−k₁+1/2, 2m₁−2i−2k₁+1, 2t_k²)
/// ```
///
/// The model is taken as given; its series is truncated at the order the
/// mass rule selects for the canonical ordering.
pub fn sop_printed(model: &WiretapModel, r: f64, ctrl: &SeriesControl) -> Result<SecrecyResult> {
    model.validate()?;
    check_rate(r)?;
    let (canon, swapped) = canonical_order(model);
    let mix = mixture_pool(&canon, ctrl)?;
    let n = mix.order();
    let nj = if model.link_b.k == model.link_e.k { 1 } else { n };
    let d = derived_params(model);
    let (m1, k1, m2, k2, rho) = (model.link_b.m, model.link_b.k, model.link_e.m, model.link_e.k, model.rho);
    let ln_rho = if rho > 0.0 { rho.ln() } else { f64::NEG_INFINITY };
    let ln2 = std::f64::consts::LN_2;
    let prefactor = ln2 * 2.0 + 0.5 * std::f64::consts::PI.ln() + k2 * (-rho).ln_1p() - lgamma(m1) - lgamma(m2);
    // (signed) log coefficient of term (i, j)
    let mut coef = vec![vec![(f64::NEG_INFINITY, 1.0); nj]; n];
    for (i, row) in coef.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            let (lp1, s1) = ln_pochhammer(k1, i);
            let (lp2, s2) = ln_pochhammer(k2 - k1, j);
            let (lp3, s3) = ln_pochhammer(i as f64 + k2, j);
            let pow_rho = if i + j == 0 { 0.0 } else { (i + j) as f64 * ln_rho };
            let l = prefactor + lp1 + lp2 + (1.0 - 2.0 * i as f64 - 2.0 * k1) * ln2 + pow_rho
                - lgamma(i as f64 + 1.0)
                - lgamma(j as f64 + 1.0)
                - lp3
                - lgamma(i as f64 + k1)
                - lgamma(i as f64 + k2);
            *c = (l, s1 * s2 * s3);
        }
    }
    let rule = gauss_rule_15();
    let mut shells = vec![0.0; n];
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let x1 = t.powi(4) / (4.0 * d.a1);
        let z = d.a2 * printed_threshold(x1, r);
        // G^{3,0}_{1,3}[z | 1; 0, b, m₂] = Γ(b)Γ(m₂)·Pr[G(m₂)G(b) > z]
        let ccdf = gk_ccdf_ladder(m2, k2, z, n + nj - 1)?;
        for (i, row) in coef.iter().enumerate() {
            let lu = ln_kummer_u_bessel_family(m1 - i as f64 - k1, t * t)?;
            for (j, &(lc, sign)) in row.iter().enumerate() {
                let b = k2 + (i + j) as f64;
                let lg = lgamma(b) + lgamma(m2) + ccdf[i + j].ln();
                let term = sign * (lc + w.ln() + (4.0 * m1 - 1.0) * t.ln() + lg + lu).exp();
                shells[i.max(j)] += term;
            }
        }
    }
    let route = Route {
        outer: (m1, k1, d.a1),
        outer_ij: false,
        inner: (m2, k2, d.a2),
        inner_cdf: false,
        threshold: printed_threshold,
        complement: true,
    };
    finish(&route, &shells, &mix, ctrl, Method::PrintedFormula, swapped, f64::NAN)
}

/// Dispatches to the requested outage route.
pub fn sop_with(model: &WiretapModel, r: f64, ctrl: &SeriesControl, method: SopMethod, quad_tol: f64) -> Result<SecrecyResult> {
    match method {
        SopMethod::Series => sop(model, r, ctrl),
        SopMethod::Oracle => sop_oracle(model, r, quad_tol),
        SopMethod::Steen15 => sop_steen15(model, r, ctrl),
        SopMethod::Printed => sop_printed(model, r, ctrl),
    }
}

/// [`sop`] checked against [`sop_oracle`]: a difference above `guard_tol`
/// is reported as a consistency error.
pub fn sop_guarded(model: &WiretapModel, r: f64, ctrl: &SeriesControl, quad_tol: f64, guard_tol: f64) -> Result<SecrecyResult> {
    let a = sop(model, r, ctrl)?;
    let o = sop_oracle(model, r, quad_tol)?;
    if (a.value - o.value).abs() > guard_tol {
        return Err(Error::Consistency(format!(
            "series value {} differs from the 2D reference {} by more than {guard_tol}",
            a.value, o.value
        )));
    }
    Ok(a)
}

// ---------------------------------------------------------------------------
// Reference 2D integration

/// Outage probability by nested adaptive quadrature of the joint density
/// over `{x₁ > h(x₂, r)}`, to absolute accuracy `quad_tol`.
///
/// Both variables are integrated after `x = y⁴/(4A)`; the ranges end where
/// the marginal survival falls below `quad_tol/10`. For each outer node the
/// mixture is collapsed onto the inner variable's shadow order, so an inner
/// evaluation costs one Bessel ladder.
pub fn sop_oracle(model: &WiretapModel, r: f64, quad_tol: f64) -> Result<SecrecyResult> {
    model.validate()?;
    check_rate(r)?;
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("quadrature tolerance must be > 0, got {quad_tol}")));
    }
    let (canon, swapped) = canonical_order(model);
    let mix = mixture_by_mass(&canon, SeriesControl::default().tail_tol, SeriesControl::default().max_terms)?;
    if mix.capped {
        return Err(Error::TruncationCap { cap: mix.order(), tail: mix.deficit, partial: f64::NAN });
    }
    let d = derived_params(&canon);
    let (ni, nj) = (mix.n_i(), mix.n_j());
    let long = ni + nj - 1;
    // original orientation: inner variable γ_B, outer variable γ_E
    let (inner_gk, outer_gk, inner_len, outer_len) = if !swapped {
        ((canon.link_b.m, canon.link_b.k, d.a1), (canon.link_e.m, canon.link_e.k, d.a2), ni, long)
    } else {
        ((canon.link_e.m, canon.link_e.k, d.a2), (canon.link_b.m, canon.link_b.k, d.a1), long, ni)
    };
    let x_in_max = upper_quantile(&model.link_b, quad_tol / 10.0)?;
    let x_out_max = upper_quantile(&model.link_e, quad_tol / 10.0)?;
    let (ai, ao) = (inner_gk.2, outer_gk.2);
    let y_in_max = (4.0 * ai * x_in_max).sqrt().sqrt();
    let y_out_max = (4.0 * ao * x_out_max).sqrt().sqrt();
    let inner_opts = QuadOptions { abs_tol: 1e-3 * quad_tol * 1e-3, rel_tol: 1e-3 * quad_tol, max_intervals: 4000 };
    let outer_opts = QuadOptions { abs_tol: 0.5 * quad_tol, rel_tol: 0.0, max_intervals: 4000 };
    let mut failure: Option<Error> = None;
    let mut weights = vec![0.0; inner_len];
    let outer = integrate(
        |y2| {
            if y2 <= 0.0 || failure.is_some() {
                return 0.0;
            }
            let x2 = y2.powi(4) / (4.0 * ao);
            let ln_jac2 = 3.0 * y2.ln() - ao.ln();
            let dens = match gk_ln_pdf_ladder(outer_gk.0, outer_gk.1, ao, x2, outer_len) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    return 0.0;
                }
            };
            weights.iter_mut().for_each(|w| *w = 0.0);
            for (i, p1) in mix.p1.iter().enumerate() {
                for (j, p2) in mix.p2.iter().enumerate() {
                    let (o, n) = if !swapped { (i + j, i) } else { (i, i + j) };
                    weights[n] += p1 * p2 * (dens[o] + ln_jac2).exp();
                }
            }
            let h = outage_threshold(x2, r);
            let y_lo = (4.0 * ai * h).sqrt().sqrt();
            if y_lo >= y_in_max {
                return 0.0;
            }
            let inner = integrate(
                |y1| {
                    if y1 <= 0.0 {
                        return 0.0;
                    }
                    let x1 = y1.powi(4) / (4.0 * ai);
                    let ln_jac1 = 3.0 * y1.ln() - ai.ln();
                    match gk_ln_pdf_ladder(inner_gk.0, inner_gk.1, ai, x1, inner_len) {
                        Ok(v) => v.iter().zip(&weights).map(|(l, w)| w * (l + ln_jac1).exp()).sum(),
                        Err(_) => f64::NAN,
                    }
                },
                y_lo,
                y_in_max,
                &inner_opts,
            );
            match inner {
                Ok(v) => v.value,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        0.0,
        y_out_max,
        &outer_opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer?;
    Ok(SecrecyResult {
        value: clamp_probability(1.0 - outer.value, "secrecy outage probability")?,
        terms_used: mix.order(),
        tail_estimate: mix.deficit,
        method: Method::Oracle2d,
        swapped,
        quad_error: outer.error,
    })
}

// ---------------------------------------------------------------------------
// Closed-form P_o(0)

/// Per-shell contributions to `Pr[γ₂ > γ₁]` for a canonical model, and the
/// line-integral error estimate.
///
/// Each component probability is
/// `(1/2πi) ∫ Γ(b₁+s)Γ(m₁+s)Γ(b₂−s)Γ(m₂−s) / (Γ(b₁)Γ(m₁)Γ(b₂)Γ(m₂)) · (−1/s) · (A₁/A₂)^{−s} ds`
/// on `−min(k₁, m₁) < Re s < 0`; the shadow-order ratios follow by
/// multiplicative recurrence in `b`.
fn pzero_shells(canon: &WiretapModel, mix: &Mixture) -> Result<(Vec<f64>, f64)> {
    let d = derived_params(canon);
    let (m1, k1, m2, k2) = (canon.link_b.m, canon.link_b.k, canon.link_e.m, canon.link_e.k);
    let ln_z = (d.a1 / d.a2).ln();
    let spec = MeijerSpec::new(2, 3, vec![1.0, 1.0 - m2, 1.0 - k2], vec![k1, m1, 0.0])?;
    let (c, dist) = line_offset(&spec, ln_z.exp())?;
    let (ni, nj) = (mix.n_i(), mix.n_j());
    let long = ni + nj - 1;
    let dim = mix.order();
    let norm = lgamma(m1) + lgamma(m2) + lgamma(k1) + lgamma(k2);
    let mut r1 = vec![Complex64::new(0.0, 0.0); ni];
    let mut r2 = vec![Complex64::new(0.0, 0.0); long];
    let res = line_integral_vec(
        |t, out| {
            let s = Complex64::new(c, t);
            let one = Complex64::new(1.0, 0.0);
            let l = ln_gamma_complex(s + m1) + ln_gamma_complex(-s + m2) + ln_gamma_complex(s + k1) + ln_gamma_complex(-s + k2)
                - norm
                - s * ln_z;
            let common = l.exp() * (-one / s);
            r1[0] = one;
            for i in 1..ni {
                let b = k1 + (i - 1) as f64;
                r1[i] = r1[i - 1] * (s + b) / b;
            }
            r2[0] = one;
            for n in 1..long {
                let b = k2 + (n - 1) as f64;
                r2[n] = r2[n - 1] * (-s + b) / b;
            }
            let mut env = 0.0;
            for i in 0..ni {
                let a = common * r1[i] * mix.p1[i];
                for j in 0..nj {
                    let v = a * r2[i + j] * mix.p2[j];
                    out[i.max(j)] += v.re;
                    env += v.norm();
                }
            }
            env
        },
        dim,
        0.5 * dist,
        LINE_REL_TOL,
    )?;
    Ok((res.values, res.error))
}

/// `P_o(0) = Pr[γ₂ > γ₁]` from the closed-form series
///
/// ```text
/// (1−ρ)^{k₂}/(Γ(m₁)Γ(m₂)) Σ_{i,j} (k₁)_i (k₂−k₁)_j ρ^{i+j} / (i! j! (i+k₂)_j Γ(i+k₁) Γ(i+k₂))
///     × G^{2,3}_{3,3}[m₁k₁γ̄₂/(m₂k₂γ̄₁) | 1, 1−m₂, 1−i−j−k₂; i+k₁, m₁, 0].
/// ```
///
/// Evaluated in canonical order; an exchange maps the value to its complement.
pub fn pzero(model: &WiretapModel, ctrl: &SeriesControl) -> Result<SecrecyResult> {
    model.validate()?;
    let (canon, swapped) = canonical_order(model);
    let mix = mixture_pool(&canon, ctrl)?;
    let (shells, err) = pzero_shells(&canon, &mix)?;
    let (order, series, tail) = match select_order(&shells, &mix, ctrl) {
        Ok(v) => v,
        Err(Error::TruncationCap { cap, tail, partial }) => {
            let partial = if swapped { 1.0 - partial } else { partial };
            return Err(Error::TruncationCap { cap, tail, partial });
        }
        Err(e) => return Err(e),
    };
    let raw = if swapped { 1.0 - series } else { series };
    Ok(SecrecyResult {
        value: clamp_probability(raw, "P_o(0)")?,
        terms_used: order,
        tail_estimate: tail,
        method: Method::SeriesClosed,
        swapped,
        quad_error: err,
    })
}

/// Probability of non-zero secrecy capacity, `Pr[γ₁ > γ₂] = 1 − P_o(0)`.
pub fn pnzsc(model: &WiretapModel, ctrl: &SeriesControl) -> Result<SecrecyResult> {
    let p = pzero(model, ctrl)?;
    Ok(SecrecyResult { value: 1.0 - p.value, ..p })
}

/// High-SNR power law for `P_o(0)` with `α₁ = min(k₁, m₁)`:
///
/// ```text
/// (1−ρ)^{k₂} Γ(|k₁−m₁|) Γ(k₂+α₁) Γ(m₂+α₁) / (α₁ Γ(m₁)Γ(m₂)Γ(k₁)Γ(k₂))
///     × (m₁k₁γ̄₂ / (m₂k₂γ̄₁))^{α₁}
/// ```
///
/// Undefined at `k₁ = m₁`, where the leading term carries a logarithm.
pub fn pzero_asymptotic(model: &WiretapModel) -> Result<f64> {
    model.validate()?;
    let (b, e) = (&model.link_b, &model.link_e);
    if b.k == b.m {
        return Err(Error::Unsupported("the high-SNR law is undefined for k₁ = m₁".into()));
    }
    let alpha = b.k.min(b.m);
    let ratio = b.m * b.k * e.snr_avg / (e.m * e.k * b.snr_avg);
    let l = e.k * (-model.rho).ln_1p() + lgamma((b.k - b.m).abs()) + lgamma(e.k + alpha) + lgamma(e.m + alpha)
        - alpha.ln()
        - lgamma(b.m)
        - lgamma(e.m)
        - lgamma(b.k)
        - lgamma(e.k)
        + alpha * ratio.ln();
    Ok(l.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::db_to_linear;
    use crate::specfun::meijer::meijer_g;

    fn link(m: f64, k: f64, g: f64) -> LinkParams {
        LinkParams::new(m, k, g).unwrap()
    }

    fn model(b: LinkParams, e: LinkParams, rho: f64) -> WiretapModel {
        WiretapModel::new(b, e, rho).unwrap()
    }

    fn ctrl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(outage_threshold(0.0, 0.0), 0.0);
        assert_eq!(outage_threshold(2.5, 0.0), 2.5);
        assert_eq!(outage_threshold(3.0, 1.0), 7.0);
    }

    #[test]
    fn clamping_policy() {
        assert_eq!(clamp_probability(-5e-10, "x").unwrap(), 0.0);
        assert_eq!(clamp_probability(1.0 + 5e-10, "x").unwrap(), 1.0);
        assert!(matches!(clamp_probability(-1e-6, "x"), Err(Error::Consistency(_))));
        assert!(matches!(clamp_probability(f64::NAN, "x"), Err(Error::Consistency(_))));
    }

    #[test]
    fn symmetric_model_is_one_half() {
        let g = db_to_linear(4.0);
        for &rho in &[0.0, 0.5, 0.9] {
            let m = model(link(2.0, 1.5, g), link(2.0, 1.5, g), rho);
            let p = pzero(&m, &ctrl()).unwrap();
            assert!((p.value - 0.5).abs() < 1e-9, "rho={rho}: {}", p.value);
            let s = sop(&m, 0.0, &ctrl()).unwrap();
            assert!((s.value - 0.5).abs() < 1e-9, "rho={rho}: {}", s.value);
            assert!((pnzsc(&m, &ctrl()).unwrap().value - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn large_rate_is_certain_outage() {
        let m = model(link(1.0, 1.0, 2.5), link(1.0, 1.0, 2.5), 0.5);
        assert!(sop(&m, 30.0, &ctrl()).unwrap().value >= 1.0 - 1e-6);
    }

    #[test]
    fn pzero_terms_match_meijer_definition() {
        // low-order terms of the closed-form series against direct G^{2,3}_{3,3}
        let m = model(link(1.5, 1.2, 3.0), link(2.5, 2.1, 1.0), 0.4);
        let d = derived_params(&m);
        let z = d.a1 / d.a2;
        let mix = mixture_by_mass(&m, 1e-12, 400).unwrap();
        let (shells, _) = pzero_shells(&m, &mix).unwrap();
        // shell 0 is the (0,0) term
        let spec = MeijerSpec::new(2, 3, vec![1.0, 1.0 - 2.5, 1.0 - 2.1], vec![1.2, 1.5, 0.0]).unwrap();
        let g = meijer_g(&spec, z).unwrap();
        let term = (1.0f64 - 0.4).powf(2.1) / (lgamma(1.5) + lgamma(2.5) + lgamma(1.2) + lgamma(2.1)).exp() * g;
        assert!((shells[0] - term).abs() < 1e-10, "{} vs {term}", shells[0]);
        // shell 1: terms (1,0), (0,1), (1,1)
        let term_ij = |i: usize, j: usize| {
            let b1 = 1.2 + i as f64;
            let b2 = 2.1 + (i + j) as f64;
            let spec = MeijerSpec::new(2, 3, vec![1.0, 1.0 - 2.5, 1.0 - b2], vec![b1, 1.5, 0.0]).unwrap();
            let g = meijer_g(&spec, z).unwrap();
            let (lp1, _) = ln_pochhammer(1.2, i);
            let (lp2, _) = ln_pochhammer(0.9, j);
            let (lp3, _) = ln_pochhammer(i as f64 + 2.1, j);
            let l = 2.1 * 0.6f64.ln() - lgamma(1.5) - lgamma(2.5) + lp1 + lp2 + ((i + j) as f64) * 0.4f64.ln()
                - lgamma(i as f64 + 1.0)
                - lgamma(j as f64 + 1.0)
                - lp3
                - lgamma(i as f64 + 1.2)
                - lgamma(i as f64 + 2.1);
            l.exp() * g
        };
        let s1 = term_ij(1, 0) + term_ij(0, 1) + term_ij(1, 1);
        assert!((shells[1] - s1).abs() < 1e-10, "{} vs {s1}", shells[1]);
    }

    #[test]
    fn series_routes_agree_with_oracle() {
        let cases = [
            (model(link(1.0, 1.0, db_to_linear(4.0)), link(1.0, 1.0, db_to_linear(4.0)), 0.5), 1.0),
            (model(link(2.0, 1.0, 2.5), link(3.5, 2.0, 1.0), 0.7), 0.5),
            (model(link(3.5, 4.0, 2.5), link(1.0, 1.0, 1.0), 0.5), 1.0),
        ];
        for (m, r) in &cases {
            let a = sop(m, *r, &ctrl()).unwrap();
            let o = sop_oracle(m, *r, 1e-7).unwrap();
            assert!((a.value - o.value).abs() < 1e-6, "{m:?} r={r}: {} vs {}", a.value, o.value);
            assert_eq!(a.swapped, m.link_b.k > m.link_e.k);
        }
    }

    #[test]
    fn zero_rate_routes_agree() {
        for &(rho, mm, k1, k2) in &[(0.0, 1.0, 1.0, 1.0), (0.5, 2.0, 1.0, 2.0), (0.9, 3.5, 2.0, 1.0)] {
            let m = model(link(mm, k1, db_to_linear(4.0)), link(mm, k2, 1.0), rho);
            let a = sop(&m, 0.0, &ctrl()).unwrap().value;
            let b = pzero(&m, &ctrl()).unwrap().value;
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn oracle_rayleigh_limit() {
        // k → ∞ removes shadowing: Pr[γ₂ > γ₁] = γ̄₂/(γ̄₁+γ̄₂) for exponential SNRs
        let m = model(link(1.0, 50.0, 10.0), link(1.0, 50.0, 1.0), 0.0);
        let o = sop_oracle(&m, 0.0, 1e-6).unwrap().value;
        assert!((o / (1.0 / 11.0) - 1.0).abs() < 0.02, "{o}");
        assert!((pnzsc(&m, &ctrl()).unwrap().value / (10.0 / 11.0) - 1.0).abs() < 0.02);
    }

    #[test]
    fn outage_grows_with_rate() {
        let m = model(link(2.0, 1.0, 2.0), link(2.0, 2.0, 1.5), 0.6);
        let mut prev = 0.0;
        for &r in &[0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0] {
            let v = sop(&m, r, &ctrl()).unwrap().value;
            assert!(v >= prev - 1e-12, "r={r}");
            prev = v;
        }
        let mut prev = 0.0;
        for &r in &[0.0, 0.5, 1.0, 2.0, 4.0] {
            let v = sop_oracle(&m, r, 1e-6).unwrap().value;
            assert!(v >= prev - 1e-6);
            prev = v;
        }
    }

    #[test]
    fn printed_formula_exchanges_link_roles() {
        // the published formula equals 1 − Pr[γ₂ > 2^r(1+γ₁) − 1]
        let m = model(link(1.0, 1.0, 2.0), link(2.0, 1.5, 1.2), 0.3);
        let r = 0.7;
        let printed = sop_printed(&m, r, &ctrl()).unwrap().value;
        let ex = m.exchanged();
        let reference = sop_oracle(&ex, r, 1e-8).unwrap().value;
        assert!((printed - reference).abs() < 1e-4, "{printed} vs {reference}");
        let proper = sop(&m, r, &ctrl()).unwrap().value;
        assert!((printed - proper).abs() > 1e-2);
    }

    #[test]
    fn fixed_rule_is_accurate_only_for_low_orders() {
        let easy = model(link(1.0, 1.0, 2.5), link(1.0, 1.0, 2.5), 0.2);
        let a = sop_steen15(&easy, 1.0, &ctrl()).unwrap().value;
        let b = sop(&easy, 1.0, &ctrl()).unwrap().value;
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        let hard = model(link(4.0, 4.0, 2.5), link(4.0, 4.0, 2.5), 0.9);
        let a = sop_steen15(&hard, 0.0, &ctrl()).unwrap().value;
        assert!((a - 0.5).abs() > 1e-2, "{a}");
    }

    #[test]
    fn asymptote_power_law_and_rejection() {
        let m = model(link(2.0, 1.0, 1e5), link(2.0, 1.0, 1.0), 0.5);
        let a = pzero_asymptotic(&m).unwrap();
        let m2 = model(link(2.0, 1.0, 2e5), link(2.0, 1.0, 1.0), 0.5);
        assert!((a / pzero_asymptotic(&m2).unwrap() - 2.0).abs() < 1e-12);
        let p = pzero(&m, &ctrl()).unwrap().value;
        assert!((p / a - 1.0).abs() < 0.05, "{p} vs {a}");
        let bad = model(link(2.0, 2.0, 10.0), link(1.0, 1.0, 1.0), 0.0);
        assert!(matches!(pzero_asymptotic(&bad), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pzero_decreases_with_legitimate_snr() {
        let mut prev = 1.0;
        for db in [0.0, 10.0, 20.0, 30.0, 40.0, 50.0] {
            let m = model(link(4.0, 2.0, db_to_linear(db)), link(4.0, 1.0, 1.0), 0.5);
            let v = pzero(&m, &ctrl()).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn truncation_report_behaviour() {
        let g = db_to_linear(4.0);
        let m0 = model(link(1.0, 1.0, g), link(1.0, 1.0, g), 0.0);
        assert_eq!(truncation_report(&m0, &ctrl()).unwrap().order, 1);
        let rel = SeriesControl { tail_tol: 1e-3, rule: TruncationRule::RelativeIncrement, ..ctrl() };
        assert_eq!(truncation_report(&m0, &rel).unwrap().order, 1);
        let mut prev = 0;
        for rho in [0.0, 0.2, 0.5, 0.7, 0.9] {
            let m = model(link(4.0, 1.0, g), link(4.0, 1.0, g), rho);
            let n = truncation_report(&m, &ctrl()).unwrap().order;
            assert!(n >= prev);
            prev = n;
        }
        let m = model(link(4.0, 1.0, g), link(4.0, 1.0, g), 0.9);
        let rep = truncation_report(&m, &rel).unwrap();
        assert!((10..=60).contains(&rep.order), "{}", rep.order);
    }

    #[test]
    fn truncation_cap_is_reported() {
        let m = model(link(1.0, 4.0, 2.0), link(1.0, 4.0, 2.0), 0.95);
        let c = SeriesControl { max_terms: 20, ..ctrl() };
        assert!(matches!(pzero(&m, &c), Err(Error::TruncationCap { .. })));
        assert!(matches!(sop(&m, 1.0, &c), Err(Error::TruncationCap { .. })));
    }

    #[test]
    fn guard_mode() {
        let m = model(link(2.0, 1.0, 2.0), link(2.0, 2.0, 1.0), 0.5);
        assert!(sop_guarded(&m, 1.0, &ctrl(), 1e-7, 1e-5).is_ok());
        assert!(matches!(sop_guarded(&m, 1.0, &ctrl(), 1e-7, 0.0), Err(Error::Consistency(_))));
    }

    #[test]
    fn invalid_inputs() {
        let m = model(link(1.0, 1.0, 2.0), link(1.0, 1.0, 2.0), 0.2);
        assert!(matches!(sop(&m, -1.0, &ctrl()), Err(Error::InvalidParameter(_))));
        assert!(matches!(sop_oracle(&m, 1.0, 0.0), Err(Error::InvalidParameter(_))));
    }
}
