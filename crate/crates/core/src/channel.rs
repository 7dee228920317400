//! The correlated composite Nakagami-m/Gamma wiretap channel.
//!
//! Each link SNR is `γ = γ̄·w²·b/(k θ Ω)` with Nakagami power `w²` of shape
//! `m` and Gamma shadow `b` of shape `k`; the two shadows are correlated
//! through `ρ`. The joint density is a double series which regroups as a
//! discrete mixture
//!
//! ```text
//! f(x₁, x₂) = Σ_{i,j} p(i,j) · f_GK(x₁; m₁, k₁+i, A₁) · f_GK(x₂; m₂, k₂+i+j, A₂)
//! p(i,j)    = NB(i; k₁, ρ) · NB(j; k₂−k₁, ρ)
//! ```
//!
//! of products of generalized-K densities, `f_GK(x; m, b, A)` being the
//! density of `G(m)·G(b)/A` for independent unit-scale Gamma variates. The
//! negative-binomial weights are non-negative and sum to one when
//! `k₁ ≤ k₂`, which [`canonical_order`] arranges by exchanging the links.
//!
//! The average SNR of the eavesdropper link is `γ̄₂ = p k₂ θ₂ Ω₂ / σ_E²`;
//! some statements of this model print `σ_B²` in that denominator, which is
//! a typo. Everything here works with user-supplied linear `γ̄` values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gamma::lgamma;
use crate::specfun::meijer::{meijer_g_contour_scaled, ContourOptions, MeijerSpec};
use crate::specfun::{ln_bessel_k_scaled, ln_bessel_k_scaled_ladder};

const LN_2: f64 = std::f64::consts::LN_2;

/// One composite link: Nakagami shape `m`, shadow shape `k`, linear average SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub m: f64,
    pub k: f64,
    pub snr_avg: f64,
}

impl LinkParams {
    pub fn new(m: f64, k: f64, snr_avg: f64) -> Result<Self> {
        let link = LinkParams { m, k, snr_avg };
        link.validate()?;
        Ok(link)
    }

    /// Link with the average SNR given in dB.
    pub fn from_db(m: f64, k: f64, snr_db: f64) -> Result<Self> {
        Self::new(m, k, db_to_linear(snr_db))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 0.5) || !self.m.is_finite() {
            return Err(Error::InvalidParameter(format!("Nakagami shape m must be ≥ 0.5, got {}", self.m)));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::InvalidParameter(format!("shadow shape k must be > 0, got {}", self.k)));
        }
        if !(self.snr_avg > 0.0) || !self.snr_avg.is_finite() {
            return Err(Error::InvalidParameter(format!("average SNR must be > 0, got {}", self.snr_avg)));
        }
        Ok(())
    }

    /// Rate `m k / γ̄` of the uncorrelated generalized-K marginal.
    pub fn rate(&self) -> f64 {
        self.m * self.k / self.snr_avg
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Legitimate link B, eavesdropper link E and the shadow correlation `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiretapModel {
    pub link_b: LinkParams,
    pub link_e: LinkParams,
    pub rho: f64,
}

impl WiretapModel {
    pub fn new(link_b: LinkParams, link_e: LinkParams, rho: f64) -> Result<Self> {
        let model = WiretapModel { link_b, link_e, rho };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.link_b.validate()?;
        self.link_e.validate()?;
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!("correlation ρ must lie in [0, 1), got {}", self.rho)));
        }
        Ok(())
    }

    /// The model with the roles of the two links exchanged.
    pub fn exchanged(&self) -> Self {
        WiretapModel { link_b: self.link_e, link_e: self.link_b, rho: self.rho }
    }
}

/// Returns the model with `k₁ ≤ k₂`, exchanging the links when needed, and
/// whether an exchange took place. Under an exchange `Pr[γ₂ > γ₁]` of the
/// returned model equals `Pr[γ₁ > γ₂]` of the original.
pub fn canonical_order(model: &WiretapModel) -> (WiretapModel, bool) {
    if model.link_b.k <= model.link_e.k {
        (*model, false)
    } else {
        (model.exchanged(), true)
    }
}

/// How the double series is cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruncationRule {
    /// Grow the square `[0, 𝒩)²` until the neglected mixture mass is below
    /// `tail_tol`. A rigorous bound for probabilities.
    TailMass,
    /// Grow the square until adding the next shell changes the computed
    /// quantity by less than `tail_tol` relative to its current value.
    RelativeIncrement,
}

/// Truncation policy for the double series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub tail_tol: f64,
    /// Cap on the number of terms per index.
    pub max_terms: usize,
    pub rule: TruncationRule,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { tail_tol: 1e-10, max_terms: 1000, rule: TruncationRule::TailMass }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tail tolerance must be > 0, got {}", self.tail_tol)));
        }
        if self.max_terms < 1 {
            return Err(Error::InvalidParameter("max_terms must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// The symbols of the joint density: `A_ℓ` and the per-term `ξ_ℓ`, `ψ_ℓ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub a1: f64,
    pub a2: f64,
    m1: f64,
    k1: f64,
    m2: f64,
    k2: f64,
}

impl DerivedParams {
    pub fn xi1(&self, i: usize) -> f64 {
        0.5 * (self.m1 + self.k1 + i as f64)
    }

    pub fn xi2(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.m2 + self.k2 + (i + j) as f64)
    }

    pub fn psi1(&self, i: usize) -> f64 {
        self.m1 - self.k1 - i as f64
    }

    pub fn psi2(&self, i: usize, j: usize) -> f64 {
        self.m2 - self.k2 - (i + j) as f64
    }
}

/// `A_ℓ = m_ℓ k_ℓ / ((1−ρ) γ̄_ℓ)` and the per-term accessors.
pub fn derived_params(model: &WiretapModel) -> DerivedParams {
    let (b, e) = (&model.link_b, &model.link_e);
    DerivedParams {
        a1: b.m * b.k / ((1.0 - model.rho) * b.snr_avg),
        a2: e.m * e.k / ((1.0 - model.rho) * e.snr_avg),
        m1: b.m,
        k1: b.k,
        m2: e.m,
        k2: e.k,
    }
}

/// Negative-binomial pmf `(1−ρ)^k (k)_i ρ^i / i!` for `i < len`, built in
/// log space. Shape zero gives the point mass at zero.
pub fn nb_pmf(shape: f64, rho: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    if shape == 0.0 || rho == 0.0 {
        out.push(1.0);
        out.resize(len, 0.0);
        return out;
    }
    let ln_rho = rho.ln();
    let mut lp = shape * (-rho).ln_1p();
    for i in 0..len {
        out.push(lp.exp());
        lp += ((shape + i as f64) / (i as f64 + 1.0)).ln() + ln_rho;
    }
    out
}

/// Truncated mixture weights for a canonical model.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    /// `NB(i; k₁, ρ)` for `i < n_i`.
    pub p1: Vec<f64>,
    /// `NB(j; k₂−k₁, ρ)` for `j < n_j`.
    pub p2: Vec<f64>,
    /// Neglected mass `1 − Σ_{i<n_i, j<n_j} p(i,j)`.
    pub deficit: f64,
    /// Set when `max_terms` stopped the growth before `tail_tol` was met.
    pub capped: bool,
}

impl Mixture {
    /// Square truncation order `𝒩` (terms per index).
    pub fn order(&self) -> usize {
        self.p1.len().max(self.p2.len())
    }

    pub fn n_i(&self) -> usize {
        self.p1.len()
    }

    pub fn n_j(&self) -> usize {
        self.p2.len()
    }

    /// Truncation to the first `n` terms per index.
    pub fn restricted(&self, n: usize) -> Mixture {
        let p1: Vec<f64> = self.p1.iter().take(n.max(1)).copied().collect();
        let p2: Vec<f64> = self.p2.iter().take(n.max(1)).copied().collect();
        let deficit = mass_deficit(&p1, &p2);
        Mixture { p1, p2, deficit, capped: false }
    }
}

fn mass_deficit(p1: &[f64], p2: &[f64]) -> f64 {
    let t1 = (1.0 - p1.iter().sum::<f64>()).max(0.0);
    let t2 = (1.0 - p2.iter().sum::<f64>()).max(0.0);
    (t1 + t2 - t1 * t2).max(0.0)
}

/// Square truncation by neglected mixture mass: the smallest `𝒩` with
/// `1 − Σ_{i,j<𝒩} p(i,j) < tail_tol`, capped at `max_terms`. When
/// `k₁ = k₂` the `j`-series is the point mass at zero and keeps one term.
pub fn mixture_by_mass(model: &WiretapModel, tail_tol: f64, max_terms: usize) -> Result<Mixture> {
    let (k1, k2) = (model.link_b.k, model.link_e.k);
    if k1 > k2 {
        return Err(Error::InvalidParameter("mixture weights need k₁ ≤ k₂; apply canonical_order first".into()));
    }
    let shape2 = k2 - k1;
    let cap = max_terms.max(1);
    let full1 = nb_pmf(k1, model.rho, cap);
    let full2 = nb_pmf(shape2, model.rho, cap);
    let j_trivial = shape2 == 0.0 || model.rho == 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for n in 1..=cap {
        s1 += full1[n - 1];
        s2 += full2[n - 1];
        let t1 = (1.0 - s1).max(0.0);
        let t2 = if j_trivial { 0.0 } else { (1.0 - s2).max(0.0) };
        let deficit = t1 + t2 - t1 * t2;
        if deficit < tail_tol || n == cap {
            let n_j = if j_trivial { 1 } else { n };
            return Ok(Mixture {
                p1: full1[..n].to_vec(),
                p2: full2[..n_j].to_vec(),
                deficit,
                capped: deficit >= tail_tol,
            });
        }
    }
    unreachable!("loop returns at n == cap")
}

// ---------------------------------------------------------------------------
// Generalized-K building blocks

/// `ln f_GK(x; m, b, A)`, the log density of `G(m)·G(b)/A`.
pub fn gk_ln_pdf(m: f64, b: f64, a: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("generalized-K density needs x > 0, got {x}")));
    }
    let y = 2.0 * (a * x).sqrt();
    let lk = ln_bessel_k_scaled(m - b, y)?;
    Ok(LN_2 + 0.5 * (m + b) * a.ln() + (0.5 * (m + b) - 1.0) * x.ln() + lk - y - lgamma(m) - lgamma(b))
}

pub fn gk_pdf(m: f64, b: f64, a: f64, x: f64) -> Result<f64> {
    Ok(gk_ln_pdf(m, b, a, x)?.exp())
}

/// `ln f_GK(x; m, b₀+n, A)` for `n < count`.
pub fn gk_ln_pdf_ladder(m: f64, b0: f64, a: f64, x: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("generalized-K density needs x > 0, got {x}")));
    }
    let y = 2.0 * (a * x).sqrt();
    // orders m − b₀ − n run downward; build them upward and reverse
    let mut lk = ln_bessel_k_scaled_ladder(m - b0 - (count - 1) as f64, y, count)?;
    lk.reverse();
    let (ln_a, ln_x) = (a.ln(), x.ln());
    let lg_m = lgamma(m);
    let mut lg_b = lgamma(b0);
    let mut out = Vec::with_capacity(count);
    for (n, l) in lk.into_iter().enumerate() {
        let b = b0 + n as f64;
        out.push(LN_2 + 0.5 * (m + b) * ln_a + (0.5 * (m + b) - 1.0) * ln_x + l - y - lg_m - lg_b);
        lg_b += b.ln();
    }
    Ok(out)
}

/// `(Pr[G(m)G(b) ≤ z], Pr[G(m)G(b) > z])`, each computed directly on its
/// own side of the mean so neither suffers cancellation.
pub fn gk_cdf_pair(m: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    if !(m > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!("generalized-K shapes must be positive, got m={m}, b={b}")));
    }
    if z <= 0.0 {
        return Ok((0.0, 1.0));
    }
    if z == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    let norm = lgamma(m) + lgamma(b);
    let opts = ContourOptions::default();
    if z < m * b {
        let spec = MeijerSpec::new(2, 1, vec![1.0], vec![b, m, 0.0])?;
        let (v, s) = meijer_g_contour_scaled(&spec, z, &opts)?;
        let cdf = (v * (s - norm).exp()).clamp(0.0, 1.0);
        Ok((cdf, 1.0 - cdf))
    } else {
        // far tail: the survival is about √z times the density, far below f64
        let y = 2.0 * z.sqrt();
        let ln_pdf = LN_2 + (0.5 * (m + b) - 1.0) * z.ln() + ln_bessel_k_scaled(b - m, y)? - y - norm;
        if z > 1.0 && ln_pdf + z.ln() < -760.0 {
            return Ok((1.0, 0.0));
        }
        let spec = MeijerSpec::new(3, 0, vec![1.0], vec![0.0, b, m])?;
        let (v, s) = meijer_g_contour_scaled(&spec, z, &opts)?;
        let ccdf = (v * (s - norm).exp()).clamp(0.0, 1.0);
        Ok((1.0 - ccdf, ccdf))
    }
}

/// `Pr[G(m)G(b₀+n) > z]` for `n < count`, from one Meijer evaluation and the
/// contiguous relation
/// `C_{b+1}(z) − C_b(z) = 2 z^{(m+b)/2} K_{b−m}(2√z) / (Γ(m) Γ(b+1))`.
pub fn gk_ccdf_ladder(m: f64, b0: f64, z: f64, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    let (cdf0, ccdf0) = gk_cdf_pair(m, b0, z)?;
    if z <= 0.0 {
        out.resize(count, 1.0);
        return Ok(out);
    }
    let y = 2.0 * z.sqrt();
    let lk = if count > 1 { ln_bessel_k_scaled_ladder(b0 - m, y, count - 1)? } else { Vec::new() };
    let ln_z = z.ln();
    let lg_m = lgamma(m);
    let mut lg_b1 = lgamma(b0 + 1.0);
    // carry whichever side is small to keep relative accuracy in the tails
    let use_cdf = cdf0 < ccdf0;
    let mut c = if use_cdf { cdf0 } else { ccdf0 };
    out.push(ccdf0);
    for (n, l) in lk.into_iter().enumerate() {
        let b = b0 + n as f64;
        let step = (LN_2 + 0.5 * (m + b) * ln_z + l - y - lg_m - lg_b1).exp();
        lg_b1 += (b + 1.0).ln();
        if use_cdf {
            c = (c - step).max(0.0);
            out.push(1.0 - c);
        } else {
            c = (c + step).min(1.0);
            out.push(c);
        }
    }
    Ok(out)
}

/// Density of the uncorrelated generalized-K SNR of one link.
pub fn gk_marginal_pdf(link: &LinkParams, x: f64) -> Result<f64> {
    gk_pdf(link.m, link.k, link.rate(), x)
}

/// CDF of the generalized-K SNR of one link; this is also the exact marginal
/// of each SNR under any correlation.
pub fn gk_marginal_cdf(link: &LinkParams, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(gk_cdf_pair(link.m, link.k, link.rate() * x)?.0)
}

/// A series value with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Terms per index `𝒩`.
    pub terms_used: usize,
    /// Neglected mixture mass.
    pub tail_estimate: f64,
}

/// Mixture truncation for the canonical model under `ctrl`'s mass rule,
/// turning a cap hit into an error carrying the partial sum.
fn density_mixture(model: &WiretapModel, ctrl: &SeriesControl) -> Result<Mixture> {
    ctrl.validate()?;
    mixture_by_mass(model, ctrl.tail_tol, ctrl.max_terms)
}

/// `Σ_{i,j} p(i,j) f₁ᵢ(x₁) f₂_{i+j}(x₂)` over the given truncation.
fn mixture_density(model: &WiretapModel, mix: &Mixture, x1: f64, x2: f64) -> Result<f64> {
    let d = derived_params(model);
    let (b, e) = (&model.link_b, &model.link_e);
    let (ni, nj) = (mix.n_i(), mix.n_j());
    let f1 = gk_ln_pdf_ladder(b.m, b.k, d.a1, x1, ni)?;
    let f2 = gk_ln_pdf_ladder(e.m, e.k, d.a2, x2, ni + nj - 1)?;
    let f2: Vec<f64> = f2.into_iter().map(f64::exp).collect();
    let mut total = 0.0;
    for i in 0..ni {
        let inner: f64 = (0..nj).map(|j| mix.p2[j] * f2[i + j]).sum();
        total += mix.p1[i] * f1[i].exp() * inner;
    }
    Ok(total)
}

/// The joint density of `(γ₁, γ₂)` at a point, truncated by neglected
/// mixture mass (the relative-increment rule is applied to the density
/// itself when selected).
pub fn joint_snr_pdf(model: &WiretapModel, x1: f64, x2: f64, ctrl: &SeriesControl) -> Result<SeriesValue> {
    model.validate()?;
    if !(x1 > 0.0 && x2 > 0.0) {
        return Err(Error::Domain(format!("joint density needs x1, x2 > 0, got ({x1}, {x2})")));
    }
    let (canon, swapped) = canonical_order(model);
    let (x1, x2) = if swapped { (x2, x1) } else { (x1, x2) };
    let mix = density_mixture(&canon, ctrl)?;
    let mix = match ctrl.rule {
        TruncationRule::TailMass => mix,
        TruncationRule::RelativeIncrement => {
            let mut prev = mixture_density(&canon, &mix.restricted(1), x1, x2)?;
            let mut chosen = mix.order();
            for n in 2..=mix.order() {
                let cur = mixture_density(&canon, &mix.restricted(n), x1, x2)?;
                if (cur - prev).abs() < ctrl.tail_tol * cur.abs() {
                    chosen = n;
                    break;
                }
                prev = cur;
            }
            mix.restricted(chosen)
        }
    };
    let value = mixture_density(&canon, &mix, x1, x2)?;
    if mix.capped {
        return Err(Error::TruncationCap { cap: ctrl.max_terms, tail: mix.deficit, partial: value });
    }
    Ok(SeriesValue { value, terms_used: mix.order(), tail_estimate: mix.deficit })
}

/// The high-SNR product approximation of the joint density, as printed:
/// `4(1−ρ)^{k₂} ∏ A_ℓ^{ξ̃_ℓ} x_ℓ^{ξ̃_ℓ−1} K_{ψ̃_ℓ}(2√(A_ℓ x_ℓ)) / (Γ(k_ℓ)Γ(m_ℓ))`
/// with `ξ̃ = (m+k)/2`, `ψ̃ = m−k`. It integrates to `(1−ρ)^{k₂}`, not one.
pub fn joint_snr_pdf_asymptotic(model: &WiretapModel, x1: f64, x2: f64) -> Result<f64> {
    model.validate()?;
    let d = derived_params(model);
    let (b, e) = (&model.link_b, &model.link_e);
    let l1 = gk_ln_pdf(b.m, b.k, d.a1, x1)?;
    let l2 = gk_ln_pdf(e.m, e.k, d.a2, x2)?;
    Ok((e.k * (-model.rho).ln_1p() + l1 + l2).exp())
}
