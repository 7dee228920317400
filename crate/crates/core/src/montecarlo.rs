//! Exact Monte Carlo sampling of the correlated SNR pair and estimators of
//! the secrecy outage probability.
//!
//! Draws follow the negative-binomial mixture: `i ~ NB(k₁, ρ)`,
//! `j ~ NB(k₂−k₁, ρ)`, then `γ₁ = G(m₁)G(k₁+i)/A₁` and
//! `γ₂ = G(m₂)G(k₂+i+j)/A₂` with independent unit-scale Gamma variates. The
//! negative-binomial index itself is a Gamma–Poisson mixture.
//!
//! Random numbers come from PCG-64 (128-bit LCG state, XSL-RR output,
//! period 2¹²⁸). A [`RngSpec`] keys one generator: the seed fixes the
//! starting state and the stream selects one of 2¹²⁷ independent increments,
//! so parallel shards use streams `0..W` of one seed.

use rand_distr::{Distribution, Gamma, Poisson};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{canonical_order, derived_params, WiretapModel};
use crate::error::{Error, Result};
use crate::secrecy::outage_threshold;

/// Mixes the user seed into the 128-bit LCG state.
const SEED_MIX: u128 = 0x2360_ed05_1fc6_5da4_4385_df64_9fcc_f645;

/// Seed and substream of one generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> Pcg64 {
        Pcg64::new(SEED_MIX ^ u128::from(self.seed), u128::from(self.stream))
    }
}

/// A Monte Carlo estimate with its standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
    /// Seed and first stream used.
    pub rng: RngSpec,
    /// Number of consecutive streams pooled, starting at `rng.stream`.
    pub streams: u64,
}

impl McEstimate {
    fn from_count(hits: u64, n: u64, rng: RngSpec, streams: u64) -> Self {
        let mean = hits as f64 / n as f64;
        McEstimate { mean, std_err: (mean * (1.0 - mean) / n as f64).sqrt(), n, rng, streams }
    }

    /// `|mean − value| ≤ z·std_err`, with a floor of one count when the
    /// estimate is degenerate.
    pub fn covers(&self, value: f64, z: f64) -> bool {
        let floor = 1.0 / self.n as f64;
        (self.mean - value).abs() <= (z * self.std_err).max(floor)
    }
}

fn gamma_unit(shape: f64, rng: &mut Pcg64) -> f64 {
    // shape and scale are validated upstream
    Gamma::new(shape, 1.0).expect("positive gamma shape").sample(rng)
}

/// Draws from the negative-binomial law `(1−ρ)^k (k)_i ρ^i / i!` through
/// `λ ~ Gamma(k, ρ/(1−ρ))`, `i ~ Poisson(λ)`.
pub fn sample_mixture_index(k_shape: f64, rho: f64, rng: &mut Pcg64) -> u64 {
    if k_shape <= 0.0 || rho <= 0.0 {
        return 0;
    }
    let lambda = gamma_unit(k_shape, rng) * rho / (1.0 - rho);
    if !(lambda > 0.0) {
        return 0;
    }
    let lambda = lambda.min(Poisson::<f64>::MAX_LAMBDA);
    Poisson::new(lambda).expect("finite positive mean").sample(rng) as u64
}

/// Prepared sampler for one model.
#[derive(Debug, Clone)]
pub struct PairSampler {
    m1: f64,
    m2: f64,
    k1: f64,
    k2: f64,
    rho: f64,
    a1: f64,
    a2: f64,
    swapped: bool,
    fade1: Gamma<f64>,
    fade2: Gamma<f64>,
}

/// One draw with its shadow components `S = (1−ρ)·G(k+index)`, in the
/// model's own link order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDraw {
    pub snr_b: f64,
    pub snr_e: f64,
    pub shadow_b: f64,
    pub shadow_e: f64,
}

impl PairSampler {
    pub fn new(model: &WiretapModel) -> Result<Self> {
        model.validate()?;
        let (canon, swapped) = canonical_order(model);
        let d = derived_params(&canon);
        let (m1, m2) = (canon.link_b.m, canon.link_e.m);
        let bad = |e: rand_distr::GammaError| Error::InvalidParameter(format!("gamma sampler: {e}"));
        Ok(PairSampler {
            m1,
            m2,
            k1: canon.link_b.k,
            k2: canon.link_e.k,
            rho: canon.rho,
            a1: d.a1,
            a2: d.a2,
            swapped,
            fade1: Gamma::new(m1, 1.0).map_err(bad)?,
            fade2: Gamma::new(m2, 1.0).map_err(bad)?,
        })
    }

    pub fn draw(&self, rng: &mut Pcg64) -> PairDraw {
        let i = sample_mixture_index(self.k1, self.rho, rng) as f64;
        let j = sample_mixture_index(self.k2 - self.k1, self.rho, rng) as f64;
        let s1 = gamma_unit(self.k1 + i, rng);
        let s2 = gamma_unit(self.k2 + i + j, rng);
        let g1 = self.fade1.sample(rng) * s1 / self.a1;
        let g2 = self.fade2.sample(rng) * s2 / self.a2;
        let (s1, s2) = ((1.0 - self.rho) * s1, (1.0 - self.rho) * s2);
        if self.swapped {
            PairDraw { snr_b: g2, snr_e: g1, shadow_b: s2, shadow_e: s1 }
        } else {
            PairDraw { snr_b: g1, snr_e: g2, shadow_b: s1, shadow_e: s2 }
        }
    }

    /// Fading shapes of the canonical ordering, `(m₁, m₂)`.
    pub fn fading_shapes(&self) -> (f64, f64) {
        (self.m1, self.m2)
    }
}

/// One `(γ_B, γ_E)` pair from the joint law.
pub fn sample_snr_pair(model: &WiretapModel, rng: &mut Pcg64) -> Result<(f64, f64)> {
    let d = PairSampler::new(model)?.draw(rng);
    Ok((d.snr_b, d.snr_e))
}

fn check_count(n: u64, min: u64) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!("sample count must be ≥ {min}, got {n}")));
    }
    Ok(())
}

fn outage_hits(sampler: &PairSampler, r: f64, n: u64, rng: &mut Pcg64) -> u64 {
    let mut hits = 0;
    for _ in 0..n {
        let d = sampler.draw(rng);
        if d.snr_b <= outage_threshold(d.snr_e, r) {
            hits += 1;
        }
    }
    hits
}

/// Fraction of `n` pairs in outage, `γ_B ≤ h(γ_E, r)`, from one stream.
pub fn estimate_sop(model: &WiretapModel, r: f64, n: u64, spec: &RngSpec) -> Result<McEstimate> {
    estimate_sop_sharded(model, r, n, spec, 1)
}

/// As [`estimate_sop`], split over `streams` consecutive substreams
/// evaluated in parallel. Shard `w` draws `⌊n/W⌋` pairs, plus one if
/// `w < n mod W`; the result depends on `(seed, stream, W, n)` only.
pub fn estimate_sop_sharded(model: &WiretapModel, r: f64, n: u64, spec: &RngSpec, streams: u64) -> Result<McEstimate> {
    check_count(n, 1)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("secrecy rate must be finite and ≥ 0, got {r}")));
    }
    if streams == 0 {
        return Err(Error::InvalidParameter("at least one stream is required".into()));
    }
    let sampler = PairSampler::new(model)?;
    let hits: u64 = (0..streams)
        .into_par_iter()
        .map(|w| {
            let count = n / streams + u64::from(w < n % streams);
            let mut rng = RngSpec::new(spec.seed, spec.stream + w).rng();
            outage_hits(&sampler, r, count, &mut rng)
        })
        .sum();
    Ok(McEstimate::from_count(hits, n, *spec, streams))
}

/// Pearson correlation of the shadow powers `(S_B, S_E)` over `n` draws.
///
/// Under the mixture construction its expectation is `ρ·√(k₁/k₂)` for
/// `k₁ ≤ k₂`. The standard error is the normal-theory `(1−r²)/√(n−3)`.
pub fn estimate_shadow_correlation(model: &WiretapModel, n: u64, spec: &RngSpec) -> Result<McEstimate> {
    check_count(n, 4)?;
    let sampler = PairSampler::new(model)?;
    let mut rng = spec.rng();
    let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in 1..=n {
        let d = sampler.draw(&mut rng);
        let (x, y) = (d.shadow_b, d.shadow_e);
        let dx = x - mx;
        mx += dx / t as f64;
        let dy = y - my;
        my += dy / t as f64;
        sxx += dx * (x - mx);
        syy += dy * (y - my);
        sxy += dx * (y - my);
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(McEstimate { mean: r, std_err: (1.0 - r * r) / ((n - 3) as f64).sqrt(), n, rng: *spec, streams: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkParams;
    use rand::Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn model(m1: f64, k1: f64, g1: f64, m2: f64, k2: f64, g2: f64, rho: f64) -> WiretapModel {
        WiretapModel::new(LinkParams::new(m1, k1, g1).unwrap(), LinkParams::new(m2, k2, g2).unwrap(), rho).unwrap()
    }

    #[test]
    fn degenerate_indices() {
        let mut rng = RngSpec::new(1, 0).rng();
        assert!((0..1000).all(|_| sample_mixture_index(3.0, 0.0, &mut rng) == 0));
        assert!((0..1000).all(|_| sample_mixture_index(0.0, 0.7, &mut rng) == 0));
    }

    #[test]
    fn negative_binomial_histogram() {
        // pmf (1−ρ)^k (k)_i ρ^i / i! with k = 2, ρ = 0.5
        let (k, rho, n) = (2.0, 0.5, 1_000_000u64);
        let mut rng = RngSpec::new(7, 3).rng();
        let mut counts = vec![0u64; 16];
        let mut sum = 0.0;
        for _ in 0..n {
            let i = sample_mixture_index(k, rho, &mut rng);
            sum += i as f64;
            counts[(i as usize).min(15)] += 1;
        }
        let mean = sum / n as f64;
        // variance kρ/(1−ρ)² = 4
        assert!((mean - 2.0).abs() < 3.0 * (4.0 / n as f64).sqrt(), "{mean}");
        let mut pmf = vec![0.0; 16];
        let mut p = (1.0f64 - rho).powf(k);
        for (i, slot) in pmf.iter_mut().enumerate().take(15) {
            *slot = p;
            p *= (k + i as f64) * rho / (i as f64 + 1.0);
        }
        pmf[15] = 1.0 - pmf[..15].iter().sum::<f64>();
        let chi2: f64 = counts.iter().zip(&pmf).map(|(&c, &q)| (c as f64 - n as f64 * q).powi(2) / (n as f64 * q)).sum();
        let crit = ChiSquared::new(15.0).unwrap().inverse_cdf(0.99);
        assert!(chi2 < crit, "{chi2} ≥ {crit}");
    }

    #[test]
    fn identical_specs_reproduce() {
        let m = model(2.0, 1.0, 3.0, 1.5, 2.0, 1.0, 0.6);
        let a = estimate_sop(&m, 0.5, 20_000, &RngSpec::new(42, 0)).unwrap();
        let b = estimate_sop(&m, 0.5, 20_000, &RngSpec::new(42, 0)).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        let c = estimate_sop_sharded(&m, 0.5, 20_001, &RngSpec::new(42, 0), 4).unwrap();
        let d = estimate_sop_sharded(&m, 0.5, 20_001, &RngSpec::new(42, 0), 4).unwrap();
        assert_eq!(c, d);
        assert!(c.covers(a.mean, 3.0 * std::f64::consts::SQRT_2));
    }

    #[test]
    fn streams_differ() {
        let mut a = RngSpec::new(5, 0).rng();
        let mut b = RngSpec::new(5, 1).rng();
        let xa: Vec<u64> = (0..8).map(|_| a.random()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.random()).collect();
        assert_ne!(xa, xb);
    }

    #[test]
    fn mean_snr_is_preserved() {
        let m = model(1.5, 1.0, 4.0, 2.0, 3.0, 0.5, 0.8);
        let sampler = PairSampler::new(&m).unwrap();
        let mut rng = RngSpec::new(11, 0).rng();
        let n = 400_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let d = sampler.draw(&mut rng);
            s1 += d.snr_b;
            s2 += d.snr_e;
        }
        // relative spread of a GK variate: √((1+1/m)(1+1/k) − 1)
        let cv1 = ((1.0 + 1.0 / 1.5) * 2.0 - 1.0f64).sqrt();
        let cv2 = ((1.5f64) * (1.0 + 1.0 / 3.0) - 1.0).sqrt();
        assert!((s1 / n as f64 / 4.0 - 1.0).abs() < 3.0 * cv1 / (n as f64).sqrt());
        assert!((s2 / n as f64 / 0.5 - 1.0).abs() < 3.0 * cv2 / (n as f64).sqrt());
    }

    #[test]
    fn swapped_models_keep_link_roles() {
        // exchanging the links exchanges the pair
        let m = model(2.0, 3.0, 10.0, 1.0, 1.0, 1.0, 0.5);
        let sampler = PairSampler::new(&m).unwrap();
        let mut rng = RngSpec::new(3, 0).rng();
        let n = 200_000;
        let s1: f64 = (0..n).map(|_| sampler.draw(&mut rng).snr_b).sum::<f64>() / n as f64;
        assert!((s1 / 10.0 - 1.0).abs() < 0.02, "{s1}");
        assert_eq!(sampler.fading_shapes(), (1.0, 2.0));
    }

    #[test]
    fn shadow_correlation_matches_construction() {
        let spec = RngSpec::new(9, 0);
        let c = estimate_shadow_correlation(&model(1.0, 2.0, 1.0, 1.0, 2.0, 1.0, 0.7), 200_000, &spec).unwrap();
        assert!((c.mean - 0.7).abs() < 0.01, "{}", c.mean);
        let c = estimate_shadow_correlation(&model(1.0, 1.0, 1.0, 1.0, 4.0, 1.0, 0.8), 200_000, &spec).unwrap();
        assert!((c.mean - 0.4).abs() < 0.01, "{}", c.mean);
        let c = estimate_shadow_correlation(&model(1.0, 1.0, 1.0, 1.0, 4.0, 1.0, 0.0), 200_000, &spec).unwrap();
        assert!(c.mean.abs() < 3.0 * c.std_err);
    }

    #[test]
    fn outage_limits() {
        let m = model(1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 0.5);
        let e = estimate_sop(&m, 0.0, 100_000, &RngSpec::new(1, 0)).unwrap();
        assert!(e.covers(0.5, 3.0));
        assert_eq!(estimate_sop(&m, 30.0, 10_000, &RngSpec::new(1, 0)).unwrap().mean, 1.0);
        assert!(estimate_sop(&m, 0.0, 0, &RngSpec::new(1, 0)).is_err());
        assert!(estimate_sop_sharded(&m, 0.0, 10, &RngSpec::new(1, 0), 0).is_err());
    }
}
