//! Reference computations shared by the integration and acceptance tests.
#![allow(dead_code)]

use secrecy_core::channel::{gk_marginal_cdf, LinkParams, WiretapModel};
use secrecy_core::quad::{integrate, QuadOptions};
use secrecy_core::specfun::{ln_bessel_k_scaled, ln_gamma};

fn lgamma(x: f64) -> f64 {
    ln_gamma(x).unwrap().0
}

/// `x` with `F(x) = q` for the generalized-K marginal of `link`.
pub fn marginal_quantile(link: &LinkParams, q: f64) -> f64 {
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if gk_marginal_cdf(link, mid.exp()).unwrap() < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Equiprobable cut points `q = 1/cells, …, (cells−1)/cells` of a marginal.
pub fn equiprobable_cuts(link: &LinkParams, cells: usize) -> Vec<f64> {
    (1..cells).map(|c| marginal_quantile(link, c as f64 / cells as f64)).collect()
}

/// Per-interval integrals of `A^ξ x^{ξ−1} K_ψ(2√(A x))` divided by
/// `Γ(m)Γ(k+n)/2` (the full-line value), for `x` cut at `cuts`.
///
/// In `y = √(A x)` the integrand is `2 y^{2ξ−1} K_ψ(2y)`.
fn component_interval_masses(m: f64, b: f64, a: f64, cuts: &[f64]) -> Vec<f64> {
    let xi = 0.5 * (m + b);
    let psi = m - b;
    let norm = lgamma(m) + lgamma(b) - std::f64::consts::LN_2;
    let f = |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        let l = std::f64::consts::LN_2 + (2.0 * xi - 1.0) * y.ln() + ln_bessel_k_scaled(psi, 2.0 * y).unwrap() - 2.0 * y - norm;
        l.exp()
    };
    let y_top = xi + 30.0 * xi.sqrt() + 60.0;
    let mut edges = vec![0.0];
    edges.extend(cuts.iter().map(|&x| (a * x).sqrt().min(y_top)));
    edges.push(y_top);
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 4000 };
    edges.windows(2).map(|w| if w[1] > w[0] { integrate(&f, w[0], w[1], &opts).unwrap().value } else { 0.0 }).collect()
}

/// Cell probabilities of the joint SNR law over the grid `cuts_b × cuts_e`,
/// integrating the published double series for the joint density term by
/// term (the double integral of each term separates into two single ones).
///
/// Requires `k₁ ≤ k₂`.
pub fn joint_cell_masses(model: &WiretapModel, cuts_b: &[f64], cuts_e: &[f64]) -> Vec<Vec<f64>> {
    let (b, e, rho) = (&model.link_b, &model.link_e, model.rho);
    assert!(b.k <= e.k);
    let a1 = b.m * b.k / ((1.0 - rho) * b.snr_avg);
    let a2 = e.m * e.k / ((1.0 - rho) * e.snr_avg);
    let (m1, k1, m2, k2) = (b.m, b.k, e.m, e.k);
    let n = if rho == 0.0 { 1 } else { ((-32.0 - 3.0 * (k2 + 10.0).ln()) / rho.ln()).ceil() as usize + 1 };
    let nj = if k1 == k2 { 1 } else { n };
    let p1: Vec<Vec<f64>> = (0..n).map(|i| component_interval_masses(m1, k1 + i as f64, a1, cuts_b)).collect();
    let p2: Vec<Vec<f64>> = (0..n + nj).map(|l| component_interval_masses(m2, k2 + l as f64, a2, cuts_e)).collect();
    let mut cells = vec![vec![0.0; cuts_e.len() + 1]; cuts_b.len() + 1];
    let ln_pref = (4.0f64).ln() + k2 * (1.0 - rho).ln() - lgamma(m1) - lgamma(m2);
    for i in 0..n {
        for j in 0..nj {
            let fi = i as f64;
            let fj = j as f64;
            let poch = |x: f64, n: f64| lgamma(x + n) - lgamma(x);
            let lp2 = if j == 0 { 0.0 } else { poch(k2 - k1, fj) };
            let lrho = if i + j == 0 { 0.0 } else { (fi + fj) * rho.ln() };
            let lc = ln_pref + poch(k1, fi) + lp2 + lrho - lgamma(fi + 1.0) - lgamma(fj + 1.0) - poch(fi + k2, fj)
                - lgamma(fi + k1)
                - lgamma(fi + k2);
            // undo the per-component normalization Γ(m)Γ(b)/2 of each factor
            let lc = lc + lgamma(m1) + lgamma(k1 + fi) - std::f64::consts::LN_2 + lgamma(m2) + lgamma(k2 + fi + fj)
                - std::f64::consts::LN_2;
            let c = lc.exp();
            let (u, v) = (&p1[i], &p2[i + j]);
            for (row, pu) in cells.iter_mut().zip(u) {
                for (cell, pv) in row.iter_mut().zip(v) {
                    *cell += c * pu * pv;
                }
            }
        }
    }
    cells
}

/// Pearson statistic `Σ (O − E)²/E`.
pub fn chi_square(observed: &[Vec<u64>], probs: &[Vec<f64>], n: u64) -> f64 {
    observed
        .iter()
        .flatten()
        .zip(probs.iter().flatten())
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

/// Kolmogorov–Smirnov distance of a sample from a CDF.
pub fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Large-sample KS critical value at significance 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

/// Cell index of `x` among ascending `cuts`.
pub fn cell_of(cuts: &[f64], x: f64) -> usize {
    cuts.partition_point(|&c| c < x)
}
