//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 2000 }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        QuadOptions { abs_tol, rel_tol: 0.0, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// QUADPACK-style sharpening of the raw Gauss/Kronrod difference.
fn sharpen(raw: f64, h: f64, kron: f64) -> f64 {
    let err = if raw > 0.0 { raw * (200.0 * raw / (h.abs() * kron.abs().max(1e-300) + raw)).powf(1.5).min(1.0) } else { raw };
    err.max((kron * h).abs() * 50.0 * f64::EPSILON)
}

/// One 15-point Kronrod panel: `(integral, error estimate)`.
pub fn kronrod_panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, sharpen(((kron - gauss) * h).abs(), h, kron))
}

/// Vector-valued panel; the error estimate refers to the component sum.
fn kronrod_panel_vec(f: &mut impl FnMut(f64, &mut [f64]), dim: usize, a: f64, b: f64, buf: &mut [f64]) -> (Vec<f64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut add = |x: f64, wk: f64, wg: f64, buf: &mut [f64]| {
        buf.iter_mut().for_each(|v| *v = 0.0);
        f(x, buf);
        for d in 0..dim {
            kron[d] += wk * buf[d];
            gauss[d] += wg * buf[d];
        }
    };
    add(c, WGK[7], WG[3], buf);
    for i in 0..7 {
        let dx = h * XGK[i];
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        add(c - dx, WGK[i], wg, buf);
        add(c + dx, WGK[i], wg, buf);
    }
    let ks: f64 = kron.iter().sum();
    let gs: f64 = gauss.iter().sum();
    let raw = ((ks - gs) * h).abs();
    kron.iter_mut().for_each(|v| *v *= h);
    (kron, sharpen(raw, h, ks))
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`: the panel with the
/// largest error estimate is bisected until the summed estimate is within
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0 });
    }
    let (v, e) = kronrod_panel(&mut f, a, b);
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if !total.is_finite() {
            return Err(Error::Precision { what: "adaptive quadrature (non-finite integrand)".into(), estimate: total_err, partial: total });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Precision { what: "adaptive quadrature".into(), estimate: total_err, partial: total });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval exhausted at machine precision; accept it as is
            heap.push(Panel { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = kronrod_panel(&mut f, worst.a, mid);
        let (v2, e2) = kronrod_panel(&mut f, mid, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        if heap.len() % 64 == 0 {
            // refresh the running sums to shed accumulated rounding
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult { value, error, evals })
}

struct VecPanel {
    a: f64,
    b: f64,
    values: Vec<f64>,
    error: f64,
}

impl PartialEq for VecPanel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for VecPanel {}
impl PartialOrd for VecPanel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for VecPanel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Vector-valued result of [`integrate_vec`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadVecResult {
    pub values: Vec<f64>,
    /// Error estimate for the sum of the components.
    pub error: f64,
    pub evals: usize,
}

/// Adaptive integration of a vector-valued integrand sharing one panel
/// partition. `f(x, out)` adds its components into a zeroed `out`;
/// refinement is driven by the error in the sum of the components.
pub fn integrate_vec(mut f: impl FnMut(f64, &mut [f64]), dim: usize, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadVecResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b || dim == 0 {
        return Ok(QuadVecResult { values: vec![0.0; dim], error: 0.0, evals: 0 });
    }
    let mut buf = vec![0.0; dim];
    let (v, e) = kronrod_panel_vec(&mut f, dim, a, b, &mut buf);
    let mut evals = 15;
    let mut total: f64 = v.iter().sum();
    let mut total_err = e;
    let mut heap = BinaryHeap::new();
    heap.push(VecPanel { a, b, values: v, error: e });
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if !total.is_finite() {
            return Err(Error::Precision { what: "adaptive quadrature (non-finite integrand)".into(), estimate: total_err, partial: total });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Precision { what: "adaptive quadrature".into(), estimate: total_err, partial: total });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            total_err -= worst.error;
            heap.push(VecPanel { error: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = kronrod_panel_vec(&mut f, dim, worst.a, mid, &mut buf);
        let (v2, e2) = kronrod_panel_vec(&mut f, dim, mid, worst.b, &mut buf);
        evals += 30;
        total += v1.iter().sum::<f64>() + v2.iter().sum::<f64>() - worst.values.iter().sum::<f64>();
        total_err += e1 + e2 - worst.error;
        heap.push(VecPanel { a: worst.a, b: mid, values: v1, error: e1 });
        heap.push(VecPanel { a: mid, b: worst.b, values: v2, error: e2 });
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.values.iter().sum::<f64>()).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let mut values = vec![0.0; dim];
    let mut error = 0.0;
    for p in heap.iter() {
        for (acc, v) in values.iter_mut().zip(&p.values) {
            *acc += v;
        }
        error += p.error;
    }
    Ok(QuadVecResult { values, error, evals })
}
