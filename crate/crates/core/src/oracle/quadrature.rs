//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature.
//!
//! Semi-infinite and infinite ranges are mapped to finite ones with
//! `x = t/(1 − t)` on `t ∈ (0, 1)` and `x = t/(1 − t²)` on `t ∈ (−1, 1)`.
//! Kronrod nodes never touch the endpoints, so integrable endpoint
//! singularities introduced by the maps are never evaluated.

// Coefficients are kept as published.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the number of subintervals.
    pub max_intervals: usize,
    /// Uniform segments the (mapped) range is split into before adapting.
    pub initial_segments: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 20_000,
            initial_segments: 16,
        }
    }
}

impl QuadratureOptions {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    id: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn kronrod21(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        let bad = (0..10)
            .flat_map(|j| {
                [
                    (center - half * XGK[j], fv1[j]),
                    (center + half * XGK[j], fv2[j]),
                ]
            })
            .chain(std::iter::once((center, fc)))
            .find(|(_, v)| !v.is_finite())
            .map(|(x, _)| x)
            .unwrap_or(center);
        return Err(Error::NonConvergence(format!(
            "non-finite integrand value near {bad}"
        )));
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((res_k * half, err))
}

/// Adaptive integration of `f` over the finite segments delimited by `edges`
/// (strictly increasing).
fn adapt(
    f: &impl Fn(f64) -> f64,
    edges: &[f64],
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    let mut next_id = 0usize;
    let mut value = 0.0;
    let mut error = 0.0;
    // Segments too short to split further; kept out of the heap.
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    for w in edges.windows(2) {
        let (v, e) = kronrod21(f, w[0], w[1])?;
        evaluations += 21;
        value += v;
        error += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            id: next_id,
        });
        next_id += 1;
    }
    loop {
        let total_value = value + frozen_value;
        let total_error = error + frozen_error;
        if total_error <= opts.abs_tol.max(opts.rel_tol * total_value.abs()) {
            // Re-sum the segment values in a fixed order to limit drift from
            // the running updates.
            let mut segs: Vec<Segment> = heap.into_vec();
            segs.sort_by_key(|s| s.id);
            let value = segs.iter().map(|s| s.value).sum::<f64>() + frozen_value;
            return Ok(QuadratureResult {
                value,
                error_estimate: total_error,
                evaluations,
            });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => {
                return Err(Error::NonConvergence(format!(
                    "error estimate {total_error:.3e} above tolerance and no segment left to refine"
                )))
            }
        };
        if heap.len() + 2 > opts.max_intervals {
            return Err(Error::NonConvergence(format!(
                "{} subintervals exhausted; worst segment [{}, {}] has error {:.3e} (total {:.3e})",
                opts.max_intervals, worst.a, worst.b, worst.error, total_error
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 4.0 * f64::EPSILON * mid.abs()
        {
            value -= worst.value;
            error -= worst.error;
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let (v1, e1) = kronrod21(f, worst.a, mid)?;
        let (v2, e2) = kronrod21(f, mid, worst.b)?;
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            id: next_id,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            id: next_id + 1,
        });
        next_id += 2;
        // Guard against the running error sum drifting negative through
        // cancellation.
        if error < 0.0 {
            error = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Uniform edges on `[lo, hi]` plus, for every break `b`, `b` itself and a
/// geometric cluster of edges closing in on it from both sides. A feature far
/// narrower than the uniform segments then always sits next to a segment
/// short enough for its nodes to resolve it.
fn edges_with_breaks(
    lo: f64,
    hi: f64,
    segments: usize,
    breaks: impl Iterator<Item = f64>,
) -> Vec<f64> {
    const CLUSTER_LEVELS: i32 = 5;
    const CLUSTER_RATIO: f64 = 8.0;
    let segments = segments.max(1);
    let uniform: Vec<f64> = (0..=segments)
        .map(|i| lo + (hi - lo) * i as f64 / segments as f64)
        .collect();
    let mut centres: Vec<f64> = breaks.filter(|t| *t > lo && *t < hi).collect();
    centres.sort_by(f64::total_cmp);
    centres.dedup();
    let mut anchors: Vec<f64> = uniform
        .iter()
        .copied()
        .chain(centres.iter().copied())
        .collect();
    anchors.sort_by(f64::total_cmp);
    anchors.dedup();
    let mut edges = uniform;
    for &b in &centres {
        let i = anchors.partition_point(|a| *a < b);
        let left = if i > 0 { b - anchors[i - 1] } else { b - lo };
        let right = if i + 1 < anchors.len() {
            anchors[i + 1] - b
        } else {
            hi - b
        };
        let eps = 0.5 * left.min(right);
        edges.push(b);
        for k in 0..CLUSTER_LEVELS {
            let d = eps * CLUSTER_RATIO.powi(-k);
            if d <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
                break;
            }
            edges.push(b - d);
            edges.push(b + d);
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0));
    edges
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration limits must be finite"));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let edges = edges_with_breaks(lo, hi, opts.initial_segments, std::iter::empty());
    let mut r = adapt(&f, &edges, opts)?;
    r.value *= sign;
    Ok(r)
}

/// Integrates `f` over `(0, ∞)`.
pub fn integrate_positive(
    f: impl Fn(f64) -> f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    integrate_positive_with_breaks(f, &[], opts)
}

/// Integrates `f` over `(0, ∞)`, adding the given points (in `x`) to the
/// initial partition. Placing breaks at the centres of narrow peaks keeps the
/// first pass from stepping over them.
pub fn integrate_positive_with_breaks(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    let g = |t: f64| {
        let s = 1.0 - t;
        let x = t / s;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v / (s * s)
        }
    };
    let edges = edges_with_breaks(
        0.0,
        1.0,
        opts.initial_segments,
        breaks
            .iter()
            .filter(|x| x.is_finite() && **x > 0.0)
            .map(|&x| x / (1.0 + x)),
    );
    adapt(&g, &edges, opts)
}

/// Integrates `f` over the whole real line.
pub fn integrate_real_line(
    f: impl Fn(f64) -> f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    integrate_real_line_with_breaks(f, &[], opts)
}

pub fn integrate_real_line_with_breaks(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    let g = |t: f64| {
        let s = 1.0 - t * t;
        let x = t / s;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * (1.0 + t * t) / (s * s)
        }
    };
    // inverse of x = t / (1 - t²)
    let to_t = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            2.0 * x / (1.0 + (1.0 + 4.0 * x * x).sqrt())
        }
    };
    let edges = edges_with_breaks(
        -1.0,
        1.0,
        2 * opts.initial_segments,
        breaks.iter().filter(|x| x.is_finite()).map(|&x| to_t(x)),
    );
    adapt(&g, &edges, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_tail() {
        let r = integrate_positive(|x| (-x).exp(), &QuadratureOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
        assert!(r.error_estimate <= 1e-8);
    }

    #[test]
    fn polynomial_tail_of_order_three_halves() {
        // ∫_0^∞ (1 + x)^{-3/2} dx = 2
        let opts = QuadratureOptions::default();
        let r = integrate_positive(|x| (1.0 + x).powf(-1.5), &opts).unwrap();
        assert!((r.value - 2.0).abs() < 5e-8, "{r:?}");
    }

    #[test]
    fn finite_interval_and_reversed_limits() {
        let opts = QuadratureOptions::default();
        let r = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, &opts).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(|x| x.sin(), std::f64::consts::PI, 0.0, &opts).unwrap();
        assert!((r.value + 2.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_on_real_line() {
        let opts = QuadratureOptions::default();
        let r = integrate_real_line(|x| (-0.5 * x * x).exp(), &opts).unwrap();
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn breaks_find_far_narrow_peak() {
        // A spike of width 1e-3 at x = 40 holding all the mass.
        let f = |x: f64| crate::special::normal_pdf((x - 40.0) / 1e-3) / 1e-3;
        let opts = QuadratureOptions::default();
        let r = integrate_positive_with_breaks(f, &[40.0], &opts).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let opts = QuadratureOptions::default();
        let r = integrate(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &opts);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let opts = QuadratureOptions {
            max_intervals: 20,
            ..QuadratureOptions::default()
        };
        let r = integrate(|x| (1.0 / x).sin() / x, 1e-6, 1.0, &opts);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }
}
