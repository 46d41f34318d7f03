//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Global adaptive subdivision: the interval with the largest error
//! estimate is bisected until the summed estimate meets the tolerance.
//! Semi-infinite pieces are mapped onto `(0, 1]` with `x = a + (1 - t) / t`.
//! Rule nodes never touch interval endpoints, so integrands may be
//! singular (but integrable) there.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

/// One application of the 15-point Kronrod rule on `[a, b]`.
/// Returns `(kronrod, error_estimate)`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    let err = (kronrod - gauss).abs().max(50.0 * f64::EPSILON * kronrod.abs());
    (kronrod, err)
}

struct Piece {
    // Index of the integrand this piece belongs to.
    tag: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate adaptively over several seed pieces at once, sharing one global
/// error budget. Each seed `(tag, a, b)` is integrated with `fs[tag]`.
fn adaptive(fs: &[&dyn Fn(f64) -> f64], seeds: &[(usize, f64, f64)], cfg: &QuadConfig) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    for &(tag, a, b) in seeds {
        if a == b {
            continue;
        }
        let (v, e) = gauss_kronrod_15(&fs[tag], a, b);
        value += v;
        error += e;
        heap.push(Piece {
            tag,
            a,
            b,
            value: v,
            error: e,
        });
    }
    let mut evaluations = 15 * heap.len();
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::numerical(
            "integrand produced a non-finite value",
            format!("seed pieces: {seeds:?}"),
        ));
    }
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            break;
        }
        if heap.len() >= cfg.max_intervals {
            let worst = heap.peek().map(|p| (p.tag, p.a, p.b, p.error));
            return Err(Error::numerical(
                format!("quadrature did not converge: estimate {value:e}, error {error:e}, target {target:e}"),
                format!("{} intervals; worst (piece, a, b, error) {:?}", heap.len(), worst),
            ));
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            let diag = format!("interval [{:e}, {:e}] exhausted", worst.a, worst.b);
            return Err(Error::numerical("quadrature resolution exhausted", diag));
        }
        let f = &fs[worst.tag];
        let (v1, e1) = gauss_kronrod_15(f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(f, mid, worst.b);
        evaluations += 30;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        if !value.is_finite() {
            return Err(Error::numerical(
                "integrand produced a non-finite value",
                format!("near [{:e}, {:e}]", worst.a, worst.b),
            ));
        }
        let tag = worst.tag;
        heap.push(Piece {
            tag,
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            tag,
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated update round-off.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadResult {
        value,
        error,
        evaluations,
        intervals: heap.len(),
    })
}

/// Integrate `f` over `[a, b]`; either bound may be infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    integrate_pieces(f, &[a, b], cfg)
}

/// Integrate `f` over `[points[0], points[last]]`, using the interior points
/// as initial breakpoints. The end points may be infinite; interior points
/// must be finite. Points must be non-decreasing.
///
/// Infinite ends are mapped onto `(0, 1]` by `x = b ∓ (1 - t)/t`. All pieces
/// share one error budget, so the relative tolerance applies to the total.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], cfg: &QuadConfig) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::Domain("need at least two integration points".into()));
    }
    if points.iter().any(|p| p.is_nan()) || points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain(format!("integration points not sorted: {points:?}")));
    }
    let n = points.len();
    if points[1..n - 1].iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain("interior breakpoints must be finite".into()));
    }
    let lo = points[0];
    let hi = points[n - 1];
    if lo == f64::NEG_INFINITY && hi == f64::INFINITY && n == 2 {
        // Whole line with no interior point: split at zero.
        return integrate_pieces(f, &[lo, 0.0, hi], cfg);
    }
    if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("integration range [{lo}, {hi}] is empty")));
    }

    let left_anchor = points[1];
    let right_anchor = points[n - 2];
    let left = |t: f64| f(left_anchor - (1.0 - t) / t) / (t * t);
    let right = |t: f64| f(right_anchor + (1.0 - t) / t) / (t * t);
    let fs: [&dyn Fn(f64) -> f64; 3] = [&f, &left, &right];

    let mut seeds: Vec<(usize, f64, f64)> = points
        .windows(2)
        .filter(|w| w[0].is_finite() && w[1].is_finite())
        .map(|w| (0, w[0], w[1]))
        .collect();
    if lo == f64::NEG_INFINITY {
        seeds.push((1, 0.0, 1.0));
    }
    if hi == f64::INFINITY {
        seeds.push((2, 0.0, 1.0));
    }
    adaptive(&fs, &seeds, cfg)
}
