//! Globally adaptive Gauss-Kronrod (7/15) integration over finite,
//! semi-infinite and doubly infinite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod 15-point abscissae (nonnegative half) and weights; the odd
// indices are the embedded 7-point Gauss nodes.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 5000;

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    /// Sum of per-segment |Kronrod - Gauss| differences.
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XK[i];
        let (f1, f2) = (f(c - dx), f(c + dx));
        kronrod += WK[i] * (f1 + f2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let (value, error) = (kronrod * h, ((kronrod - gauss) * h).abs());
    if !value.is_finite() {
        return Err(Error::Oracle(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    Ok(Segment { a, b, value, error })
}

fn adapt<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral> {
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b)?;
    let mut error = first.error;
    heap.push(first);
    let mut evaluations = 15;
    while error > tol {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Oracle(format!(
                "quadrature did not reach tolerance {tol:e} (error estimate {error:e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        evaluations += 30;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let value_sum: f64 = heap.iter().map(|s| s.value).sum();
    let error_sum: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Integral {
        value: value_sum,
        abs_error: error_sum,
        evaluations,
    })
}

/// Integrates `f` over `[lo, hi]` (endpoints may be infinite) to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Integral> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !(lo < hi) {
        return Err(Error::Precondition(format!("empty interval [{lo}, {hi}]")));
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adapt(f, lo, hi, tol),
        // x = lo + t / (1 - t), t in [0, 1)
        (true, false) => adapt(
            |t| {
                let u = 1.0 - t;
                f(lo + t / u) / (u * u)
            },
            0.0,
            1.0,
            tol,
        ),
        // x = hi - t / (1 - t)
        (false, true) => adapt(
            |t| {
                let u = 1.0 - t;
                f(hi - t / u) / (u * u)
            },
            0.0,
            1.0,
            tol,
        ),
        // x = t / (1 - t^2), t in (-1, 1)
        (false, false) => adapt(
            |t| {
                let u = 1.0 - t * t;
                f(t / u) * (1.0 + t * t) / (u * u)
            },
            -1.0,
            1.0,
            tol,
        ),
    }
}
