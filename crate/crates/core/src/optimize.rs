//! Exhaustive grid maximization with optional local refinement.
//!
//! Objectives return `None` at infeasible points (outside a function or CGF
//! domain); those points are skipped. Ties go to the smallest argument so
//! results do not depend on evaluation order.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refine {
    pub passes: u32,
    pub shrink: f64,
}

impl Default for Refine {
    fn default() -> Self {
        Refine {
            passes: 3,
            shrink: 0.1,
        }
    }
}

/// Closed search interval `[lo, hi]` sampled at `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    step: f64,
    refine: Option<Refine>,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(config(format!(
                "grid needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(step > 0.0 && step <= hi - lo) {
            return Err(config(format!(
                "grid step must be in (0, {}], got {step}",
                hi - lo
            )));
        }
        Ok(GridSpec {
            lo,
            hi,
            step,
            refine: None,
        })
    }

    pub fn with_refinement(mut self, refine: Refine) -> Result<Self> {
        if refine.shrink <= 0.0 || refine.shrink >= 1.0 {
            return Err(config(format!(
                "refinement shrink must be in (0, 1), got {}",
                refine.shrink
            )));
        }
        self.refine = Some(refine);
        Ok(self)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn refine(&self) -> Option<Refine> {
        self.refine
    }

    /// Number of grid points, including `hi`.
    pub fn len(&self) -> usize {
        let span = (self.hi - self.lo) / self.step;
        let full = (span + 1e-9).floor() as usize;
        if self.lo + full as f64 * self.step < self.hi - 1e-9 * self.step {
            full + 2
        } else {
            full + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `i`-th point; the last one is exactly `hi`.
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 >= self.len() {
            self.hi
        } else {
            self.lo + i as f64 * self.step
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Sub-grid of width `2 * step` around `center`, clipped to `[lo, hi]`,
    /// with the step shrunk by `shrink`.
    fn window(&self, center: f64, shrink: f64) -> Option<GridSpec> {
        let lo = (center - self.step).max(self.lo);
        let hi = (center + self.step).min(self.hi);
        let step = self.step * shrink;
        if hi - lo < step {
            return None;
        }
        Some(GridSpec {
            lo,
            hi,
            step,
            refine: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMax {
    pub argmax: f64,
    pub max: f64,
    pub feasible: usize,
    pub evaluated: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMax2d {
    pub argmax: (f64, f64),
    pub max: f64,
    pub feasible: usize,
    pub evaluated: usize,
}

fn feasible(v: Option<f64>) -> Option<f64> {
    v.filter(|v| !v.is_nan())
}

/// One unrefined pass; `None` when nothing is feasible.
fn scan<F>(objective: &F, grid: &GridSpec) -> (Option<(f64, f64)>, usize, usize)
where
    F: Fn(f64) -> Option<f64> + Sync,
{
    let n = grid.len();
    let values = par::map_indexed(n, |i| feasible(objective(grid.point(i))));
    let mut best: Option<(f64, f64)> = None;
    let mut count = 0;
    for (i, v) in values.into_iter().enumerate() {
        let Some(v) = v else { continue };
        count += 1;
        if best.is_none_or(|(_, m)| v > m) {
            best = Some((grid.point(i), v));
        }
    }
    (best, count, n)
}

/// Maximizes `objective` over `grid`, returning the smallest maximizer.
pub fn grid_max<F>(objective: F, grid: &GridSpec) -> Result<GridMax>
where
    F: Fn(f64) -> Option<f64> + Sync,
{
    let (best, feasible, mut evaluated) = scan(&objective, grid);
    let Some((mut arg, mut max)) = best else {
        return Err(Error::Infeasible { evaluated });
    };
    if let Some(refine) = grid.refine {
        let mut current = *grid;
        for _ in 0..refine.passes {
            let Some(window) = current.window(arg, refine.shrink) else {
                break;
            };
            let (b, _, n) = scan(&objective, &window);
            evaluated += n;
            if let Some((a, v)) = b {
                if v > max || (v == max && a < arg) {
                    arg = a;
                    max = v;
                }
            }
            current = window;
        }
    }
    Ok(GridMax {
        argmax: arg,
        max,
        feasible,
        evaluated,
    })
}

/// Best `((a, b), value)` if any point was feasible, then the feasible and skipped counts.
type Scan2d = (Option<((f64, f64), f64)>, usize, usize);

fn scan_2d<F>(objective: &F, ga: &GridSpec, gb: &GridSpec) -> Scan2d
where
    F: Fn(f64, f64) -> Option<f64> + Sync,
{
    let (na, nb) = (ga.len(), gb.len());
    // Parallel over rows; each row keeps its first maximum, rows are merged in order.
    let rows = par::map_indexed(na, |i| {
        let a = ga.point(i);
        let mut best: Option<(f64, f64)> = None;
        let mut count = 0usize;
        for j in 0..nb {
            let b = gb.point(j);
            let Some(v) = feasible(objective(a, b)) else {
                continue;
            };
            count += 1;
            if best.is_none_or(|(_, m)| v > m) {
                best = Some((b, v));
            }
        }
        (a, best, count)
    });
    let mut best: Option<((f64, f64), f64)> = None;
    let mut total = 0;
    for (a, row, count) in rows {
        total += count;
        if let Some((b, v)) = row {
            if best.is_none_or(|(_, m)| v > m) {
                best = Some(((a, b), v));
            }
        }
    }
    (best, total, na * nb)
}

/// Exhaustive product-grid maximization; ties resolve to the
/// lexicographically smallest `(a, b)`.
pub fn grid_max_2d<F>(objective: F, grid_a: &GridSpec, grid_b: &GridSpec) -> Result<GridMax2d>
where
    F: Fn(f64, f64) -> Option<f64> + Sync,
{
    let (best, feasible, mut evaluated) = scan_2d(&objective, grid_a, grid_b);
    let Some((mut arg, mut max)) = best else {
        return Err(Error::Infeasible { evaluated });
    };
    let refine = grid_a.refine.or(grid_b.refine);
    if let Some(refine) = refine {
        let (mut ca, mut cb) = (*grid_a, *grid_b);
        for _ in 0..refine.passes {
            let (Some(wa), Some(wb)) = (
                ca.window(arg.0, refine.shrink),
                cb.window(arg.1, refine.shrink),
            ) else {
                break;
            };
            let (b, _, n) = scan_2d(&objective, &wa, &wb);
            evaluated += n;
            if let Some((a, v)) = b {
                if v > max || (v == max && a < arg) {
                    arg = a;
                    max = v;
                }
            }
            ca = wa;
            cb = wb;
        }
    }
    Ok(GridMax2d {
        argmax: arg,
        max,
        feasible,
        evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1.0, 1.0, 0.1).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(GridSpec::new(0.0, 1.0, 2.0).is_err());
        assert!(GridSpec::new(0.0, f64::INFINITY, 1.0).is_err());
        let g = GridSpec::new(0.0, 1.0, 0.1).unwrap();
        assert!(g
            .with_refinement(Refine {
                passes: 1,
                shrink: 1.0
            })
            .is_err());
    }

    #[test]
    fn grid_includes_both_endpoints() {
        let g = GridSpec::new(0.0, 10.0, 0.001).unwrap();
        assert_eq!(g.len(), 10_001);
        assert_eq!(g.point(0), 0.0);
        assert_eq!(g.point(10_000), 10.0);
        assert_eq!(g.point(1000), 1.0);

        let g = GridSpec::new(0.0, 1.0, 0.3).unwrap();
        let pts: Vec<_> = g.points().collect();
        assert_eq!(pts.len(), 5);
        assert_eq!(*pts.last().unwrap(), 1.0);
    }

    #[test]
    fn quadratic_maximum() {
        let g = GridSpec::new(0.0, 10.0, 0.001).unwrap();
        let r = grid_max(|x| Some(-(x - 2.0) * (x - 2.0)), &g).unwrap();
        assert!((r.argmax - 2.0).abs() <= 0.0005);
        assert!(r.max.abs() <= 1e-6);
        assert_eq!(r.feasible, 10_001);
    }

    #[test]
    fn alpha_exp_alpha_maximum() {
        let g = GridSpec::new(0.0, 10.0, 0.001).unwrap();
        let r = grid_max(|a| Some(a * (-a).exp()), &g).unwrap();
        assert!((r.argmax - 1.0).abs() <= 0.0005);
        assert!((r.max - 1.0 / E).abs() < 1e-9);
    }

    #[test]
    fn infeasible_points_are_skipped() {
        let g = GridSpec::new(0.0, 10.0, 0.5).unwrap();
        let r = grid_max(|x| (x >= 5.0).then_some(x), &g).unwrap();
        assert_eq!(r.argmax, 10.0);
        assert_eq!(r.feasible, 11);
        assert_eq!(r.evaluated, 21);
        let err = grid_max(|_| None, &g).unwrap_err();
        assert_eq!(err, Error::Infeasible { evaluated: 21 });
        let r = grid_max(|x| if x < 1.0 { Some(f64::NAN) } else { Some(-x) }, &g).unwrap();
        assert_eq!(r.argmax, 1.0);
    }

    #[test]
    fn ties_go_to_smallest_argument() {
        let g = GridSpec::new(-2.0, 2.0, 0.5).unwrap();
        let r = grid_max(|x| Some(x * x), &g).unwrap();
        assert_eq!(r.argmax, -2.0);
        let r = grid_max_2d(|a, b| Some((a * b).abs()), &g, &g).unwrap();
        assert_eq!(r.argmax, (-2.0, -2.0));
    }

    #[test]
    fn refinement_sharpens_and_never_loses() {
        let g = GridSpec::new(0.0, 10.0, 0.1).unwrap();
        let f = |x: f64| Some(-(x - std::f64::consts::PI).powi(2));
        let coarse = grid_max(f, &g).unwrap();
        let fine = grid_max(f, &g.with_refinement(Refine::default()).unwrap()).unwrap();
        assert!(fine.max >= coarse.max);
        assert!((fine.argmax - std::f64::consts::PI).abs() < 1e-4);
        assert_eq!(fine.max, f(fine.argmax).unwrap());
    }

    #[test]
    fn two_dimensional_examples() {
        let g = GridSpec::new(-5.0, 5.0, 0.01).unwrap();
        let r = grid_max_2d(|a, b| Some(-(a - 1.0).powi(2) - (b - 3.0).powi(2)), &g, &g).unwrap();
        assert!((r.argmax.0 - 1.0).abs() < 1e-9 && (r.argmax.1 - 3.0).abs() < 1e-9);

        let p = |a: f64| -(a - 0.37).abs();
        let q = |b: f64| (b * 1.3).sin();
        let r = grid_max_2d(|a, b| Some(p(a) + q(b)), &g, &g).unwrap();
        let ra = grid_max(|a| Some(p(a)), &g).unwrap();
        let rb = grid_max(|b| Some(q(b)), &g).unwrap();
        assert_eq!(r.argmax, (ra.argmax, rb.argmax));
    }
}
