//! Products of two nonnegative convex (or two concave) functions, bounded
//! through the first two moments only.

use serde::{Deserialize, Serialize};

use super::tilted::exp_snr_capacity_lower;
use super::{require_convexity, BoundResult, Direction, Family};
use crate::error::{precondition, Result};
use crate::funcs::{catalog, Convexity, DifferentiableFunction};
use crate::optimize::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Both convex; yields a lower bound.
    ConvexPair,
    /// Both concave; every tangent inequality flips and the bound is an upper bound.
    ConcavePair,
}

/// Bound on `E{f(X) g(Y)}` from `E{X}`, `E{Y}` and `E{XY}`:
/// `f(a*) g(E Y)` with `a* = E{X} g(E{XY}/E{X}) / g(E{Y})`.
///
/// Validity conditions are evaluated at `a*` and the call fails with
/// [`Error::Validity`](crate::Error::Validity) when one does not hold:
/// `f(a*) >= a* f'(a*) >= 0` for the convex pair, `f(a*) - a* f'(a*) >= 0`
/// and `f'(a*) >= 0` for the concave pair, and `g(E Y) > 0` in both cases.
pub fn product_two_convex_joint(
    f: &DifferentiableFunction,
    g: &DifferentiableFunction,
    m_x: f64,
    m_y: f64,
    m_xy: f64,
    orientation: Orientation,
) -> Result<BoundResult> {
    let want = match orientation {
        Orientation::ConvexPair => Convexity::Convex,
        Orientation::ConcavePair => Convexity::Concave,
    };
    require_convexity(f, "f", want)?;
    require_convexity(g, "g", want)?;
    if !(m_x > 0.0 && m_x.is_finite()) || !m_y.is_finite() || !m_xy.is_finite() {
        return Err(precondition(format!(
            "need E X > 0 and finite moments, got E X = {m_x}, E Y = {m_y}, E XY = {m_xy}"
        )));
    }
    let c = m_xy / m_x;
    let g_mean = g.value(m_y)?;
    let g_c = g.value(c)?;
    let direction = match orientation {
        Orientation::ConvexPair => Direction::Lower,
        Orientation::ConcavePair => Direction::Upper,
    };
    let mut r = BoundResult::new(f64::NAN, direction, Family::ProductTwoConvex)
        .check("g(E Y) > 0", g_mean > 0.0);
    if g_mean <= 0.0 {
        return r.validated();
    }
    let a = m_x * g_c / g_mean;
    let fa = f.value(a)?;
    let slope = f.deriv(a)?;
    r = match orientation {
        Orientation::ConvexPair => r
            .check("f(a*) >= a* f'(a*)", fa >= a * slope)
            .check("a* f'(a*) >= 0", a * slope >= 0.0),
        Orientation::ConcavePair => r
            .check("f(a*) - a* f'(a*) >= 0", fa - a * slope >= 0.0)
            .check("f'(a*) >= 0", slope >= 0.0),
    };
    r.value = fa * g_mean;
    r.param("a*", a).param("b*", m_y).param("c*", c).validated()
}

/// Single-variable form: `m1 = E{X} > 0`, `m2 = E{X^2} >= m1^2`.
pub fn product_two_convex(
    f: &DifferentiableFunction,
    g: &DifferentiableFunction,
    m1: f64,
    m2: f64,
    orientation: Orientation,
) -> Result<BoundResult> {
    // relative slack so that a point mass (m2 = m1^2 up to rounding) passes
    if m2 < m1 * m1 * (1.0 - 4.0 * f64::EPSILON) {
        return Err(precondition(format!(
            "E X^2 = {m2} is below (E X)^2 = {}",
            m1 * m1
        )));
    }
    product_two_convex_joint(f, g, m1, m1, m2, orientation)
}

/// Upper bound on `Var{ln(1 + g Z)}` for `Z ~ Exp(theta)`: an upper bound
/// `U` on `E{ln^2(1 + g Z)}` from the first two moments of `Z`, minus the
/// square of the capacity lower bound `L`.
pub fn capacity_variance_upper(theta: f64, gain: f64, grid: &GridSpec) -> Result<BoundResult> {
    if !(theta > 0.0 && gain > 0.0) {
        return Err(precondition(format!(
            "need theta > 0 and g > 0, got {theta}, {gain}"
        )));
    }
    let c = catalog("log1p_gain", &[gain])?;
    let (m1, m2) = (1.0 / theta, 2.0 / (theta * theta));
    let upper = product_two_convex(&c, &c, m1, m2, Orientation::ConcavePair)?;
    let lower = exp_snr_capacity_lower(theta, gain, grid)?;
    let (u, l) = (upper.value, lower.value);
    let mut r = BoundResult::new(u - l * l, Direction::Upper, Family::ProductTwoConvex)
        .check("capacity lower bound >= 0", l >= 0.0)
        .check("U >= L^2", u >= l * l)
        .diag("second_moment_upper", u)
        .diag("capacity_lower", l);
    for (name, v) in upper.optimizer.iter().chain(lower.optimizer.iter()) {
        r = r.param(name, *v);
    }
    r.validated()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn point_mass_is_exact() {
        let f = catalog("exp_scale", &[1.0]).unwrap();
        let g = catalog("exp_scale", &[0.5]).unwrap();
        let x0: f64 = 0.6;
        let r = product_two_convex(&f, &g, x0, x0 * x0, Orientation::ConvexPair).unwrap();
        let exact = x0.exp() * (0.5 * x0).exp();
        assert!((r.value - exact).abs() < 1e-14 * exact);
        assert!((r.optimizer_value("a*").unwrap() - x0).abs() < 1e-15);
        assert_eq!(r.direction, Direction::Lower);
    }

    #[test]
    fn constant_factor_is_jensen() {
        let f = catalog("exp_scale", &[1.0]).unwrap();
        let one = catalog("constant", &[1.0]).unwrap();
        let r = product_two_convex(&f, &one, 0.5, 0.9, Orientation::ConvexPair).unwrap();
        assert_eq!(r.value, 0.5f64.exp());
    }

    #[test]
    fn concave_capacity_example() {
        let c = catalog("log1p_gain", &[5.0]).unwrap();
        let r = product_two_convex(&c, &c, 1.0, 2.0, Orientation::ConcavePair).unwrap();
        let ln6 = 6.0f64.ln();
        let expect = ln6 * (5.0 * 11.0f64.ln() / ln6).ln_1p();
        assert!((r.value - expect).abs() < 1e-14);
        assert_eq!(r.direction, Direction::Upper);
        assert!(r.is_valid());
    }

    #[test]
    fn validity_failure_is_an_error() {
        // f(a) = a^2: f(a) >= a f'(a) = 2a^2 fails for a != 0
        let f = catalog("power", &[2.0]).unwrap();
        let g = catalog("power", &[2.0]).unwrap();
        let err = product_two_convex(&f, &g, 1.0, 2.0, Orientation::ConvexPair).unwrap_err();
        assert_eq!(err, Error::Validity("f(a*) >= a* f'(a*)".into()));
    }

    #[test]
    fn orientation_must_match_tags() {
        let c = catalog("log1p_gain", &[5.0]).unwrap();
        assert!(matches!(
            product_two_convex(&c, &c, 1.0, 2.0, Orientation::ConvexPair),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            product_two_convex(&c, &c, 1.0, 0.5, Orientation::ConcavePair),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn variance_bound_shrinks_with_gain() {
        let grid = GridSpec::new(0.0, 10.0, 0.001).unwrap();
        let r = capacity_variance_upper(1.0, 5.0, &grid).unwrap();
        assert!(r.value > 0.0);
        let tiny = capacity_variance_upper(1.0, 1e-6, &grid).unwrap();
        assert!(tiny.value.abs() < 1e-9 && tiny.value >= 0.0);
    }
}
