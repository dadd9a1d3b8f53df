//! `E{exp f(X)} >= exp sup_a { f(a) - a f'(a) + psi(f'(a)) }` for convex `f`.

use super::{require_convexity, BoundResult, Direction, Family};
use crate::distributions::DistributionModel;
use crate::error::{precondition, Error, Result};
use crate::funcs::{Convexity, DifferentiableFunction};
use crate::optimize::{grid_max, GridSpec};

/// Exponent of the bound at tangency point `a`, or `None` if `a` is outside
/// the domain of `f` or `f'(a)` is outside the CGF domain.
pub(crate) fn exponent_at(
    f: &DifferentiableFunction,
    model: &DistributionModel,
    a: f64,
) -> Option<f64> {
    let (fa, slope) = f.try_eval(a)?;
    let (psi, _) = model.try_cgf(slope)?;
    Some(fa - a * slope + psi)
}

/// Lower bound on `E{exp f(X)}` with the tangency point searched on `grid`.
///
/// The stationarity residual `psi'(f'(a*)) - a*` and, when `f''` is known,
/// the second-order product `f''(a*) psi''(f'(a*))` are reported as
/// diagnostics; the bound holds at any `a` regardless.
pub fn exp_of_convex(
    f: &DifferentiableFunction,
    model: &DistributionModel,
    grid: &GridSpec,
) -> Result<BoundResult> {
    require_convexity(f, "f", Convexity::Convex)?;
    let best = grid_max(|a| exponent_at(f, model, a), grid)?;
    let a = best.argmax;
    let slope = f.deriv(a)?;
    let residual = model.cgf_prime(slope)? - a;

    let mut r = BoundResult::new(best.max.exp(), Direction::Lower, Family::ExpOfConvex)
        .param("a*", a)
        .diag("log_value", best.max)
        .diag("stationarity_residual", residual)
        .diag("skipped_points", (best.evaluated - best.feasible) as f64);
    let curvature = f
        .second_deriv(a)?
        .map(|f2| f2 * model.cgf_second(slope).unwrap_or(f64::NAN));
    let tol = grid.step() * (1.0 + curvature.unwrap_or(0.0).abs());
    r = r.diag(
        "stationary_within_grid",
        f64::from(u8::from(residual.abs() <= tol)),
    );
    if let Some(c) = curvature {
        r = r.diag("second_order_product", c);
        if c >= 1.0 {
            r = r.note("second-order condition f''(a*) psi''(f'(a*)) < 1 does not hold");
        }
    }
    if a == grid.lo() || a == grid.hi() {
        r = r.note("optimum on the grid boundary");
    }
    if best.evaluated > best.feasible {
        r = r.note(format!(
            "{} infeasible grid points skipped",
            best.evaluated - best.feasible
        ));
    }
    r.validated()
}

/// Bound and exact value of `E{exp(s X^2 / 2)}` for `X ~ N(mu, sigma2)`.
///
/// Returns `(bound, exact)`, with `exact / bound = (1 - sigma2 s)^(-1/2)`.
pub fn gaussian_exp_square(mu: f64, sigma2: f64, s: f64) -> Result<(f64, f64)> {
    if !(sigma2 > 0.0) || !mu.is_finite() {
        return Err(precondition(format!(
            "need finite mu and sigma2 > 0, got {mu}, {sigma2}"
        )));
    }
    if !(s >= 0.0) {
        return Err(precondition(format!("s must be nonnegative, got {s}")));
    }
    let slack = 1.0 - sigma2 * s;
    if slack <= 0.0 {
        return Err(Error::Singularity(format!(
            "E{{exp(s X^2 / 2)}} is infinite for sigma2 * s = {} >= 1",
            sigma2 * s
        )));
    }
    let bound = (mu * mu * s / (2.0 * slack)).exp();
    Ok((bound, bound / slack.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::gaussian;
    use crate::funcs::{affine, catalog};
    use std::f64::consts::{E, SQRT_2};

    fn grid() -> GridSpec {
        GridSpec::new(-10.0, 10.0, 0.001).unwrap()
    }

    #[test]
    fn closed_form_example() {
        let (b, x) = gaussian_exp_square(1.0, 0.5, 1.0).unwrap();
        assert!((b - E).abs() < 1e-15);
        assert!((x - SQRT_2 * E).abs() < 1e-14);
        assert!((x - 3.84423).abs() < 1e-5);

        let (b, x) = gaussian_exp_square(1.3, 1e-12, 0.8).unwrap();
        let limit = (1.3f64 * 1.3 * 0.8 / 2.0).exp();
        assert!((b - limit).abs() < 1e-10 && (x - limit).abs() < 1e-10);

        assert_eq!(gaussian_exp_square(2.0, 1.0, 0.0).unwrap(), (1.0, 1.0));
        assert!(matches!(
            gaussian_exp_square(0.0, 1.0, 1.0),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn grid_search_matches_closed_form() {
        for (mu, sigma2, s) in [(1.0, 0.5, 1.0), (-0.7, 0.2, 2.0), (2.0, 1.0, 0.5)] {
            let f = catalog("half_quadratic", &[s]).unwrap();
            let r = exp_of_convex(&f, &gaussian(mu, sigma2).unwrap(), &grid()).unwrap();
            let (b, _) = gaussian_exp_square(mu, sigma2, s).unwrap();
            assert!((r.value - b).abs() <= 1e-6 * b, "{r:?} vs {b}");
            let a_star = mu / (1.0 - sigma2 * s);
            assert!((r.optimizer_value("a*").unwrap() - a_star).abs() <= 0.0005);
            assert_eq!(r.diagnostic("stationary_within_grid"), Some(1.0));
            assert!(r.diagnostic("second_order_product").unwrap() < 1.0);
        }
    }

    #[test]
    fn centered_gaussian_gives_one() {
        let f = catalog("half_quadratic", &[1.0]).unwrap();
        let r = exp_of_convex(&f, &gaussian(0.0, 0.6).unwrap(), &grid()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.optimizer_value("a*"), Some(0.0));
        assert!(r.value <= 1.0 / (1.0f64 - 0.6).sqrt());
    }

    #[test]
    fn affine_exponent_is_exact() {
        let f = affine("line", 0.4, 1.5);
        let m = gaussian(0.3, 0.8).unwrap();
        let r = exp_of_convex(&f, &m, &GridSpec::new(-1.0, 1.0, 0.1).unwrap()).unwrap();
        let exact = (0.4 + m.cgf(1.5).unwrap()).exp();
        assert!((r.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn infeasible_grid() {
        // f'(a) = 2a must stay below theta = 1 for the exponential model
        let f = catalog("half_quadratic", &[2.0]).unwrap();
        let m = crate::distributions::exponential(1.0).unwrap();
        let g = GridSpec::new(1.0, 3.0, 0.5).unwrap();
        assert!(matches!(
            exp_of_convex(&f, &m, &g),
            Err(Error::Infeasible { .. })
        ));
        let g = GridSpec::new(-1.0, 3.0, 0.5).unwrap();
        let r = exp_of_convex(&f, &m, &g).unwrap();
        assert!(r.notes.contains("skipped"));
    }
}
