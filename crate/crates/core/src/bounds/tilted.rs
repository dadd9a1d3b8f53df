//! `E{exp f(X) g(X)} >= sup_a exp{f(a) - a f'(a) + psi(f'(a))} g(psi'(f'(a)))`
//! for convex `f` and `g`, with the reverse bounds on `E{ln X}` and the
//! fractional-moment bounds that follow from it.
//!
//! Products of exponentials and powers are accumulated as logarithms and
//! exponentiated once; `ln psi'` terms of the form `ln(1 + r)` use `ln_1p`.

use super::{require_convexity, BoundResult, Direction, Family};
use crate::distributions::DistributionModel;
use crate::error::{precondition, Result};
use crate::funcs::{Convexity, DifferentiableFunction};
use crate::optimize::{grid_max, grid_max_2d, GridMax, GridSpec};

/// `sign * exp(log_abs)`, with zero when the sign is zero.
fn signed_exp(log_abs: f64, sign: f64) -> f64 {
    if sign == 0.0 {
        0.0
    } else {
        sign * log_abs.exp()
    }
}

fn nonnegative_grid(grid: &GridSpec, name: &str) -> Result<()> {
    if grid.lo() < 0.0 {
        return Err(precondition(format!(
            "{name} grid must lie in [0, inf), starts at {}",
            grid.lo()
        )));
    }
    Ok(())
}

/// Adds a candidate parameter value outside the grid to a grid maximum.
fn with_candidate<F: Fn(f64) -> Option<f64>>(mut best: GridMax, objective: F, x: f64) -> GridMax {
    if let Some(v) = objective(x).filter(|v| !v.is_nan()) {
        if v > best.max {
            best.argmax = x;
            best.max = v;
        }
    }
    best
}

/// General form with tangency point `a` searched on `grid`; the inner
/// optimum `b* = psi'(f'(a))` is in closed form.
pub fn product_exp_composition(
    f: &DifferentiableFunction,
    g: &DifferentiableFunction,
    model: &DistributionModel,
    grid: &GridSpec,
) -> Result<BoundResult> {
    require_convexity(f, "f", Convexity::Convex)?;
    require_convexity(g, "g", Convexity::Convex)?;
    let objective = |a: f64| {
        let (fa, slope) = f.try_eval(a)?;
        let (psi, b) = model.try_cgf(slope)?;
        let (gb, _) = g.try_eval(b)?;
        Some((fa - a * slope + psi).exp() * gb)
    };
    let best = grid_max(objective, grid)?;
    let b = model.cgf_prime(f.deriv(best.argmax)?)?;
    let mut r = BoundResult::new(best.max, Direction::Lower, Family::ProductExpComposition)
        .param("a*", best.argmax)
        .param("b*", b)
        .diag("skipped_points", (best.evaluated - best.feasible) as f64);
    if best.evaluated > best.feasible {
        r = r.note(format!(
            "{} infeasible grid points skipped",
            best.evaluated - best.feasible
        ));
    }
    r.validated()
}

/// Objective of [`log_expectation_lower`] at `alpha`.
fn log_expectation_objective(model: &DistributionModel, alpha: f64) -> Option<f64> {
    if alpha == 0.0 {
        return Some(0.0);
    }
    let (psi, d) = model.try_cgf(-alpha)?;
    if d <= 0.0 {
        return None;
    }
    let ln_d = d.ln();
    Some(signed_exp(
        1.0 + alpha.ln() + psi + ln_d + ln_d.abs().ln(),
        ln_d.signum() * f64::from(u8::from(ln_d != 0.0)),
    ))
}

/// Reverse-Jensen lower bound
/// `E{ln X} >= e sup_{alpha >= 0} alpha phi(-alpha) psi'(-alpha) ln psi'(-alpha)`.
///
/// Requires the support of `X` to lie in `[1, inf)`: below 1 the factor
/// `x ln x` is negative and the inequality does not hold.
pub fn log_expectation_lower(model: &DistributionModel, grid: &GridSpec) -> Result<BoundResult> {
    nonnegative_grid(grid, "alpha")?;
    let support_ok = model.support().lo >= 1.0;
    if !support_ok {
        return BoundResult::new(f64::NAN, Direction::Lower, Family::ProductExpComposition)
            .check("support within [1, inf)", false)
            .validated();
    }
    let best = grid_max(|a| log_expectation_objective(model, a), grid)?;
    let mut r = BoundResult::new(best.max, Direction::Lower, Family::ProductExpComposition)
        .param("alpha", best.argmax)
        .check("support within [1, inf)", support_ok)
        .diag("skipped_points", (best.evaluated - best.feasible) as f64);
    if best.argmax > 0.0 {
        r = r
            .param("a*", 1.0 / best.argmax)
            .param("b*", model.cgf_prime(-best.argmax)?);
    }
    r.validated()
}

/// Closed-form objective for `X = 1 + sum_{i<=k} Y_i^2`, `Y_i ~ N(0, sigma2)`.
pub(crate) fn simo_objective(k: u64, sigma2: f64, alpha: f64) -> Option<f64> {
    if alpha < 0.0 {
        return None;
    }
    if alpha == 0.0 {
        return Some(0.0);
    }
    let kf = k as f64;
    let denom = 2.0 * alpha * sigma2;
    let r = kf * sigma2 / (1.0 + denom);
    let log1p_r = r.ln_1p();
    let log_value = 1.0 + alpha.ln() - alpha - 0.5 * kf * denom.ln_1p() + log1p_r + log1p_r.ln();
    Some(log_value.exp())
}

/// Lower bound on the SIMO ergodic capacity `E{ln(1 + sum_{i<=k} Y_i^2)}`.
///
/// Diagnostics carry the Jensen upper bound `ln(1 + k sigma2)` and the
/// value at the heuristic `alpha = 1/(k sigma2)`, which also competes
/// with the grid points as a candidate maximizer.
pub fn simo_capacity_lower(k: u64, sigma2: f64, grid: &GridSpec) -> Result<BoundResult> {
    if k == 0 || !(sigma2 > 0.0) {
        return Err(precondition(format!(
            "need k >= 1 and sigma2 > 0, got {k}, {sigma2}"
        )));
    }
    nonnegative_grid(grid, "alpha")?;
    let heuristic_alpha = 1.0 / (k as f64 * sigma2);
    let objective = |a| simo_objective(k, sigma2, a);
    let grid_best = grid_max(objective, grid)?;
    let best = with_candidate(grid_best, objective, heuristic_alpha);
    let heuristic = objective(heuristic_alpha).unwrap_or(f64::NAN);
    BoundResult::new(best.max, Direction::Lower, Family::ProductExpComposition)
        .param("alpha", best.argmax)
        .diag("jensen_upper", (k as f64 * sigma2).ln_1p())
        .diag("heuristic_alpha", heuristic_alpha)
        .diag("heuristic", heuristic)
        .diag("grid_max", grid_best.max)
        .validated()
}

/// Closed-form objective for `X = 1 + g Z`, `Z ~ Exp(theta)`.
pub(crate) fn exp_snr_objective(theta: f64, gain: f64, alpha: f64) -> Option<f64> {
    if alpha < 0.0 {
        return None;
    }
    if alpha == 0.0 {
        return Some(0.0);
    }
    let denom = theta + gain * alpha;
    // psi'(-alpha) = 1 + g / (theta + g alpha)
    let log1p_r = (gain / denom).ln_1p();
    let log_value = 1.0 + theta.ln() + alpha.ln() - alpha - denom.ln() + log1p_r + log1p_r.ln();
    Some(log_value.exp())
}

/// Lower bound on the ergodic capacity `E{ln(1 + g Z)}` with exponential SNR.
pub fn exp_snr_capacity_lower(theta: f64, gain: f64, grid: &GridSpec) -> Result<BoundResult> {
    if !(theta > 0.0 && gain > 0.0) {
        return Err(precondition(format!(
            "need theta > 0 and g > 0, got {theta}, {gain}"
        )));
    }
    nonnegative_grid(grid, "alpha")?;
    let best = grid_max(|a| exp_snr_objective(theta, gain, a), grid)?;
    BoundResult::new(best.max, Direction::Lower, Family::ProductExpComposition)
        .param("alpha", best.argmax)
        .diag("jensen_upper", (gain / theta).ln_1p())
        .validated()
}

fn power_exponent_ok(t: f64, s: f64) -> bool {
    s >= 0.0 && (t + s <= 0.0 || t + s >= 1.0)
}

/// `ln[(alpha e)^s phi(-alpha s) psi'(-alpha s)^(t+s)]`, or `None` when infeasible.
fn power_moment_log_objective(
    model: &DistributionModel,
    t: f64,
    s: f64,
    alpha: f64,
) -> Option<f64> {
    if !power_exponent_ok(t, s) || alpha < 0.0 {
        return None;
    }
    if s == 0.0 {
        let (_, d) = model.try_cgf(0.0)?;
        return (d > 0.0).then(|| t * d.ln());
    }
    if alpha == 0.0 {
        return Some(f64::NEG_INFINITY);
    }
    let (psi, d) = model.try_cgf(-alpha * s)?;
    if d <= 0.0 {
        return None;
    }
    Some(s * (alpha.ln() + 1.0) + psi + (t + s) * d.ln())
}

fn power_preconditions(model: &DistributionModel, t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(precondition(format!("t must be finite, got {t}")));
    }
    if model.support().lo < 0.0 {
        return Err(precondition(format!(
            "support of {} must lie in [0, inf)",
            model.name()
        )));
    }
    Ok(())
}

/// Lower bound on `E{X^t}` for fixed `s`, optimizing `alpha` on `alpha_grid`:
/// `sup_alpha (alpha e)^s phi(-alpha s) psi'(-alpha s)^(t+s)`.
///
/// `s >= 0` and `x^(t+s)` must be convex (`t + s <= 0` or `t + s >= 1`).
pub fn power_moment_lower_at(
    model: &DistributionModel,
    t: f64,
    s: f64,
    alpha_grid: &GridSpec,
) -> Result<BoundResult> {
    power_preconditions(model, t)?;
    nonnegative_grid(alpha_grid, "alpha")?;
    if !power_exponent_ok(t, s) {
        return Err(precondition(format!(
            "need s >= 0 and t + s outside (0, 1); got t = {t}, s = {s}"
        )));
    }
    let best = grid_max(|a| power_moment_log_objective(model, t, s, a), alpha_grid)?;
    BoundResult::new(
        best.max.exp(),
        Direction::Lower,
        Family::ProductExpComposition,
    )
    .param("alpha", best.argmax)
    .param("s", s)
    .diag("jensen", model.mean().powf(t))
    .validated()
}

/// As [`power_moment_lower_at`] with `s` optimized jointly on `s_grid`.
/// Values of `s` violating the convexity condition are skipped.
pub fn power_moment_lower(
    model: &DistributionModel,
    t: f64,
    s_grid: &GridSpec,
    alpha_grid: &GridSpec,
) -> Result<BoundResult> {
    power_preconditions(model, t)?;
    nonnegative_grid(alpha_grid, "alpha")?;
    if !s_grid.points().any(|s| power_exponent_ok(t, s)) {
        return Err(precondition(format!(
            "no s on [{}, {}] satisfies s >= 0 with t + s outside (0, 1) for t = {t}",
            s_grid.lo(),
            s_grid.hi()
        )));
    }
    let best = grid_max_2d(
        |a, s| power_moment_log_objective(model, t, s, a),
        alpha_grid,
        s_grid,
    )?;
    BoundResult::new(
        best.max.exp(),
        Direction::Lower,
        Family::ProductExpComposition,
    )
    .param("alpha", best.argmax.0)
    .param("s", best.argmax.1)
    .diag("jensen", model.mean().powf(t))
    .diag("skipped_points", (best.evaluated - best.feasible) as f64)
    .validated()
}

/// Lower bound on `E|mean(Y_1..Y_n) - theta|^t` at tangency parameters
/// `alpha = zeta n / sigma2` and `s`:
/// `(sigma^t / n^(t/2)) (zeta e)^s / (1 + 2 zeta s)^((t+1)/2 + s)`.
pub fn estimation_error_moment_lower(
    n: u64,
    sigma2: f64,
    t: f64,
    zeta: f64,
    s: f64,
) -> Result<f64> {
    if n == 0 || !(sigma2 > 0.0) {
        return Err(precondition(format!(
            "need n >= 1 and sigma2 > 0, got {n}, {sigma2}"
        )));
    }
    if !(t > 0.0 && t <= 2.0) {
        return Err(precondition(format!("t must be in (0, 2], got {t}")));
    }
    if !(zeta > 0.0) {
        return Err(precondition(format!("zeta must be positive, got {zeta}")));
    }
    if !(s >= 1.0 - t / 2.0 || s <= -t / 2.0) {
        return Err(precondition(format!(
            "s = {s} lies in (-t/2, 1 - t/2) = ({}, {})",
            -t / 2.0,
            1.0 - t / 2.0
        )));
    }
    let base = 1.0 + 2.0 * zeta * s;
    if base <= 0.0 {
        return Err(precondition(format!(
            "1 + 2 zeta s = {base} must be positive (CGF domain)"
        )));
    }
    let jensen_log = 0.5 * t * (sigma2 / n as f64).ln();
    let log_gap = s * (zeta.ln() + 1.0) - ((t + 1.0) / 2.0 + s) * base.ln();
    Ok((jensen_log + log_gap).exp())
}

/// `ln` of the gap factor at `s` with `zeta` at its optimum `1/(t+1)`.
pub(crate) fn gap_log_objective(t: f64, s: f64) -> f64 {
    let w = t + 2.0 * s + 1.0;
    0.5 * (t + 1.0) * ((t + 1.0) / w).ln() + s * (1.0 - w.ln())
}

/// The gap factor `mu_t` between the Jensen upper bound and the
/// estimation-error lower bound, maximized over `s_grid`. Returns `(mu_t, s*)`.
///
/// Grid points with `s <= 1 - t/2` are infeasible and skipped. At `t = 2`
/// the supremum is approached as `s -> 0` and is not attained, so a grid
/// starting at 0 relies on refinement to approach it.
pub fn gap_factor_mu(t: f64, s_grid: &GridSpec) -> Result<(f64, f64)> {
    if !(t > 0.0 && t <= 2.0) {
        return Err(precondition(format!("t must be in (0, 2], got {t}")));
    }
    let s_min = 1.0 - t / 2.0;
    let best = grid_max(|s| (s > s_min).then(|| gap_log_objective(t, s)), s_grid)?;
    Ok((best.max.exp(), best.argmax))
}

/// Objective of the estimation-error bound before `zeta` is eliminated,
/// `ln[(zeta e)^s / (1 + 2 zeta s)^((t+1)/2 + s)]`.
pub fn gap_log_objective_with_zeta(t: f64, zeta: f64, s: f64) -> f64 {
    s * (zeta.ln() + 1.0) - ((t + 1.0) / 2.0 + s) * (2.0 * zeta * s).ln_1p()
}
