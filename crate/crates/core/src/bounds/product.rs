//! `E{f(X) g(X)} >= f(E{X g(X)} / E{g(X)}) E{g(X)}` for convex `f` and
//! nonnegative `g`, and the instances built on it.

use serde::{Deserialize, Serialize};

use super::{require_convexity, BoundResult, Direction, Family};
use crate::distributions::DistributionModel;
use crate::error::{precondition, Result};
use crate::funcs::{Convexity, DifferentiableFunction};

/// Lower bound on `E{f(X) g(X)}` from `m_g = E{g(X)}` and `m_xg = E{X g(X)}`.
///
/// The tangency point is `a* = m_xg / m_g`. For `f` and `g` acting on
/// different variables pass `m_g = E{g(Y)}` and `m_xg = E{X g(Y)}`.
pub fn product_convex_positive(
    f: &DifferentiableFunction,
    m_g: f64,
    m_xg: f64,
) -> Result<BoundResult> {
    require_convexity(f, "f", Convexity::Convex)?;
    if !(m_g > 0.0 && m_g.is_finite()) || !m_xg.is_finite() {
        return Err(precondition(format!(
            "need E{{g}} > 0 and finite E{{Xg}}, got {m_g} and {m_xg}"
        )));
    }
    let a = m_xg / m_g;
    let value = f.value(a)? * m_g;
    BoundResult::new(value, Direction::Lower, Family::ProductConvexPositive)
        .param("a*", a)
        .validated()
}

/// A probability mass function over named letters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfTable {
    letters: Vec<String>,
    probs: Vec<f64>,
}

impl PmfTable {
    pub fn new(letters: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if letters.len() != probs.len() || probs.is_empty() {
            return Err(precondition(format!(
                "{} letters for {} probabilities",
                letters.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(precondition("probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(precondition(format!("probabilities sum to {total}, not 1")));
        }
        Ok(PmfTable { letters, probs })
    }

    /// Letters named `u0, u1, ...`.
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        let letters = (0..probs.len()).map(|i| format!("u{i}")).collect();
        PmfTable::new(letters, probs.to_vec())
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    /// Entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }
}

/// Two lower bounds `(B1, B2)` on the expected plug-in entropy of `n`
/// draws from `pmf`, with `B1 >= B2 = H - (|U| - 1) / n`.
pub fn empirical_entropy_lower(pmf: &PmfTable, n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(precondition("need at least one draw"));
    }
    let nf = n as f64;
    let h = pmf.entropy();
    let gap: f64 = pmf
        .probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|&p| p * ((1.0 - p) / (nf * p)).ln_1p())
        .sum();
    let b2 = h - (pmf.alphabet_size() as f64 - 1.0) / nf;
    Ok((h - gap, b2))
}

/// Lower bound on `E{X^s}` for `X > 0` from `m_t = E{X^t}` and
/// `m_t1 = E{X^(t+1)}`; requires `s - t <= 0` or `s - t >= 1`.
pub fn moment_two_point(m_t: f64, m_t1: f64, s: f64, t: f64) -> Result<BoundResult> {
    let d = s - t;
    if d > 0.0 && d < 1.0 {
        return Err(precondition(format!(
            "s - t = {d} lies in (0, 1), where x^(s-t) is concave"
        )));
    }
    if !(m_t > 0.0 && m_t1 > 0.0) {
        return Err(precondition(format!(
            "moments must be positive, got E X^t = {m_t}, E X^(t+1) = {m_t1}"
        )));
    }
    let value = (d * m_t1.ln() - (d - 1.0) * m_t.ln()).exp();
    BoundResult::new(value, Direction::Lower, Family::ProductConvexPositive)
        .param("a*", m_t1 / m_t)
        .validated()
}

/// `(2 - p)^(s-1) / p^s`, the two-moment estimate of `E{G^s}` for geometric `G`
/// with success probability `p` and `s` in `[1, 2]`.
///
/// Exact at `s = 1` and `s = 2`. For `s` strictly between, `x^(s-1)` is
/// concave and the value is an upper bound on `E{G^s}`, not a lower bound;
/// compare [`moment_two_point`], which refuses that range.
pub fn guessing_moment_lower(p: f64, s: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(precondition(format!("p must be in (0, 1], got {p}")));
    }
    if !(1.0..=2.0).contains(&s) {
        return Err(precondition(format!("s must be in [1, 2], got {s}")));
    }
    Ok(((s - 1.0) * (2.0 - p).ln() - s * p.ln()).exp())
}

/// `E{f(X) e^{sX}} >= f(psi'(s)) e^{psi(s)}`.
pub fn exp_tilted(
    f: &DifferentiableFunction,
    model: &DistributionModel,
    s: f64,
) -> Result<BoundResult> {
    require_convexity(f, "f", Convexity::Convex)?;
    let psi = model.cgf(s)?;
    let a = model.cgf_prime(s)?;
    let value = f.value(a)? * psi.exp();
    BoundResult::new(value, Direction::Lower, Family::ProductConvexPositive)
        .param("a*", a)
        .param("s", s)
        .validated()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{gaussian, point_mass};
    use crate::error::Error;
    use crate::funcs::catalog;
    use std::f64::consts::LN_2;

    #[test]
    fn neg_log_times_identity_on_two_points() {
        // X uniform on {1, 2}, g(x) = x: E g = 1.5, E Xg = 2.5
        let f = catalog("neg_log", &[]).unwrap();
        let r = product_convex_positive(&f, 1.5, 2.5).unwrap();
        let expect = 1.5 * -(5.0f64 / 3.0).ln();
        assert!((r.value - expect).abs() < 1e-15);
        assert!((r.value - (-0.7662)).abs() < 1e-4);
        // exact E{-X ln X} by enumeration
        let exact = 0.5 * -(1.0f64.ln()) + 0.5 * (-2.0 * 2.0f64.ln());
        assert!((exact + LN_2).abs() < 1e-15);
        assert!(r.value <= exact);
        assert_eq!(r.optimizer_value("a*"), Some(2.5 / 1.5));
    }

    #[test]
    fn constant_weight_is_jensen_and_point_mass_is_exact() {
        let f = catalog("neg_log", &[]).unwrap();
        assert_eq!(
            product_convex_positive(&f, 1.0, 3.0).unwrap().value,
            -3.0f64.ln()
        );
        // X = 2, g(x) = x: E g = 2, E Xg = 4
        let r = product_convex_positive(&f, 2.0, 4.0).unwrap();
        assert_eq!(r.value, -2.0 * 2.0f64.ln());
    }

    #[test]
    fn product_errors() {
        let f = catalog("neg_log", &[]).unwrap();
        assert!(matches!(
            product_convex_positive(&f, 0.0, 1.0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            product_convex_positive(&f, 1.0, -1.0),
            Err(Error::Domain { .. })
        ));
        let concave = catalog("power", &[0.5]).unwrap();
        assert!(matches!(
            product_convex_positive(&concave, 1.0, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn entropy_bounds_examples() {
        let p = PmfTable::from_probs(&[0.5, 0.5]).unwrap();
        let (b1, b2) = empirical_entropy_lower(&p, 100).unwrap();
        assert!((b1 - (LN_2 - 1.01f64.ln())).abs() < 1e-15);
        assert!((b1 - 0.68320).abs() < 1e-5);
        assert!((b2 - (LN_2 - 0.01)).abs() < 1e-15);
        assert!(b1 >= b2);

        let p = PmfTable::from_probs(&[1.0, 0.0, 0.0]).unwrap();
        let (b1, b2) = empirical_entropy_lower(&p, 50).unwrap();
        assert_eq!(b1, 0.0);
        assert!((b2 + 2.0 / 50.0).abs() < 1e-15);

        let p = PmfTable::from_probs(&[0.1, 0.2, 0.7]).unwrap();
        let (b1, b2) = empirical_entropy_lower(&p, 10_000_000).unwrap();
        assert!((b1 - p.entropy()).abs() < 1e-6 && (b2 - p.entropy()).abs() < 1e-6);
        assert!(empirical_entropy_lower(&p, 0).is_err());
    }

    #[test]
    fn pmf_table_validation() {
        assert!(PmfTable::from_probs(&[0.5, 0.4]).is_err());
        assert!(PmfTable::from_probs(&[1.5, -0.5]).is_err());
        assert!(PmfTable::new(vec!["a".into()], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn two_point_moment_examples() {
        // t = 1, s = 2 is exact
        assert_eq!(moment_two_point(1.5, 2.5, 2.0, 1.0).unwrap().value, 2.5);
        // t = 0, s = 2 is Jensen
        let r = moment_two_point(1.0, 1.5, 2.0, 0.0).unwrap();
        assert!((r.value - 2.25).abs() < 1e-15);
        // X uniform on {1, 2}, t = 1, s = 3
        let r = moment_two_point(1.5, 2.5, 3.0, 1.0).unwrap();
        assert!((r.value - 2.5 * 2.5 / 1.5).abs() < 1e-14);
        assert!(r.value <= 4.5);
        assert!(matches!(
            moment_two_point(1.0, 1.0, 1.5, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn guessing_examples() {
        for s in [1.0, 1.3, 2.0] {
            assert!((guessing_moment_lower(1.0, s).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((guessing_moment_lower(0.3, 1.0).unwrap() - 1.0 / 0.3).abs() < 1e-14);
        let v = guessing_moment_lower(0.3, 1.5).unwrap();
        assert!((v - 1.7f64.sqrt() / 0.3f64.powf(1.5)).abs() < 1e-12);
        assert!((v - 7.935).abs() < 1e-3);
        // exact E{G^1.5} for p = 0.3 is 7.48647
        let exact: f64 = (1..4000)
            .map(|k| (k as f64).powf(1.5) * 0.3 * 0.7f64.powi(k - 1))
            .sum();
        assert!(v > exact);
        assert!(guessing_moment_lower(0.0, 1.5).is_err());
        assert!(guessing_moment_lower(0.5, 2.5).is_err());
    }

    #[test]
    fn exp_tilted_examples() {
        let f = catalog("neg_log", &[]).unwrap();
        let g = gaussian(2.0, 1.0).unwrap();
        assert_eq!(exp_tilted(&f, &g, 0.0).unwrap().value, -2.0f64.ln());

        let sq = catalog("half_quadratic", &[2.0]).unwrap();
        let std = gaussian(0.0, 1.0).unwrap();
        let r = exp_tilted(&sq, &std, 1.0).unwrap();
        assert!((r.value - 0.5f64.exp()).abs() < 1e-15);

        let c = point_mass(1.7).unwrap();
        let r = exp_tilted(&sq, &c, 0.4).unwrap();
        assert!((r.value - 1.7 * 1.7 * (0.4f64 * 1.7).exp()).abs() < 1e-14);

        // psi'(s) outside the domain of f
        let neg = gaussian(-1.0, 1.0).unwrap();
        assert!(matches!(
            exp_tilted(&f, &neg, 0.0),
            Err(Error::Domain { .. })
        ));
    }
}
