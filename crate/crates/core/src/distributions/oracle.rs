//! Ground-truth expectations used to audit the bounds: seeded Monte Carlo,
//! adaptive quadrature and truncated discrete summation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::quadrature;
use super::DistributionModel;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    MonteCarlo,
    Quadrature,
    DiscreteSum,
    ClosedForm,
}

/// An expectation estimate with its uncertainty.
///
/// `uncertainty` is one standard error for Monte Carlo, an absolute error
/// bound for quadrature and discrete sums, and zero for closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub value: f64,
    pub uncertainty: f64,
    pub method: OracleMethod,
    pub samples_or_nodes: u64,
}

impl OracleEstimate {
    pub fn closed_form(value: f64) -> Self {
        OracleEstimate {
            value,
            uncertainty: 0.0,
            method: OracleMethod::ClosedForm,
            samples_or_nodes: 0,
        }
    }

    /// `value - z * uncertainty <= x`, i.e. `x` is not significantly below the estimate.
    pub fn admits_upper(&self, x: f64, z: f64) -> bool {
        x >= self.value - z * self.uncertainty
    }

    /// `x <= value + z * uncertainty`.
    pub fn admits_lower(&self, x: f64, z: f64) -> bool {
        x <= self.value + z * self.uncertainty
    }
}

/// Samples per independent random stream. Changing it changes every
/// Monte Carlo result, so it is fixed.
const CHUNK: u64 = 1 << 14;

#[derive(Clone, Copy)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    // Chan et al. pairwise combination.
    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }
}

/// Monte Carlo estimate of `E{h(X)}`.
///
/// Sample `i` comes from stream `i / 2^14` of a ChaCha8 generator keyed by
/// `seed`, and per-stream statistics are merged in stream order, so the
/// result is bit-identical for a given `(seed, n_samples)` however the work
/// is scheduled.
pub fn mc_expectation<H>(
    model: &DistributionModel,
    h: H,
    n_samples: u64,
    seed: u64,
) -> Result<OracleEstimate>
where
    H: Fn(f64) -> f64 + Sync + Send,
{
    chunked_mc(n_samples, seed, |rng| {
        let x = model.sample(rng);
        let y = h(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Oracle(format!(
                "h({x}) = {y} is not finite (model {})",
                model.name()
            )))
        }
    })
}

/// Monte Carlo estimate of the expected plug-in entropy (nats) of `n`
/// draws from `probs`, over `trials` independent repetitions.
///
/// Letter counts are drawn as a chain of conditional binomials, so the
/// cost per trial is linear in the alphabet size rather than in `n`.
/// Streams and merging follow [`mc_expectation`].
pub fn plugin_entropy_mc(probs: &[f64], n: u64, trials: u64, seed: u64) -> Result<OracleEstimate> {
    if n == 0 || probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::Precondition(format!(
            "need n >= 1 and a nonnegative pmf, got n = {n}, {probs:?}"
        )));
    }
    let nf = n as f64;
    chunked_mc(trials, seed, |rng| {
        let (mut left, mut mass, mut h) = (n, 1.0f64, 0.0);
        for &p in probs {
            if left == 0 {
                break;
            }
            let q = (p / mass).clamp(0.0, 1.0);
            let count = Binomial::new(left, q)
                .map_err(|e| Error::Oracle(format!("binomial({left}, {q}): {e}")))?
                .sample(rng);
            if count > 0 {
                let f = count as f64 / nf;
                h -= f * f.ln();
            }
            left -= count;
            mass -= p;
        }
        Ok(h)
    })
}

fn chunked_mc<F>(n_samples: u64, seed: u64, draw: F) -> Result<OracleEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync + Send,
{
    if n_samples < 2 {
        return Err(Error::Precondition(format!(
            "Monte Carlo needs at least 2 samples, got {n_samples}"
        )));
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let partials = par::map_indexed(chunks as usize, |c| -> Result<Moments> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = CHUNK.min(n_samples - c as u64 * CHUNK);
        let mut acc = Moments {
            n: 0,
            mean: 0.0,
            m2: 0.0,
        };
        for _ in 0..count {
            let y = draw(&mut rng)?;
            acc.n += 1;
            let d = y - acc.mean;
            acc.mean += d / acc.n as f64;
            acc.m2 += d * (y - acc.mean);
        }
        Ok(acc)
    });
    let mut total = Moments {
        n: 0,
        mean: 0.0,
        m2: 0.0,
    };
    for part in partials {
        total = total.merge(part?);
    }
    let var = total.m2 / (total.n - 1) as f64;
    Ok(OracleEstimate {
        value: total.mean,
        uncertainty: (var / total.n as f64).sqrt(),
        method: OracleMethod::MonteCarlo,
        samples_or_nodes: total.n,
    })
}

/// Quadrature estimate of `∫ h(x) density(x) dx` over `[lo, hi]`.
///
/// The density is first checked to integrate to one within `tol`.
pub fn quad_expectation<D, H>(
    density: D,
    support: (f64, f64),
    h: H,
    tol: f64,
) -> Result<OracleEstimate>
where
    D: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let (lo, hi) = support;
    let mass = quadrature::integrate(&density, lo, hi, tol * 0.1)?;
    if (mass.value - 1.0).abs() > tol {
        return Err(Error::Oracle(format!(
            "density integrates to {} over [{lo}, {hi}], not 1",
            mass.value
        )));
    }
    let r = quadrature::integrate(
        |x| {
            let d = density(x);
            if d == 0.0 {
                0.0
            } else {
                h(x) * d
            }
        },
        lo,
        hi,
        tol,
    )?;
    Ok(OracleEstimate {
        value: r.value,
        uncertainty: r.abs_error,
        method: OracleMethod::Quadrature,
        samples_or_nodes: r.evaluations as u64,
    })
}

/// How the unenumerated remainder of a discrete sum is controlled.
pub enum TailBound<'a> {
    /// The enumeration is finite.
    Finite,
    /// Given the number `k` of terms already summed and the residual
    /// probability mass, returns an upper bound on `|sum of h * p|` over
    /// the terms not yet enumerated.
    Envelope(Box<dyn Fn(u64, f64) -> f64 + 'a>),
    Unavailable,
}

impl<'a> TailBound<'a> {
    /// Remainder bound for `h` with `|h| <= sup_abs_h` on the whole support.
    pub fn bounded(sup_abs_h: f64) -> Self {
        TailBound::Envelope(Box::new(move |_, mass| mass.max(0.0) * sup_abs_h))
    }

    /// Remainder bound for `h(k) = k^s` under a geometric(`p`) law on
    /// `{1, 2, ...}`, from the ratio of consecutive terms.
    pub fn geometric_power(p: f64, s: f64) -> Self {
        let lq = (-p).ln_1p();
        TailBound::Envelope(Box::new(move |k, _| {
            if p == 1.0 {
                return 0.0;
            }
            let next = (k + 1) as f64;
            let first = next.powf(s) * p * (lq * k as f64).exp();
            let growth = ((next + 1.0) / next).powf(s).max(1.0);
            let ratio = growth * lq.exp();
            if ratio < 1.0 {
                first / (1.0 - ratio)
            } else {
                f64::INFINITY
            }
        }))
    }
}

/// Upper limit on enumerated terms; a tail that has not shrunk below the
/// tolerance by then is reported as an error.
const MAX_TERMS: u64 = 100_000_000;

/// `sum h(v) p` over an enumerated pmf, truncated once the tail bound drops
/// below `tail_tol`.
pub fn discrete_expectation<I, H>(
    pmf: I,
    h: H,
    tail: TailBound<'_>,
    tail_tol: f64,
) -> Result<OracleEstimate>
where
    I: IntoIterator<Item = (f64, f64)>,
    H: Fn(f64) -> f64,
{
    let terms = pmf.into_iter();
    let infinite = terms.size_hint().1.is_none();
    if infinite && !matches!(tail, TailBound::Envelope(_)) {
        return Err(Error::Oracle(
            "infinite support requires a tail bound".to_string(),
        ));
    }
    let (mut sum, mut comp, mut mass, mut k) = (0.0f64, 0.0f64, 0.0f64, 0u64);
    let mut remainder = 0.0;
    for (v, p) in terms {
        if p < 0.0 || !p.is_finite() {
            return Err(Error::Oracle(format!("invalid probability {p} at {v}")));
        }
        if p > 0.0 {
            let y = h(v) * p;
            if !y.is_finite() {
                return Err(Error::Oracle(format!("h({v}) * {p} is not finite")));
            }
            // Kahan summation
            let t = y - comp;
            let s = sum + t;
            comp = (s - sum) - t;
            sum = s;
        }
        mass += p;
        k += 1;
        if let TailBound::Envelope(bound) = &tail {
            let b = bound(k, 1.0 - mass);
            if b < tail_tol {
                remainder = b;
                break;
            }
        }
        if k >= MAX_TERMS {
            return Err(Error::Oracle(format!(
                "tail bound still above {tail_tol:e} after {k} terms"
            )));
        }
    }
    Ok(OracleEstimate {
        value: sum,
        uncertainty: remainder + f64::EPSILON * sum.abs() * (k as f64).sqrt(),
        method: OracleMethod::DiscreteSum,
        samples_or_nodes: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{
        bernoulli_sum, exponential, gaussian, geometric, shifted_chi_square_sum,
    };

    #[test]
    fn mc_estimates_mean_and_second_moment() {
        let m = gaussian(1.0, 0.25).unwrap();
        let est = mc_expectation(&m, |x| x, 1_000_000, 3).unwrap();
        assert!((est.value - 1.0).abs() < 5.0 * est.uncertainty);
        assert!((est.uncertainty - 0.5 / 1000.0).abs() < 1e-5);

        let m = gaussian(0.0, 1.0).unwrap();
        let est = mc_expectation(&m, |x| x * x, 1_000_000, 3).unwrap();
        assert!((est.value - 1.0).abs() < 5.0 * est.uncertainty);
    }

    #[test]
    fn mc_is_deterministic() {
        let m = shifted_chi_square_sum(4, 1.0).unwrap();
        let a = mc_expectation(&m, f64::ln, 100_003, 11).unwrap();
        let b = mc_expectation(&m, f64::ln, 100_003, 11).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.uncertainty.to_bits(), b.uncertainty.to_bits());
        let c = mc_expectation(&m, f64::ln, 100_003, 12).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn mc_reports_non_finite_samples() {
        let m = gaussian(0.0, 1.0).unwrap();
        let err = mc_expectation(&m, f64::ln, 1000, 1).unwrap_err();
        assert!(matches!(err, Error::Oracle(_)));
        assert!(mc_expectation(&m, |x| x, 1, 1).is_err());
    }

    #[test]
    fn quadrature_on_exponential() {
        let m = exponential(2.0).unwrap();
        let dens = |x| m.pdf(x).unwrap();
        let one = quad_expectation(dens, (0.0, f64::INFINITY), |_| 1.0, 1e-10).unwrap();
        assert!((one.value - 1.0).abs() <= 1e-10);
        let mean = quad_expectation(dens, (0.0, f64::INFINITY), |z| z, 1e-10).unwrap();
        assert!((mean.value - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn quadrature_agrees_with_monte_carlo() {
        let m = exponential(1.0).unwrap();
        let h = |z: f64| (5.0 * z).ln_1p();
        let q = quad_expectation(|x| m.pdf(x).unwrap(), (0.0, f64::INFINITY), h, 1e-9).unwrap();
        let mc = mc_expectation(&m, h, 400_000, 5).unwrap();
        assert!((q.value - mc.value).abs() < 5.0 * (mc.uncertainty + q.uncertainty));
    }

    #[test]
    fn quadrature_rejects_unnormalized_density() {
        let err = quad_expectation(|x: f64| 2.0 * (-x).exp(), (0.0, f64::INFINITY), |x| x, 1e-8)
            .unwrap_err();
        assert!(matches!(err, Error::Oracle(_)));
    }

    #[test]
    fn discrete_sums() {
        let b = bernoulli_sum(5, 0.2).unwrap();
        let est =
            discrete_expectation(b.pmf_terms().unwrap(), |x| x, TailBound::Finite, 0.0).unwrap();
        assert!((est.value - 1.0).abs() < 1e-14);

        let g = geometric(1.0).unwrap();
        let est = discrete_expectation(g.pmf_terms().unwrap(), |x| 7.0 * x, TailBound::Finite, 0.0)
            .unwrap();
        assert_eq!(est.value, 7.0);
    }

    #[test]
    fn geometric_series_with_tail_bound() {
        let p = 0.3;
        let g = geometric(p).unwrap();
        let est = discrete_expectation(
            g.pmf_terms().unwrap(),
            |k| k.powf(1.5),
            TailBound::geometric_power(p, 1.5),
            1e-10,
        )
        .unwrap();
        assert!(est.uncertainty < 1e-9);
        let brute: f64 = (1..4000)
            .map(|k| (k as f64).powf(1.5) * p * (1.0 - p).powi(k - 1))
            .sum();
        assert!((est.value - brute).abs() < 1e-9);
        assert!((est.value - 7.486_47).abs() < 1e-5);
        // E G = 1/p and E G^2 = (2 - p)/p^2 from the same machinery
        let mean = discrete_expectation(
            g.pmf_terms().unwrap(),
            |k| k,
            TailBound::geometric_power(p, 1.0),
            1e-12,
        )
        .unwrap();
        assert!((mean.value - 1.0 / p).abs() < 1e-10);
        let second = discrete_expectation(
            g.pmf_terms().unwrap(),
            |k| k * k,
            TailBound::geometric_power(p, 2.0),
            1e-12,
        )
        .unwrap();
        assert!((second.value - (2.0 - p) / (p * p)).abs() < 1e-9);
    }

    #[test]
    fn infinite_support_without_tail_bound_fails() {
        let g = geometric(0.5).unwrap();
        let err = discrete_expectation(g.pmf_terms().unwrap(), |k| k, TailBound::Unavailable, 1e-8)
            .unwrap_err();
        assert!(matches!(err, Error::Oracle(_)));
        let g = geometric(0.5).unwrap();
        assert!(
            discrete_expectation(g.pmf_terms().unwrap(), |k| k, TailBound::Finite, 1e-8).is_err()
        );
    }

    #[test]
    fn bounded_envelope_truncates() {
        let g = geometric(0.5).unwrap();
        let est = discrete_expectation(
            g.pmf_terms().unwrap(),
            |k| 1.0 / k,
            TailBound::bounded(1.0),
            1e-12,
        )
        .unwrap();
        // E{1/G} = p ln(1/p) / (1 - p) = ln 2 for p = 1/2
        assert!((est.value - std::f64::consts::LN_2).abs() < 2e-12);
    }

    #[test]
    fn plugin_entropy_simulation() {
        let a = plugin_entropy_mc(&[0.3, 0.7], 100, 20_000, 5).unwrap();
        assert_eq!(a, plugin_entropy_mc(&[0.3, 0.7], 100, 20_000, 5).unwrap());
        let h = -(0.3f64 * 0.3f64.ln() + 0.7 * 0.7f64.ln());
        assert!(a.value < h && a.value > h - 0.02);
        let sure = plugin_entropy_mc(&[0.0, 1.0, 0.0], 10, 100, 1).unwrap();
        assert_eq!((sure.value, sure.uncertainty), (0.0, 0.0));
        assert!(plugin_entropy_mc(&[0.5, 0.5], 0, 100, 1).is_err());
    }
}
