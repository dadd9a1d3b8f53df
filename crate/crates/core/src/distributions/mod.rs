//! Random-variable models with closed-form cumulant generating functions.
//!
//! Each model exposes `psi(s) = ln E{exp(s X)}` with its first two
//! derivatives on an explicit open domain. Calls outside the domain are
//! errors rather than silent infinities. The oracles used to check bounds
//! live in [`oracle`].

pub mod oracle;
pub mod quadrature;

use rand::Rng;
use rand_distr::{Binomial, ChiSquared, Distribution, Exp, Geometric, Normal};
use serde::{Deserialize, Serialize};

pub use oracle::{
    discrete_expectation, mc_expectation, plugin_entropy_mc, quad_expectation, OracleEstimate,
    OracleMethod, TailBound,
};

use crate::error::{config, Result};
use crate::interval::{Interval, Support};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Law {
    Gaussian {
        mu: f64,
        sigma2: f64,
    },
    /// Rate-`theta` exponential on `[0, inf)`.
    Exponential {
        theta: f64,
    },
    /// Sum of `n` iid Bernoulli(`p`), i.e. Binomial(n, p).
    BernoulliSum {
        n: u64,
        p: f64,
    },
    /// Number of trials up to and including the first success.
    Geometric {
        p: f64,
    },
    /// `1 + sum_{i<=k} Y_i^2` with `Y_i ~ N(0, sigma2)`.
    ShiftedChiSquareSum {
        k: u64,
        sigma2: f64,
    },
    /// `(mean of n samples - theta)^2` under the Gaussian model.
    SampleMeanSqError {
        n: u64,
        sigma2: f64,
    },
    PointMass {
        c: f64,
    },
    /// `c + b Y`.
    Affine {
        base: Box<DistributionModel>,
        c: f64,
        b: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionModel {
    name: String,
    law: Law,
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config(format!("{name} must be finite, got {v}")))
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn gaussian(mu: f64, sigma2: f64) -> Result<DistributionModel> {
    finite("mu", mu)?;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(config(format!(
            "gaussian variance must be positive, got {sigma2}"
        )));
    }
    Ok(DistributionModel::from_law(
        format!("gaussian({mu}, {sigma2})"),
        Law::Gaussian { mu, sigma2 },
    ))
}

pub fn exponential(theta: f64) -> Result<DistributionModel> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(config(format!(
            "exponential rate must be positive, got {theta}"
        )));
    }
    Ok(DistributionModel::from_law(
        format!("exponential({theta})"),
        Law::Exponential { theta },
    ))
}

pub fn bernoulli_sum(n: u64, p: f64) -> Result<DistributionModel> {
    if n == 0 {
        return Err(config("bernoulli_sum needs n >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(config(format!("bernoulli_sum needs p in (0, 1), got {p}")));
    }
    Ok(DistributionModel::from_law(
        format!("bernoulli_sum({n}, {p})"),
        Law::BernoulliSum { n, p },
    ))
}

pub fn geometric(p: f64) -> Result<DistributionModel> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(config(format!("geometric needs p in (0, 1], got {p}")));
    }
    Ok(DistributionModel::from_law(
        format!("geometric({p})"),
        Law::Geometric { p },
    ))
}

pub fn shifted_chi_square_sum(k: u64, sigma2: f64) -> Result<DistributionModel> {
    if k == 0 {
        return Err(config("shifted_chi_square_sum needs k >= 1"));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(config(format!("variance must be positive, got {sigma2}")));
    }
    Ok(DistributionModel::from_law(
        format!("shifted_chi_square_sum({k}, {sigma2})"),
        Law::ShiftedChiSquareSum { k, sigma2 },
    ))
}

pub fn sample_mean_sq_error(n: u64, sigma2: f64) -> Result<DistributionModel> {
    if n == 0 {
        return Err(config("sample_mean_sq_error needs n >= 1"));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(config(format!("variance must be positive, got {sigma2}")));
    }
    Ok(DistributionModel::from_law(
        format!("sample_mean_sq_error({n}, {sigma2})"),
        Law::SampleMeanSqError { n, sigma2 },
    ))
}

/// Deterministic `X = c`.
pub fn point_mass(c: f64) -> Result<DistributionModel> {
    finite("c", c)?;
    Ok(DistributionModel::from_law(
        format!("point_mass({c})"),
        Law::PointMass { c },
    ))
}

/// `X = c + b Y` for `Y ~ base`.
pub fn affine_of(base: &DistributionModel, c: f64, b: f64) -> Result<DistributionModel> {
    finite("c", c)?;
    finite("b", b)?;
    if b == 0.0 {
        return Err(config("affine_of with b = 0 is degenerate"));
    }
    Ok(DistributionModel::from_law(
        format!("{c} + {b} * {}", base.name),
        Law::Affine {
            base: Box::new(base.clone()),
            c,
            b,
        },
    ))
}

impl DistributionModel {
    fn from_law(name: String, law: Law) -> Self {
        DistributionModel { name, law }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn mean(&self) -> f64 {
        match &self.law {
            Law::Gaussian { mu, .. } => *mu,
            Law::Exponential { theta } => 1.0 / theta,
            Law::BernoulliSum { n, p } => *n as f64 * p,
            Law::Geometric { p } => 1.0 / p,
            Law::ShiftedChiSquareSum { k, sigma2 } => 1.0 + *k as f64 * sigma2,
            Law::SampleMeanSqError { n, sigma2 } => sigma2 / *n as f64,
            Law::PointMass { c } => *c,
            Law::Affine { base, c, b } => c + b * base.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.law {
            Law::Gaussian { sigma2, .. } => *sigma2,
            Law::Exponential { theta } => 1.0 / (theta * theta),
            Law::BernoulliSum { n, p } => *n as f64 * p * (1.0 - p),
            Law::Geometric { p } => (1.0 - p) / (p * p),
            Law::ShiftedChiSquareSum { k, sigma2 } => 2.0 * *k as f64 * sigma2 * sigma2,
            Law::SampleMeanSqError { n, sigma2 } => {
                let v = sigma2 / *n as f64;
                2.0 * v * v
            }
            Law::PointMass { .. } => 0.0,
            Law::Affine { base, b, .. } => b * b * base.variance(),
        }
    }

    /// Open interval on which the MGF is finite.
    pub fn cgf_domain(&self) -> Interval {
        match &self.law {
            Law::Gaussian { .. } | Law::BernoulliSum { .. } | Law::PointMass { .. } => {
                Interval::REAL_LINE
            }
            Law::Exponential { theta } => Interval::below(*theta),
            // -ln(1 - p), infinite at p = 1.
            Law::Geometric { p } => Interval::below(-(-p).ln_1p()),
            Law::ShiftedChiSquareSum { sigma2, .. } => Interval::below(0.5 / sigma2),
            Law::SampleMeanSqError { n, sigma2 } => Interval::below(*n as f64 / (2.0 * sigma2)),
            Law::Affine { base, b, .. } => base.cgf_domain().scaled_preimage(*b),
        }
    }

    pub fn support(&self) -> Support {
        match &self.law {
            Law::Gaussian { .. } => Support::new(f64::NEG_INFINITY, f64::INFINITY),
            Law::Exponential { .. } | Law::SampleMeanSqError { .. } => {
                Support::new(0.0, f64::INFINITY)
            }
            Law::BernoulliSum { n, .. } => Support::new(0.0, *n as f64),
            Law::Geometric { p } => {
                if *p == 1.0 {
                    Support::new(1.0, 1.0)
                } else {
                    Support::new(1.0, f64::INFINITY)
                }
            }
            Law::ShiftedChiSquareSum { .. } => Support::new(1.0, f64::INFINITY),
            Law::PointMass { c } => Support::new(*c, *c),
            Law::Affine { base, c, b } => base.support().affine_image(*c, *b),
        }
    }

    /// `psi(s) = ln E{exp(s X)}`.
    pub fn cgf(&self, s: f64) -> Result<f64> {
        let s = self.cgf_domain().check("s", s)?;
        Ok(self.cgf_unchecked(s))
    }

    pub fn cgf_prime(&self, s: f64) -> Result<f64> {
        let s = self.cgf_domain().check("s", s)?;
        Ok(self.cgf_prime_unchecked(s))
    }

    pub fn cgf_second(&self, s: f64) -> Result<f64> {
        let s = self.cgf_domain().check("s", s)?;
        Ok(self.cgf_second_unchecked(s))
    }

    /// MGF `phi(s) = exp(psi(s))`.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        self.cgf(s).map(f64::exp)
    }

    /// `phi'(s) = phi(s) psi'(s)`.
    pub fn mgf_prime(&self, s: f64) -> Result<f64> {
        Ok(self.mgf(s)? * self.cgf_prime(s)?)
    }

    /// `(psi(s), psi'(s))` or `None` outside the domain.
    pub(crate) fn try_cgf(&self, s: f64) -> Option<(f64, f64)> {
        if self.cgf_domain().contains(s) {
            Some((self.cgf_unchecked(s), self.cgf_prime_unchecked(s)))
        } else {
            None
        }
    }

    fn cgf_unchecked(&self, s: f64) -> f64 {
        match &self.law {
            Law::Gaussian { mu, sigma2 } => mu * s + 0.5 * sigma2 * s * s,
            Law::Exponential { theta } => -(-s / theta).ln_1p(),
            Law::BernoulliSum { n, p } => *n as f64 * log_add_exp(p.ln() + s, (-p).ln_1p()),
            Law::Geometric { p } => {
                if *p == 1.0 {
                    return s;
                }
                // ln p + s - ln(1 - q e^s)
                let lq_s = (-p).ln_1p() + s;
                p.ln() + s - (-(lq_s.exp_m1())).ln()
            }
            Law::ShiftedChiSquareSum { k, sigma2 } => {
                s - 0.5 * *k as f64 * (-2.0 * s * sigma2).ln_1p()
            }
            Law::SampleMeanSqError { n, sigma2 } => -0.5 * (-2.0 * s * sigma2 / *n as f64).ln_1p(),
            Law::PointMass { c } => c * s,
            Law::Affine { base, c, b } => c * s + base.cgf_unchecked(b * s),
        }
    }

    fn cgf_prime_unchecked(&self, s: f64) -> f64 {
        match &self.law {
            Law::Gaussian { mu, sigma2 } => mu + sigma2 * s,
            Law::Exponential { theta } => 1.0 / (theta - s),
            Law::BernoulliSum { n, p } => *n as f64 * logistic(s + p.ln() - (-p).ln_1p()),
            Law::Geometric { p } => {
                if *p == 1.0 {
                    return 1.0;
                }
                let lq_s = (-p).ln_1p() + s;
                1.0 / -(lq_s.exp_m1())
            }
            Law::ShiftedChiSquareSum { k, sigma2 } => {
                1.0 + *k as f64 * sigma2 / (1.0 - 2.0 * s * sigma2)
            }
            Law::SampleMeanSqError { n, sigma2 } => {
                let v = sigma2 / *n as f64;
                v / (1.0 - 2.0 * s * v)
            }
            Law::PointMass { c } => *c,
            Law::Affine { base, c, b } => c + b * base.cgf_prime_unchecked(b * s),
        }
    }

    fn cgf_second_unchecked(&self, s: f64) -> f64 {
        match &self.law {
            Law::Gaussian { sigma2, .. } => *sigma2,
            Law::Exponential { theta } => (theta - s).powi(-2),
            Law::BernoulliSum { n, p } => {
                let r = logistic(s + p.ln() - (-p).ln_1p());
                *n as f64 * r * (1.0 - r)
            }
            Law::Geometric { p } => {
                if *p == 1.0 {
                    return 0.0;
                }
                let lq_s = (-p).ln_1p() + s;
                let qe = lq_s.exp();
                qe / (lq_s.exp_m1()).powi(2)
            }
            Law::ShiftedChiSquareSum { k, sigma2 } => {
                2.0 * *k as f64 * sigma2 * sigma2 / (1.0 - 2.0 * s * sigma2).powi(2)
            }
            Law::SampleMeanSqError { n, sigma2 } => {
                let v = sigma2 / *n as f64;
                2.0 * v * v / (1.0 - 2.0 * s * v).powi(2)
            }
            Law::PointMass { .. } => 0.0,
            Law::Affine { base, b, .. } => b * b * base.cgf_second_unchecked(b * s),
        }
    }

    /// Draws one sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.law {
            Law::Gaussian { mu, sigma2 } => Normal::new(*mu, sigma2.sqrt())
                .expect("validated at construction")
                .sample(rng),
            Law::Exponential { theta } => Exp::new(*theta).expect("validated").sample(rng),
            Law::BernoulliSum { n, p } => {
                Binomial::new(*n, *p).expect("validated").sample(rng) as f64
            }
            Law::Geometric { p } => {
                if *p == 1.0 {
                    1.0
                } else {
                    // rand_distr counts failures before the first success.
                    Geometric::new(*p).expect("validated").sample(rng) as f64 + 1.0
                }
            }
            Law::ShiftedChiSquareSum { k, sigma2 } => {
                // sum of k squared N(0, sigma2) draws is sigma2 * chi^2_k
                let chi = ChiSquared::new(*k as f64).expect("validated").sample(rng);
                1.0 + sigma2 * chi
            }
            Law::SampleMeanSqError { n, sigma2 } => {
                let z: f64 = Normal::new(0.0, (sigma2 / *n as f64).sqrt())
                    .expect("validated")
                    .sample(rng);
                z * z
            }
            Law::PointMass { c } => *c,
            Law::Affine { base, c, b } => c + b * base.sample(rng),
        }
    }

    /// Density for continuous laws; `None` for discrete ones.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        match &self.law {
            Law::Gaussian { mu, sigma2 } => {
                let z = x - mu;
                Some((-0.5 * z * z / sigma2).exp() / (2.0 * std::f64::consts::PI * sigma2).sqrt())
            }
            Law::Exponential { theta } => Some(if x < 0.0 {
                0.0
            } else {
                theta * (-theta * x).exp()
            }),
            Law::Affine { base, c, b } => base.pdf((x - c) / b).map(|d| d / b.abs()),
            _ => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        match &self.law {
            Law::BernoulliSum { .. } | Law::Geometric { .. } | Law::PointMass { .. } => true,
            Law::Affine { base, .. } => base.is_discrete(),
            _ => false,
        }
    }

    /// Enumerates `(value, probability)` in increasing order of value for
    /// discrete laws. Binomial and point-mass streams are finite; the
    /// geometric stream is infinite.
    pub fn pmf_terms(&self) -> Option<Box<dyn Iterator<Item = (f64, f64)> + Send>> {
        match &self.law {
            Law::PointMass { c } => Some(Box::new(std::iter::once((*c, 1.0)))),
            Law::BernoulliSum { n, p } => Some(Box::new(binomial_pmf(*n, *p))),
            Law::Geometric { p } => {
                let p = *p;
                if p == 1.0 {
                    return Some(Box::new(std::iter::once((1.0, 1.0))));
                }
                let lq = (-p).ln_1p();
                Some(Box::new(
                    (1u64..).map(move |k| (k as f64, p * (lq * (k - 1) as f64).exp())),
                ))
            }
            Law::Affine { base, c, b } => {
                let (c, b) = (*c, *b);
                let terms = base.pmf_terms()?;
                if b > 0.0 {
                    Some(Box::new(terms.map(move |(v, pr)| (c + b * v, pr))))
                } else {
                    // Order is reversed; only finite streams can be collected.
                    let mut all: Vec<_> = terms.map(|(v, pr)| (c + b * v, pr)).collect();
                    all.reverse();
                    Some(Box::new(all.into_iter()))
                }
            }
            _ => None,
        }
    }
}

/// Binomial(n, p) probabilities computed in log space.
pub(crate) fn binomial_pmf(n: u64, p: f64) -> impl Iterator<Item = (f64, f64)> + Send {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let nf = n as f64;
    let mut log_choose = 0.0;
    (0..=n).map(move |k| {
        let kf = k as f64;
        if k > 0 {
            log_choose += (nf - kf + 1.0).ln() - kf.ln();
        }
        (kf, (log_choose + kf * lp + (nf - kf) * lq).exp())
    })
}
