//! Differentiable scalar functions and the catalog of convex/concave
//! building blocks the bounds are assembled from.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::interval::Interval;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convexity {
    Convex,
    Concave,
    Neither,
    Unknown,
}

/// A scalar function with its derivative on an open domain.
///
/// Values and derivatives are only defined strictly inside `domain`;
/// evaluating on or beyond an endpoint is a domain error.
#[derive(Clone)]
pub struct DifferentiableFunction {
    name: String,
    eval: ScalarFn,
    deriv: ScalarFn,
    second: Option<ScalarFn>,
    domain: Interval,
    convexity: Convexity,
}

impl fmt::Debug for DifferentiableFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DifferentiableFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("convexity", &self.convexity)
            .finish_non_exhaustive()
    }
}

impl DifferentiableFunction {
    /// A user-supplied function. Its convexity is [`Convexity::Unknown`]
    /// until declared with [`with_convexity`](Self::with_convexity); the
    /// bounds that need convexity refuse unknown functions.
    pub fn new<F, D>(name: impl Into<String>, domain: Interval, eval: F, deriv: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        DifferentiableFunction {
            name: name.into(),
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            second: None,
            domain,
            convexity: Convexity::Unknown,
        }
    }

    pub fn with_second_deriv<S>(mut self, second: S) -> Self
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.second = Some(Arc::new(second));
        self
    }

    /// Declares the curvature. This is the caller's assertion; nothing is inferred.
    pub fn with_convexity(mut self, convexity: Convexity) -> Self {
        self.convexity = convexity;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    pub fn has_second_deriv(&self) -> bool {
        self.second.is_some()
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.domain.check("x", x).map(|x| (self.eval)(x))
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        self.domain.check("x", x).map(|x| (self.deriv)(x))
    }

    /// `None` when no second derivative was supplied.
    pub fn second_deriv(&self, x: f64) -> Result<Option<f64>> {
        let x = self.domain.check("x", x)?;
        Ok(self.second.as_ref().map(|s| s(x)))
    }

    /// `(f(x), f'(x))`, or `None` outside the domain. Used inside grid
    /// objectives where infeasibility is a normal outcome.
    pub(crate) fn try_eval(&self, x: f64) -> Option<(f64, f64)> {
        if self.domain.contains(x) {
            Some(((self.eval)(x), (self.deriv)(x)))
        } else {
            None
        }
    }

    /// Relative mismatch between `deriv` and a central difference of `eval`
    /// at step `1e-6 * max(1, |x|)`.
    pub fn finite_difference_error(&self, x: f64) -> Result<f64> {
        let h = 1e-6 * x.abs().max(1.0);
        let d = self.deriv(x)?;
        let fd = (self.value(x + h)? - self.value(x - h)?) / (2.0 * h);
        Ok((d - fd).abs() / d.abs().max(1.0))
    }
}

/// The tangent line `x -> f(a) + f'(a) (x - a)`, defined on the whole line.
pub fn tangent_at(f: &DifferentiableFunction, a: f64) -> Result<DifferentiableFunction> {
    let fa = f.value(a)?;
    let slope = f.deriv(a)?;
    let name = format!("tangent of {} at {a}", f.name);
    Ok(DifferentiableFunction::new(
        name,
        Interval::REAL_LINE,
        move |x| fa + slope * (x - a),
        move |_| slope,
    )
    .with_second_deriv(|_| 0.0)
    .with_convexity(Convexity::Convex))
}

/// `x -> c + b x`. Affine functions are tagged convex.
pub fn affine(name: impl Into<String>, c: f64, b: f64) -> DifferentiableFunction {
    DifferentiableFunction::new(name, Interval::REAL_LINE, move |x| c + b * x, move |_| b)
        .with_second_deriv(|_| 0.0)
        .with_convexity(Convexity::Convex)
}

/// Looks up a catalog entry by name.
///
/// | name | params | function | domain |
/// |---|---|---|---|
/// | `neg_log` | | `-ln x` | `x > 0` |
/// | `x_log_x` | | `x ln x` | `x > 0` |
/// | `power` | `t` | `x^t` | `x > 0` |
/// | `exp_scale` | `s` | `e^{s x}` | all |
/// | `half_quadratic` | `s` | `s x^2 / 2` | all |
/// | `log1p_gain` | `g > 0` | `ln(1 + g x)` | `x > -1/g` |
/// | `log1p_gain_squared` | `g > 0` | `ln^2(1 + g x)` | `x > -1/g` |
/// | `scaled_neg_log` | `s` | `-s ln x` | `x > 0` |
/// | `constant` | `c` | `c` | all |
pub fn catalog(name: &str, params: &[f64]) -> Result<DifferentiableFunction> {
    let arity = |n: usize| -> Result<()> {
        if params.len() != n {
            return Err(config(format!(
                "`{name}` takes {n} parameter(s), got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(config(format!("`{name}` parameters must be finite")));
        }
        Ok(())
    };
    let positive = Interval::above(0.0);
    let f = match name {
        "neg_log" => {
            arity(0)?;
            DifferentiableFunction::new(name, positive, |x| -x.ln(), |x| -1.0 / x)
                .with_second_deriv(|x| 1.0 / (x * x))
                .with_convexity(Convexity::Convex)
        }
        "x_log_x" => {
            arity(0)?;
            DifferentiableFunction::new(name, positive, |x| x * x.ln(), |x| x.ln() + 1.0)
                .with_second_deriv(|x| 1.0 / x)
                .with_convexity(Convexity::Convex)
        }
        "power" => {
            arity(1)?;
            let t = params[0];
            let convexity = if t <= 0.0 || t >= 1.0 {
                Convexity::Convex
            } else {
                Convexity::Concave
            };
            DifferentiableFunction::new(
                format!("power({t})"),
                positive,
                move |x| x.powf(t),
                move |x| t * x.powf(t - 1.0),
            )
            .with_second_deriv(move |x| t * (t - 1.0) * x.powf(t - 2.0))
            .with_convexity(convexity)
        }
        "exp_scale" => {
            arity(1)?;
            let s = params[0];
            DifferentiableFunction::new(
                format!("exp_scale({s})"),
                Interval::REAL_LINE,
                move |x| (s * x).exp(),
                move |x| s * (s * x).exp(),
            )
            .with_second_deriv(move |x| s * s * (s * x).exp())
            .with_convexity(Convexity::Convex)
        }
        "half_quadratic" => {
            arity(1)?;
            let s = params[0];
            DifferentiableFunction::new(
                format!("half_quadratic({s})"),
                Interval::REAL_LINE,
                move |x| 0.5 * s * x * x,
                move |x| s * x,
            )
            .with_second_deriv(move |_| s)
            .with_convexity(if s >= 0.0 {
                Convexity::Convex
            } else {
                Convexity::Concave
            })
        }
        "log1p_gain" | "log1p_gain_squared" => {
            arity(1)?;
            let g = params[0];
            if g <= 0.0 {
                return Err(config(format!("`{name}` needs a positive gain, got {g}")));
            }
            let domain = Interval::above(-1.0 / g);
            if name == "log1p_gain" {
                DifferentiableFunction::new(
                    format!("log1p_gain({g})"),
                    domain,
                    move |x| (g * x).ln_1p(),
                    move |x| g / (1.0 + g * x),
                )
                .with_second_deriv(move |x| -g * g / (1.0 + g * x).powi(2))
                .with_convexity(Convexity::Concave)
            } else {
                DifferentiableFunction::new(
                    format!("log1p_gain_squared({g})"),
                    domain,
                    move |x| (g * x).ln_1p().powi(2),
                    move |x| 2.0 * g * (g * x).ln_1p() / (1.0 + g * x),
                )
                .with_second_deriv(move |x| {
                    2.0 * g * g * (1.0 - (g * x).ln_1p()) / (1.0 + g * x).powi(2)
                })
                .with_convexity(Convexity::Neither)
            }
        }
        "scaled_neg_log" => {
            arity(1)?;
            let s = params[0];
            DifferentiableFunction::new(
                format!("scaled_neg_log({s})"),
                positive,
                move |x| -s * x.ln(),
                move |x| -s / x,
            )
            .with_second_deriv(move |x| s / (x * x))
            .with_convexity(if s >= 0.0 {
                Convexity::Convex
            } else {
                Convexity::Concave
            })
        }
        "constant" => {
            arity(1)?;
            affine(format!("constant({})", params[0]), params[0], 0.0)
        }
        other => return Err(config(format!("unknown catalog function `{other}`"))),
    };
    Ok(f)
}
