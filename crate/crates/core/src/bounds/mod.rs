//! The four families of tangent-optimized bounds and their named instances.

pub mod composition;
pub mod product;
pub mod tilted;
pub mod two_convex;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use composition::{exp_of_convex, gaussian_exp_square};
pub use product::{
    empirical_entropy_lower, exp_tilted, guessing_moment_lower, moment_two_point,
    product_convex_positive, PmfTable,
};
pub use tilted::{
    estimation_error_moment_lower, exp_snr_capacity_lower, gap_factor_mu, log_expectation_lower,
    power_moment_lower, power_moment_lower_at, product_exp_composition, simo_capacity_lower,
};
pub use two_convex::{
    capacity_variance_upper, product_two_convex, product_two_convex_joint, Orientation,
};

use crate::error::{precondition, Error, Result};
use crate::funcs::{Convexity, DifferentiableFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lower,
    Upper,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `E{f(X) g(X)}` with `g >= 0`.
    ProductConvexPositive,
    /// `E{exp f(X)}`.
    ExpOfConvex,
    /// `E{exp f(X) g(X)}`.
    ProductExpComposition,
    /// `E{f(X) g(X)}` with both factors convex (or both concave).
    ProductTwoConvex,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::ProductConvexPositive => "product_convex_positive",
            Family::ExpOfConvex => "exp_of_convex",
            Family::ProductExpComposition => "product_exp_composition",
            Family::ProductTwoConvex => "product_two_convex",
        })
    }
}

/// A computed bound with the parameters that produced it.
///
/// Only valid bounds are ever returned: if a validity condition fails the
/// operation returns [`Error::Validity`] instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub direction: Direction,
    pub family: Family,
    /// Optimizing parameters (`a*`, `b*`, `alpha`, `s`, ...).
    pub optimizer: Vec<(String, f64)>,
    /// Validity conditions that were checked; all true.
    pub validity: Vec<(String, bool)>,
    /// Reference values and optimizer diagnostics (Jensen bound, heuristic
    /// parameter value, stationarity residual, skipped grid points).
    pub diagnostics: Vec<(String, f64)>,
    pub notes: String,
}

impl BoundResult {
    pub(crate) fn new(value: f64, direction: Direction, family: Family) -> Self {
        BoundResult {
            value,
            direction,
            family,
            optimizer: Vec::new(),
            validity: Vec::new(),
            diagnostics: Vec::new(),
            notes: String::new(),
        }
    }

    pub(crate) fn param(mut self, name: &str, v: f64) -> Self {
        self.optimizer.push((name.to_string(), v));
        self
    }

    pub(crate) fn diag(mut self, name: &str, v: f64) -> Self {
        self.diagnostics.push((name.to_string(), v));
        self
    }

    pub(crate) fn note(mut self, text: impl AsRef<str>) -> Self {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text.as_ref());
        self
    }

    pub(crate) fn check(mut self, name: &str, ok: bool) -> Self {
        self.validity.push((name.to_string(), ok));
        self
    }

    /// Converts the first failed validity flag into an error.
    pub(crate) fn validated(self) -> Result<Self> {
        if let Some((name, _)) = self.validity.iter().find(|(_, ok)| !ok) {
            return Err(Error::Validity(name.clone()));
        }
        if !self.value.is_finite() {
            return Err(Error::Validity(format!(
                "bound is not finite ({})",
                self.value
            )));
        }
        Ok(self)
    }

    pub fn optimizer_value(&self, name: &str) -> Option<f64> {
        lookup(&self.optimizer, name)
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        lookup(&self.diagnostics, name)
    }

    pub fn is_valid(&self) -> bool {
        self.validity.iter().all(|(_, ok)| *ok)
    }
}

fn lookup(list: &[(String, f64)], name: &str) -> Option<f64> {
    list.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
}

pub(crate) fn require_convexity(
    f: &DifferentiableFunction,
    role: &str,
    want: Convexity,
) -> Result<()> {
    if f.convexity() == want {
        return Ok(());
    }
    let hint = if f.convexity() == Convexity::Unknown {
        " (declare it with `with_convexity` if known)"
    } else {
        ""
    };
    Err(precondition(format!(
        "{role} `{}` must be {want:?} but is tagged {:?}{hint}",
        f.name(),
        f.convexity()
    )))
}
