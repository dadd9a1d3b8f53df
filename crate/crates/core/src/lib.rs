//! Jensen-like inequalities.
//!
//! The ordinary Jensen inequality comes from the tangent line of a convex
//! function at `E{X}`. When the convex function sits inside a larger
//! expression (a product, an exponential, a product of two convex functions)
//! the best tangency point usually moves, and optimizing it gives tighter,
//! sometimes reversed, bounds. This crate implements four such families:
//!
//! * [`bounds::product`]: `E{f(X) g(X)}` with `g >= 0`, optimum in closed form.
//! * [`bounds::composition`]: `E{exp f(X)}` through the cumulant generating function.
//! * [`bounds::tilted`]: `E{exp f(X) g(X)}`, which yields reverse bounds on
//!   `E{ln X}` (ergodic capacity) and on fractional moments.
//! * [`bounds::two_convex`]: `E{f(X) g(X)}` for two nonnegative convex
//!   (or two concave) functions using only the first two moments.
//!
//! Every bound is checked against independent oracles in
//! [`distributions::oracle`]: seeded Monte Carlo, adaptive quadrature and
//! brute-force discrete summation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod distributions;
pub mod error;
pub mod funcs;
pub mod interval;
pub mod optimize;
mod par;

pub use bounds::{BoundResult, Direction, Family, PmfTable};
pub use distributions::{DistributionModel, OracleEstimate, OracleMethod};
pub use error::{Error, Result};
pub use funcs::{Convexity, DifferentiableFunction};
pub use interval::{Interval, Support};
pub use optimize::{GridMax, GridMax2d, GridSpec, Refine};
