use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An open interval `(lo, hi)`; either endpoint may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi, "empty interval ({lo}, {hi})");
        Interval { lo, hi }
    }

    pub fn above(lo: f64) -> Self {
        Interval::new(lo, f64::INFINITY)
    }

    pub fn below(hi: f64) -> Self {
        Interval::new(f64::NEG_INFINITY, hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Returns `x` unchanged when it is an interior point, a domain error otherwise.
    pub fn check(&self, what: &'static str, x: f64) -> Result<f64> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(Error::Domain {
                what,
                value: x,
                domain: *self,
            })
        }
    }

    /// Image of the interval under `x -> c + b x` (`b != 0`).
    pub fn affine_image(&self, c: f64, b: f64) -> Self {
        let (u, v) = (c + b * self.lo, c + b * self.hi);
        if b > 0.0 {
            Interval::new(u, v)
        } else {
            Interval::new(v, u)
        }
    }

    /// Preimage `{s : b s in self}` (`b != 0`).
    pub fn scaled_preimage(&self, b: f64) -> Self {
        let (u, v) = (self.lo / b, self.hi / b);
        if b > 0.0 {
            Interval::new(u, v)
        } else {
            Interval::new(v, u)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Closed support `[lo, hi]` of a random variable; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Support { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn affine_image(&self, c: f64, b: f64) -> Self {
        // 0 * inf is avoided by treating infinite endpoints separately.
        let map = |x: f64| {
            if x.is_infinite() {
                b.signum() * x
            } else {
                c + b * x
            }
        };
        let (u, v) = (map(self.lo), map(self.hi));
        if b > 0.0 {
            Support::new(u, v)
        } else {
            Support::new(v, u)
        }
    }
}
