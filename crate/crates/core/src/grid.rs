//! Parameter discretization shared by all families.

use crate::error::{Error, Result};

/// Equally spaced grid `theta_k = lo + (hi - lo) k / m` over the a priori
/// parameter range, extended past `k = m` and clamped at the supremum of
/// the full parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamGrid {
    lo: f64,
    hi: f64,
    m: u64,
    sup_theta: f64,
}

/// A fixed width expressed as a whole number of grid steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WidthSpec {
    /// Number of grid steps, `1 <= r <= m`.
    pub r: u64,
}

impl ParamGrid {
    /// Builds a grid; `sup_theta` may be `f64::INFINITY`.
    pub fn new(lo: f64, hi: f64, m: u64, sup_theta: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite"));
        }
        if hi <= lo {
            return Err(Error::InvalidGrid("upper bound must exceed lower bound"));
        }
        if m < 1 {
            return Err(Error::InvalidGrid("grid count must be at least 1"));
        }
        if sup_theta.is_nan() || sup_theta < hi {
            return Err(Error::InvalidGrid("parameter supremum below upper bound"));
        }
        Ok(Self {
            lo,
            hi,
            m,
            sup_theta,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Number of grid steps between `lo` and `hi`.
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn sup_theta(&self) -> f64 {
        self.sup_theta
    }

    /// Grid spacing `(hi - lo) / m`.
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.m as f64
    }

    /// `theta_k`, clamped at the parameter supremum.
    ///
    /// Nodes are computed with one multiply and one divide so that
    /// `theta_at(0) == lo` and `theta_at(m) == hi` exactly. Negative `k`
    /// continues the grid linearly below `lo`.
    pub fn theta_at(&self, k: i64) -> f64 {
        if k == self.m as i64 {
            return self.hi;
        }
        let raw = self.lo + (self.hi - self.lo) * (k as f64) / (self.m as f64);
        if raw > self.sup_theta {
            self.sup_theta
        } else {
            raw
        }
    }

    /// Width `(hi - lo) r / m` of a width index.
    pub fn width_of(&self, spec: WidthSpec) -> Result<f64> {
        if spec.r < 1 || spec.r > self.m {
            return Err(Error::WidthOutOfRange {
                r: spec.r,
                m: self.m,
            });
        }
        Ok((self.hi - self.lo) * spec.r as f64 / self.m as f64)
    }

    /// Converts a width to a whole number of steps when it is representable
    /// within `rel_tol` relative error. On failure returns the two nearest
    /// representable step counts.
    pub fn width_index(&self, width: f64, rel_tol: f64) -> core::result::Result<u64, (u64, u64)> {
        let exact = width * self.m as f64 / (self.hi - self.lo);
        let below = libm::floor(exact).max(0.0) as u64;
        let nearest = libm::round(exact).max(0.0) as u64;
        let rebuilt = (self.hi - self.lo) * nearest as f64 / self.m as f64;
        if nearest >= 1
            && nearest <= self.m
            && libm::fabs(rebuilt - width) <= rel_tol * libm::fabs(width)
        {
            Ok(nearest)
        } else {
            Err((below, below + 1))
        }
    }

    /// Smallest index whose node is at the parameter supremum, when the
    /// supremum is finite.
    pub fn sup_index(&self) -> Option<i64> {
        if !self.sup_theta.is_finite() {
            return None;
        }
        if self.sup_theta == self.hi {
            return Some(self.m as i64);
        }
        let exact = (self.sup_theta - self.lo) / self.step();
        Some(libm::ceil(exact) as i64)
    }
}
