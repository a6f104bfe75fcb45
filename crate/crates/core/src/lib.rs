//! Shortest fixed-width confidence intervals for a bounded parameter.
//!
//! The crate computes Push intervals: grid-valued, non-decreasing interval
//! functions `y -> [L(y), L(y) + w]` whose lower endpoint is pushed as far
//! right as the coverage requirement allows. Three statistic families ship:
//! binomial (smoothed by a uniform), hypergeometric (smoothed the same way)
//! and a normal mean with known standard deviation.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! threading live in the `pushci-cli` companion crate.
//!
//! ```
//! use pushci::{Family, ParamGrid, push, IntervalFunction};
//!
//! let family = Family::binomial(10).unwrap();
//! let grid = family.default_grid(1000).unwrap();
//! let result = push(family, grid, 320, 0.8).unwrap();
//! assert!(result.exists());
//! let f = IntervalFunction::from_push(&result).unwrap();
//! let (lo, hi) = f.interval_at(5.0);
//! assert!(lo <= 0.5 && 0.5 <= hi);
//! ```

#![cfg_attr(not(test), no_std)]
#![cfg_attr(test, allow(clippy::approx_constant))]

extern crate alloc;

pub mod coverage;
mod error;
pub mod families;
pub mod grid;
pub mod intervals;
pub mod push;
pub mod special;

pub use coverage::{
    exact_coverage, mc_coverage, midpoint_lemma_check, min_coverage, CoverageMethod,
    CoverageReport, EdgeRule,
};
pub use error::{Error, Result};
pub use families::{CountLaw, Family, StatLaw};
pub use grid::{ParamGrid, WidthSpec};
pub use intervals::{min_width, IntervalFunction, Provenance, RandomizationPolicy, Reported};
pub use push::{push, push_continuous, push_discrete, Binding, PushResult};
