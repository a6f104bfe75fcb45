//! The Push recursions.
//!
//! Breakpoints `y_{-r}, ..., y_{m+1}` are the generalized inverses of the
//! lower endpoint: the interval is `[theta_k, theta_{k+r}]` on
//! `y_k <= y < y_{k+1}`. Each `y_k` is pushed as far right as the coverage
//! constraints at the neighbouring grid nodes allow.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::families::{Family, StatLaw};
use crate::grid::ParamGrid;

/// Which term of the recursion produced a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Binding {
    /// Initial value, `k <= 0`.
    Start,
    /// `y_k = y_{k-1}`.
    Carry,
    /// Quantile term at `theta_{k-1}`.
    PreviousNode,
    /// Quantile term at `theta_k` (continuous parameter only).
    CurrentNode,
    /// A quantile argument exceeded one; the breakpoint is infinite.
    Overflow,
}

/// Tolerance below which a quantile argument above one is read as exactly one.
pub const OVERFLOW_TOLERANCE: f64 = 1e-15;

/// True when `gamma + F(y)` exceeds one, in which case the quantile term
/// and every later breakpoint are infinite.
pub fn argument_overflows(beta: f64) -> bool {
    beta - OVERFLOW_TOLERANCE > 1.0
}

fn pushed_quantile(law: &StatLaw, gamma: f64, back: f64) -> f64 {
    let beta = gamma + law.cdf(back);
    if argument_overflows(beta) {
        f64::INFINITY
    } else {
        law.quantile(beta.min(1.0))
    }
}

fn pick(carry: f64, previous: f64, current: Option<f64>) -> (f64, Binding) {
    let current = current.unwrap_or(f64::NEG_INFINITY);
    let y = carry.max(previous).max(current);
    let binding = if y == f64::INFINITY {
        Binding::Overflow
    } else if current >= previous && current >= carry {
        Binding::CurrentNode
    } else if previous >= carry {
        Binding::PreviousNode
    } else {
        Binding::Carry
    };
    (y, binding)
}

/// Output of one Push recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct PushResult {
    grid: ParamGrid,
    family: Family,
    r: u64,
    gamma: f64,
    // y_k stored at k + r, for k in -r..=m+1
    ys: Vec<f64>,
    binding: Vec<Binding>,
    exists: bool,
}

fn validate(grid: &ParamGrid, r: u64, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidLevel(gamma));
    }
    if r < 1 || r > grid.m() {
        return Err(Error::WidthOutOfRange { r, m: grid.m() });
    }
    Ok(())
}

/// Runs the recursion matching the family: discrete for the hypergeometric,
/// continuous otherwise.
pub fn push(family: Family, grid: ParamGrid, r: u64, gamma: f64) -> Result<PushResult> {
    if family.has_discrete_parameter() {
        push_discrete(family, grid, r, gamma)
    } else {
        push_continuous(family, grid, r, gamma)
    }
}

/// `y_k = y_{k-1} v F_{k-1}^{-1}(gamma + F_{k-1}(y_{k-r})) v F_k^{-1}(gamma + F_k(y_{k-r}))`.
pub fn push_continuous(family: Family, grid: ParamGrid, r: u64, gamma: f64) -> Result<PushResult> {
    validate(&grid, r, gamma)?;
    if family.has_discrete_parameter() {
        return Err(Error::RecursionMismatch("continuous"));
    }
    let mut state = PushResult::initial(family, grid, r, gamma);
    let m = grid.m() as i64;
    let mut law_prev = family.law_at(&grid, 0);
    for k in 1..=m {
        let law_cur = family.law_at(&grid, k);
        let back = state.y(k - r as i64);
        let carry = state.y(k - 1);
        let previous = pushed_quantile(&law_prev, gamma, back);
        let current = pushed_quantile(&law_cur, gamma, back);
        let (y, binding) = pick(carry, previous, Some(current));
        state.set(k, y, binding);
        if y == f64::INFINITY {
            state.abort_from(k);
            return Ok(state);
        }
        law_prev = law_cur;
    }
    state.exists = true;
    Ok(state)
}

/// `y_k = y_{k-1} v F_{k-1}^{-1}(gamma + F_{k-1}(y_{k-r-1}))`, for a grid of
/// the parameter values themselves.
pub fn push_discrete(family: Family, grid: ParamGrid, r: u64, gamma: f64) -> Result<PushResult> {
    validate(&grid, r, gamma)?;
    match family {
        Family::Hypergeometric { .. } => {
            if family.default_grid(grid.m())? != grid {
                return Err(Error::RecursionMismatch("discrete"));
            }
        }
        _ => return Err(Error::RecursionMismatch("discrete")),
    }
    let mut state = PushResult::initial(family, grid, r, gamma);
    let m = grid.m() as i64;
    for k in 1..=m {
        let law_prev = family.law_at(&grid, k - 1);
        let back = state.y(k - r as i64 - 1);
        let carry = state.y(k - 1);
        let previous = pushed_quantile(&law_prev, gamma, back);
        let (y, binding) = pick(carry, previous, None);
        state.set(k, y, binding);
        if y == f64::INFINITY {
            state.abort_from(k);
            return Ok(state);
        }
    }
    state.exists = true;
    Ok(state)
}

impl PushResult {
    fn initial(family: Family, grid: ParamGrid, r: u64, gamma: f64) -> Self {
        let m = grid.m() as usize;
        let r_us = r as usize;
        let mut ys = vec![family.statistic_inf(); m + r_us + 2];
        ys[m + r_us + 1] = f64::INFINITY;
        let mut binding = vec![Binding::Start; m + 1];
        binding[0] = Binding::Start;
        Self {
            grid,
            family,
            r,
            gamma,
            ys,
            binding,
            exists: false,
        }
    }

    fn set(&mut self, k: i64, y: f64, binding: Binding) {
        self.ys[(k + self.r as i64) as usize] = y;
        self.binding[k as usize] = binding;
    }

    fn abort_from(&mut self, k: i64) {
        let m = self.grid.m() as i64;
        for j in k..=m {
            self.set(j, f64::INFINITY, Binding::Overflow);
        }
        self.exists = false;
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Width index.
    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Width `(hi - lo) r / m`.
    pub fn width(&self) -> f64 {
        (self.grid.hi() - self.grid.lo()) * self.r as f64 / self.grid.m() as f64
    }

    /// True when `y_m` is finite.
    pub fn exists(&self) -> bool {
        self.exists
    }

    /// Breakpoint `y_k` for `-r <= k <= m + 1`.
    pub fn y(&self, k: i64) -> f64 {
        let idx = k + self.r as i64;
        assert!(
            idx >= 0 && (idx as usize) < self.ys.len(),
            "breakpoint index {k} out of range"
        );
        self.ys[idx as usize]
    }

    /// All breakpoints `y_{-r}, ..., y_{m+1}`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.ys
    }

    /// Binding term at `0 <= k <= m`.
    pub fn binding(&self, k: i64) -> Binding {
        self.binding[k as usize]
    }

    /// Index offset of `y_k` used by the recursion at step `k`.
    pub fn lookback(&self) -> i64 {
        if self.family.has_discrete_parameter() {
            self.r as i64 + 1
        } else {
            self.r as i64
        }
    }

    /// Re-evaluates the recursion right-hand side at `1 <= k <= m` on the
    /// stored sequence.
    pub fn recompute(&self, k: i64) -> (f64, Binding) {
        let back = self.y(k - self.lookback());
        let carry = self.y(k - 1);
        let law_prev = self.family.law_at(&self.grid, k - 1);
        let previous = pushed_quantile(&law_prev, self.gamma, back);
        let current = if self.family.has_discrete_parameter() {
            None
        } else {
            let law_cur = self.family.law_at(&self.grid, k);
            Some(pushed_quantile(&law_cur, self.gamma, back))
        };
        pick(carry, previous, current)
    }

    /// For a breakpoint bound by a quantile term, the binding grid index `j`
    /// and the probability `F_j(y_k) - F_j(y_{k - lookback})`, which equals
    /// the level.
    pub fn binding_constraint(&self, k: i64) -> Option<(i64, f64)> {
        let j = match self.binding(k) {
            Binding::PreviousNode => k - 1,
            Binding::CurrentNode => k,
            _ => return None,
        };
        let law = self.family.law_at(&self.grid, j);
        let mass = law.cdf(self.y(k)) - law.cdf(self.y(k - self.lookback()));
        Some((j, mass))
    }

    /// Grid indices `(k, k + r)` of the interval at `y`: `k` is the largest
    /// index with `y_k <= y`.
    pub fn interval_indices_at(&self, y: f64) -> Result<(i64, i64)> {
        if !self.exists {
            return Err(Error::NotExists);
        }
        let m = self.grid.m() as i64;
        // y_0..=y_m occupy ys[r..=r+m]
        let r = self.r as usize;
        let nodes = &self.ys[r..=r + m as usize];
        let count = nodes.partition_point(|&b| b <= y);
        let k = if count == 0 { 0 } else { count as i64 - 1 };
        Ok((k, k + self.r as i64))
    }

    /// `[L*(y), R*(y)] = [theta_k, theta_{k+r}]`, the right end clamped at the
    /// parameter supremum.
    pub fn interval_at(&self, y: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.interval_indices_at(y)?;
        Ok((self.grid.theta_at(lo), self.grid.theta_at(hi)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_hypergeometric_by_hand() {
        let family = Family::hypergeometric(1, 2).unwrap();
        let grid = family.default_grid(2).unwrap();
        let res = push_discrete(family, grid, 1, 0.5).unwrap();
        assert!(res.exists());
        assert_eq!(res.y(0), -0.5);
        assert!((res.y(1) - 0.0).abs() < 1e-12);
        assert!((res.y(2) - 0.5).abs() < 1e-12);
        assert_eq!(res.y(3), f64::INFINITY);
        assert_eq!(res.interval_at(-0.3).unwrap(), (0.0, 1.0));
        assert_eq!(res.interval_at(0.2).unwrap(), (1.0, 2.0));
    }

    #[test]
    fn normal_first_steps_are_forced() {
        let family = Family::normal_mean(1.0).unwrap();
        let grid = family.grid(-10.0, 10.0, 2000).unwrap();
        let res = push_continuous(family, grid, 200, 0.9).unwrap();
        let z = crate::special::norm_quantile(0.9);
        for k in 1..=200 {
            assert!((res.y(k) - (grid.theta_at(k) + z)).abs() < 1e-12, "k={k}");
            assert_eq!(res.binding(k), Binding::CurrentNode);
        }
    }

    #[test]
    fn narrow_binomial_does_not_exist() {
        let family = Family::binomial(10).unwrap();
        let grid = family.default_grid(100_000).unwrap();
        let res = push_continuous(family, grid, 100, 0.95).unwrap();
        assert!(!res.exists());
        assert_eq!(res.y(100_000), f64::INFINITY);
        assert!(res.interval_at(1.0).is_err());
    }

    #[test]
    fn full_width_hypergeometric_exists() {
        let family = Family::hypergeometric(10, 60).unwrap();
        let grid = family.default_grid(60).unwrap();
        for gamma in [0.5, 0.9, 0.999] {
            assert!(push_discrete(family, grid, 60, gamma).unwrap().exists());
        }
    }

    #[test]
    fn overflow_boundary() {
        assert!(argument_overflows(1.03));
        assert!(!argument_overflows(1.0));
        assert!(!argument_overflows(1.0 + 2.0 * f64::EPSILON));
    }

    #[test]
    fn rejects_bad_inputs() {
        let family = Family::binomial(10).unwrap();
        let grid = family.default_grid(100).unwrap();
        assert!(push_continuous(family, grid, 0, 0.9).is_err());
        assert!(push_continuous(family, grid, 101, 0.9).is_err());
        assert!(push_continuous(family, grid, 10, 1.0).is_err());
        assert!(push_continuous(family, grid, 10, 0.0).is_err());
        assert!(push_discrete(family, grid, 10, 0.9).is_err());
        let h = Family::hypergeometric(10, 100).unwrap();
        assert!(push_continuous(h, h.default_grid(0).unwrap(), 10, 0.9).is_err());
    }
}
