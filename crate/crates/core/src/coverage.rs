//! Exact and Monte Carlo coverage of interval functions, the standard
//! fixed-width comparators and the z-interval closed forms.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::families::{Family, StatLaw};
use crate::grid::ParamGrid;
use crate::intervals::IntervalFunction;
use crate::special::{norm_cdf, norm_quantile};

/// How coverage values were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageMethod {
    Exact,
    MonteCarlo { reps: u64, seed: u64 },
}

/// Per-index coverage with its minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub indices: Vec<i64>,
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    /// Present for Monte Carlo estimates only.
    pub std_errors: Option<Vec<f64>>,
    pub min: f64,
    pub argmin: i64,
    pub method: CoverageMethod,
}

impl CoverageReport {
    fn assemble(
        grid: &ParamGrid,
        indices: Vec<i64>,
        values: Vec<f64>,
        std_errors: Option<Vec<f64>>,
        method: CoverageMethod,
    ) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("empty index set"));
        }
        let (min, argmin) = first_min(&indices, &values);
        let thetas = indices.iter().map(|&k| grid.theta_at(k)).collect();
        Ok(Self {
            indices,
            thetas,
            values,
            std_errors,
            min,
            argmin,
            method,
        })
    }

    /// Exact coverage of `f` at each index.
    pub fn exact(f: &IntervalFunction, indices: &[i64]) -> Result<Self> {
        let values = indices.iter().map(|&k| exact_coverage(f, k)).collect();
        Self::assemble(
            f.grid(),
            indices.to_vec(),
            values,
            None,
            CoverageMethod::Exact,
        )
    }

    /// Monte Carlo coverage of `f` at each index.
    pub fn monte_carlo(
        f: &IntervalFunction,
        indices: &[i64],
        reps: u64,
        seed: u64,
    ) -> Result<Self> {
        let (values, ses) = indices
            .iter()
            .map(|&k| mc_coverage(f, k, reps, seed))
            .unzip();
        Self::assemble(
            f.grid(),
            indices.to_vec(),
            values,
            Some(ses),
            CoverageMethod::MonteCarlo { reps, seed },
        )
    }
}

fn first_min(indices: &[i64], values: &[f64]) -> (f64, i64) {
    let mut best = (f64::INFINITY, indices[0]);
    for (&k, &v) in indices.iter().zip(values) {
        if v < best.0 {
            best = (v, k);
        }
    }
    best
}

fn mass_between(law: &StatLaw, a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    (law.cdf(b) - law.cdf(a)).max(0.0)
}

/// `P_{theta_k}(theta_k in [L(Y), R(Y)]) = F_k(b) - F_k(a)` with
/// `a = inf { y : R(y) >= theta_k }` and `b = inf { y : L(y) > theta_k }`.
pub fn exact_coverage(f: &IntervalFunction, k: i64) -> f64 {
    let law = f.family().law_at(f.grid(), k);
    let (a, b) = f.covering_span(k);
    mass_between(&law, a, b)
}

/// `P_theta(L(Y) <= theta_{k-1} < theta_k <= R(Y))`: the coverage at every
/// parameter strictly between the two nodes, evaluated under `theta`.
pub fn band_coverage(f: &IntervalFunction, k: i64, theta: f64) -> Result<f64> {
    let law = f.family().law_at_theta(theta)?;
    let (a, b) = f.band_span(k);
    Ok(mass_between(&law, a, b))
}

/// Minimum exact coverage over `indices` and its first argmin.
pub fn min_coverage(f: &IntervalFunction, indices: &[i64]) -> Result<(f64, i64)> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument("empty index set"));
    }
    let values: Vec<f64> = indices.iter().map(|&k| exact_coverage(f, k)).collect();
    Ok(first_min(indices, &values))
}

/// Fraction of `reps` draws of `Y` under `theta_k` whose interval covers
/// `theta_k`, with its binomial standard error.
///
/// Draws come from a ChaCha8 stream keyed by `(seed, k)`, so results do not
/// depend on evaluation order.
pub fn mc_coverage(f: &IntervalFunction, k: i64, reps: u64, seed: u64) -> (f64, f64) {
    let law = f.family().law_at(f.grid(), k);
    let mut rng = stream(seed, k);
    let mut hits = 0u64;
    for _ in 0..reps {
        let y = law.sample(&mut rng);
        let (lo, hi) = f.indices_at(y);
        if lo <= k && k <= hi {
            hits += 1;
        }
    }
    estimate(hits, reps)
}

fn stream(seed: u64, k: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

fn estimate(hits: u64, reps: u64) -> (f64, f64) {
    if reps == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / reps as f64;
    (p, libm::sqrt(p * (1.0 - p) / reps as f64))
}

/// Summary of the off-grid check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointCheck {
    pub passed: bool,
    pub checked: usize,
    /// Smallest coverage found at a midpoint.
    pub min_value: f64,
    /// Smallest `midpoint - min(neighbours)`.
    pub worst_margin: f64,
    pub worst_k: i64,
}

/// Evaluates coverage at `samples` midpoints `(theta_{k-1} + theta_k) / 2`
/// spread over the grid and checks each against the smaller of the band
/// coverages at the two neighbouring nodes.
pub fn midpoint_lemma_check(f: &IntervalFunction, samples: usize) -> Result<MidpointCheck> {
    if f.family().has_discrete_parameter() {
        return Err(Error::Unsupported(
            "no parameter values between hypergeometric nodes",
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample"));
    }
    let grid = f.grid();
    let m = grid.m() as i64;
    let mut out = MidpointCheck {
        passed: true,
        checked: 0,
        min_value: f64::INFINITY,
        worst_margin: f64::INFINITY,
        worst_k: 1,
    };
    let mut last = 0i64;
    for i in 0..samples {
        let k = 1 + (i as i64 * m) / samples as i64;
        if k == last || k > m {
            continue;
        }
        last = k;
        let left = grid.theta_at(k - 1);
        let right = grid.theta_at(k);
        let mid = 0.5 * (left + right);
        let value = band_coverage(f, k, mid)?;
        let floor = band_coverage(f, k, left)?.min(band_coverage(f, k, right)?);
        let margin = value - floor;
        out.checked += 1;
        out.min_value = out.min_value.min(value);
        if margin < out.worst_margin {
            out.worst_margin = margin;
            out.worst_k = k;
        }
        if margin < -1e-9 {
            out.passed = false;
        }
    }
    Ok(out)
}

/// `P_theta(|Y - theta| <= w / 2) = 1 - 2 Phi(-w / (2 sigma))`.
pub fn z_coverage(w: f64, sigma: f64) -> f64 {
    1.0 - 2.0 * norm_cdf(-w / (2.0 * sigma))
}

/// Width at which the z interval reaches coverage `gamma`.
pub fn z_width_for(gamma: f64, sigma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidLevel(gamma));
    }
    Ok(-2.0 * sigma * norm_quantile((1.0 - gamma) / 2.0))
}

/// How the standard interval is kept inside `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeRule {
    /// Shift the interval back inside at either end.
    #[default]
    ShiftBoth,
    /// Cap the upper end at `hi` and keep the width; the lower end may fall
    /// below `lo`.
    CapUpper,
}

/// The standard fixed-width interval `midpoint +- w/2` with midpoint `S/n`,
/// `XN/n` or `Y`, kept inside `[lo, hi]` according to an [`EdgeRule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardInterval {
    family: Family,
    grid: ParamGrid,
    w: f64,
    edges: EdgeRule,
}

/// `[L, R]` of the standard interval for an observed statistic.
pub fn standard_interval(
    family: Family,
    grid: ParamGrid,
    observed: f64,
    w: f64,
) -> Result<(f64, f64)> {
    StandardInterval::new(family, grid, w)?.interval(observed)
}

impl StandardInterval {
    pub fn new(family: Family, grid: ParamGrid, w: f64) -> Result<Self> {
        if w.is_nan() || w <= 0.0 || w > grid.hi() - grid.lo() {
            return Err(Error::InvalidArgument(
                "standard width must lie in (0, hi - lo]",
            ));
        }
        Ok(Self {
            family,
            grid,
            w,
            edges: EdgeRule::ShiftBoth,
        })
    }

    pub fn with_edges(mut self, edges: EdgeRule) -> Self {
        self.edges = edges;
        self
    }

    pub fn edges(&self) -> EdgeRule {
        self.edges
    }

    pub fn width(&self) -> f64 {
        self.w
    }

    fn midpoint(&self, observed: f64) -> f64 {
        match self.family {
            Family::Binomial { n } => observed / n as f64,
            Family::Hypergeometric { n, population } => observed * population as f64 / n as f64,
            Family::NormalMean { .. } => observed,
        }
    }

    fn bounds_at_midpoint(&self, c: f64) -> (f64, f64) {
        let (lo, hi) = (self.grid.lo(), self.grid.hi());
        let half = 0.5 * self.w;
        let (l, u) = (c - half, c + half);
        if u > hi {
            (hi - self.w, hi)
        } else if l < lo && self.edges == EdgeRule::ShiftBoth {
            (lo, lo + self.w)
        } else {
            (l, u)
        }
    }

    /// Interval for an observed count (or normal observation).
    pub fn interval(&self, observed: f64) -> Result<(f64, f64)> {
        match self.family.sample_size() {
            Some(n) => {
                if !(0.0..=n as f64).contains(&observed) || libm::round(observed) != observed {
                    return Err(Error::OutOfSupport(observed));
                }
            }
            None => {
                if !observed.is_finite() {
                    return Err(Error::OutOfSupport(observed));
                }
            }
        }
        Ok(self.bounds_at_midpoint(self.midpoint(observed)))
    }

    /// Exact coverage at an arbitrary parameter value.
    pub fn coverage_at_theta(&self, theta: f64) -> Result<f64> {
        let law = self.family.law_at_theta(theta)?;
        Ok(self.coverage_under(&law, theta))
    }

    /// Exact coverage at grid index `k`.
    pub fn coverage(&self, k: i64) -> f64 {
        let law = self.family.law_at(&self.grid, k);
        self.coverage_under(&law, self.grid.theta_at(k))
    }

    fn coverage_under(&self, law: &StatLaw, theta: f64) -> f64 {
        match (law, self.family.sample_size()) {
            (StatLaw::Count(count), Some(n)) => {
                let n = n as i64;
                let covers_above =
                    |s: i64| self.bounds_at_midpoint(self.midpoint(s as f64)).1 >= theta;
                let covers_below =
                    |s: i64| self.bounds_at_midpoint(self.midpoint(s as f64)).0 <= theta;
                // first s with R(s) >= theta
                let (mut lo, mut hi) = (-1i64, n + 1);
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if covers_above(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let s_min = hi;
                // last s with L(s) <= theta
                let (mut lo, mut hi) = (-1i64, n + 1);
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if covers_below(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let s_max = lo;
                if s_min > s_max {
                    return 0.0;
                }
                (count.cdf(s_max) - count.cdf(s_min - 1)).max(0.0)
            }
            (StatLaw::Normal { mean, sigma }, _) => {
                let (lo, hi) = (self.grid.lo(), self.grid.hi());
                let half = 0.5 * self.w;
                if theta > hi || theta < lo {
                    return 0.0;
                }
                let y_a = if self.edges == EdgeRule::ShiftBoth && theta <= lo + self.w {
                    f64::NEG_INFINITY
                } else {
                    theta - half
                };
                let y_b = if theta >= hi - self.w {
                    f64::INFINITY
                } else {
                    theta + half
                };
                (norm_cdf((y_b - mean) / sigma) - norm_cdf((y_a - mean) / sigma)).max(0.0)
            }
            _ => unreachable!("law and family disagree"),
        }
    }

    /// Minimum exact coverage over `indices` by direct evaluation.
    pub fn min_coverage(&self, indices: &[i64]) -> Result<(f64, i64)> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("empty index set"));
        }
        let values: Vec<f64> = indices.iter().map(|&k| self.coverage(k)).collect();
        Ok(first_min(indices, &values))
    }

    /// Minimum exact coverage over the whole grid `0..=m`.
    ///
    /// For count families the covering set of counts is an interval that
    /// only changes where `theta` crosses some `L(s)` or `R(s)`, and an
    /// interval probability is unimodal in the parameter, so the grid
    /// minimum sits next to one of those crossings. Only those indices are
    /// evaluated. The normal mean falls back to every index.
    pub fn grid_min_coverage(&self) -> (f64, i64) {
        let m = self.grid.m() as i64;
        let Some(n) = self.family.sample_size() else {
            let all: Vec<i64> = (0..=m).collect();
            return self.min_coverage(&all).expect("non-empty grid");
        };
        let step = self.grid.step();
        let lo = self.grid.lo();
        let mut candidates: Vec<i64> = Vec::with_capacity(8 * n as usize + 2);
        candidates.push(0);
        candidates.push(m);
        for s in 0..=n {
            let (l, u) = self.bounds_at_midpoint(self.midpoint(s as f64));
            for v in [l, u] {
                let k0 = libm::floor((v - lo) / step) as i64;
                for k in (k0 - 1)..=(k0 + 2) {
                    if (0..=m).contains(&k) {
                        candidates.push(k);
                    }
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        self.min_coverage(&candidates)
            .expect("non-empty candidates")
    }

    /// Monte Carlo coverage at grid index `k`; counts are not smoothed.
    pub fn mc_coverage(&self, k: i64, reps: u64, seed: u64) -> (f64, f64) {
        let law = self.family.law_at(&self.grid, k);
        let theta = self.grid.theta_at(k);
        let mut rng = stream(seed, k);
        let mut hits = 0u64;
        for _ in 0..reps {
            let observed = match &law {
                StatLaw::Count(c) => c.sample(&mut rng) as f64,
                StatLaw::Normal { .. } => law.sample(&mut rng),
            };
            let (l, u) = self.bounds_at_midpoint(self.midpoint(observed));
            if l <= theta && theta <= u {
                hits += 1;
            }
        }
        estimate(hits, reps)
    }

    /// Exact coverage report over `indices`.
    pub fn exact_report(&self, indices: &[i64]) -> Result<CoverageReport> {
        let values = indices.iter().map(|&k| self.coverage(k)).collect();
        CoverageReport::assemble(
            &self.grid,
            indices.to_vec(),
            values,
            None,
            CoverageMethod::Exact,
        )
    }

    /// Monte Carlo coverage report over `indices`.
    pub fn mc_report(&self, indices: &[i64], reps: u64, seed: u64) -> Result<CoverageReport> {
        let (values, ses) = indices
            .iter()
            .map(|&k| self.mc_coverage(k, reps, seed))
            .unzip();
        CoverageReport::assemble(
            &self.grid,
            indices.to_vec(),
            values,
            Some(ses),
            CoverageMethod::MonteCarlo { reps, seed },
        )
    }
}

/// Smallest width index whose standard interval has grid minimum coverage
/// at least `gamma`, scanning width multiples of the grid step.
///
/// The scan starts at `start_r`. If that width already passes, it steps
/// down in doubling strides to a failing width and scans up from there.
/// Returns the width index and its minimum coverage.
pub fn standard_min_width(
    family: Family,
    grid: ParamGrid,
    gamma: f64,
    edges: EdgeRule,
    start_r: u64,
) -> Result<(u64, f64)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidLevel(gamma));
    }
    let m = grid.m();
    let span = grid.hi() - grid.lo();
    let min_cov = |r: u64| -> Result<f64> {
        let w = span * r as f64 / m as f64;
        Ok(StandardInterval::new(family, grid, w)?
            .with_edges(edges)
            .grid_min_coverage()
            .0)
    };
    let start = start_r.clamp(1, m);
    let mut from = start;
    if min_cov(start)? >= gamma {
        let mut step = 1u64;
        let mut passing = start;
        loop {
            if passing <= step {
                from = 1;
                break;
            }
            let cand = passing - step;
            if min_cov(cand)? >= gamma {
                passing = cand;
                step *= 2;
            } else {
                from = cand + 1;
                break;
            }
        }
    }
    for r in from..=m {
        let c = min_cov(r)?;
        if c >= gamma {
            return Ok((r, c));
        }
    }
    Err(Error::NoSolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::push::push;

    #[test]
    fn tiny_instance_coverage() {
        let family = Family::hypergeometric(1, 2).unwrap();
        let grid = family.default_grid(2).unwrap();
        let f = IntervalFunction::from_push(&push(family, grid, 1, 0.5).unwrap()).unwrap();
        assert!((exact_coverage(&f, 0) - 0.5).abs() < 1e-12);
        assert!((exact_coverage(&f, 1) - 0.5).abs() < 1e-12);
        assert!((exact_coverage(&f, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_range_covers_everything() {
        let family = Family::binomial(7).unwrap();
        let grid = family.default_grid(50).unwrap();
        let f = IntervalFunction::full_range(family, grid);
        for k in 0..=50 {
            assert!((exact_coverage(&f, k) - 1.0).abs() < 1e-15);
        }
        let check = midpoint_lemma_check(&f, 20).unwrap();
        assert!(check.passed);
    }

    #[test]
    fn standard_examples() {
        let b = Family::binomial(10).unwrap();
        let g = b.default_grid(1000).unwrap();
        let (l, u) = standard_interval(b, g, 5.0, 0.318).unwrap();
        assert!((l - 0.341).abs() < 1e-12 && (u - 0.659).abs() < 1e-12);
        assert_eq!(standard_interval(b, g, 0.0, 0.318).unwrap(), (0.0, 0.318));
        let h = Family::hypergeometric(10, 500).unwrap();
        let hg = h.default_grid(0).unwrap();
        assert_eq!(
            standard_interval(h, hg, 5.0, 100.0).unwrap(),
            (200.0, 300.0)
        );
        let capped = StandardInterval::new(b, g, 0.318)
            .unwrap()
            .with_edges(EdgeRule::CapUpper);
        let (l, u) = capped.interval(0.0).unwrap();
        assert!((l + 0.159).abs() < 1e-12 && (u - 0.159).abs() < 1e-12);
        assert_eq!(capped.interval(10.0).unwrap(), (1.0 - 0.318, 1.0));
        assert!(standard_interval(b, g, 5.0, 1.5).is_err());
        assert!(standard_interval(b, g, 11.0, 0.3).is_err());
    }

    #[test]
    fn z_interval_values() {
        assert!((z_coverage(2.004, 1.0) - 0.684).abs() < 5e-4);
        assert!((z_coverage(3.822, 1.0) - 0.944).abs() < 5e-4);
        assert!((z_coverage(60.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((z_width_for(0.7, 1.0).unwrap() - 2.073).abs() < 5e-4);
        assert!((z_width_for(0.95, 1.0).unwrap() - 3.920).abs() < 5e-4);
        for gamma in [0.5, 0.7, 0.8, 0.9, 0.95, 0.99] {
            let w = z_width_for(gamma, 2.5).unwrap();
            assert!((z_coverage(w, 2.5) - gamma).abs() < 1e-9);
        }
    }

    #[test]
    fn normal_standard_matches_z_in_the_interior() {
        let family = Family::normal_mean(1.0).unwrap();
        let grid = family.grid(-10.0, 10.0, 2000).unwrap();
        let s = StandardInterval::new(family, grid, 2.004).unwrap();
        assert!((s.coverage(1000) - z_coverage(2.004, 1.0)).abs() < 1e-12);
        assert!((s.coverage(0) - norm_cdf(1.002)).abs() < 1e-12);
    }

    #[test]
    fn singleton_min_coverage() {
        let family = Family::binomial(10).unwrap();
        let grid = family.default_grid(100).unwrap();
        let f = IntervalFunction::from_push(&push(family, grid, 40, 0.8).unwrap()).unwrap();
        let (v, k) = min_coverage(&f, &[37]).unwrap();
        assert_eq!(k, 37);
        assert_eq!(v, exact_coverage(&f, 37));
        assert!(min_coverage(&f, &[]).is_err());
    }
}
