//! Interval functions built from Push breakpoints, their range-constrained
//! and mirror-symmetrized variants, minimal-width search and reporting for
//! an observed count.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::families::Family;
use crate::grid::ParamGrid;
use crate::push::{push, PushResult};
use crate::special::norm_quantile;

/// How an interval function was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Push,
    Constrained,
    Symmetric,
}

/// Monotone grid-valued step map `y -> [L(y), R(y)]`.
///
/// Segment `i` covers `starts[i] <= y < starts[i + 1]` (the last one is
/// unbounded above). Endpoints are stored as grid indices; upper indices may
/// exceed `m` and are clamped at the parameter supremum on evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFunction {
    family: Family,
    grid: ParamGrid,
    r: u64,
    starts: Vec<f64>,
    lower: Vec<i64>,
    upper: Vec<i64>,
    provenance: Provenance,
}

/// One `u`-slice of a fully reported randomized interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedInterval {
    pub u_lo: f64,
    pub u_hi: f64,
    pub lower: f64,
    pub upper: f64,
    pub weight: f64,
}

/// Result of reporting an interval for an observed statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum Reported {
    Single {
        lower: f64,
        upper: f64,
    },
    /// Every interval reachable as `u` ranges over `[-1/2, 1/2]`, with the
    /// length of its `u`-slice as weight.
    Weighted(Vec<WeightedInterval>),
}

/// Treatment of the smoothing variable `u` when only the count is observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomizationPolicy {
    /// Report the `u = 0` interval.
    CenterPoint,
    /// Draw `u ~ Unif[-1/2, 1/2]` from a seeded generator.
    Sampled { seed: u64 },
    /// Return the whole map `u -> interval` with weights.
    FullFunction,
}

const MERGE_TOLERANCE: f64 = 1e-12;

impl IntervalFunction {
    /// Materializes `[theta_k, theta_{k+r}]` on `[y_k, y_{k+1})`, dropping
    /// zero-length segments.
    pub fn from_push(result: &PushResult) -> Result<Self> {
        if !result.exists() {
            return Err(Error::NotExists);
        }
        let m = result.grid().m() as i64;
        let r = result.r() as i64;
        let mut starts = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for k in 0..=m {
            let start = result.y(k);
            let end = result.y(k + 1);
            if end <= start {
                continue;
            }
            starts.push(start);
            lower.push(k);
            upper.push(k + r);
        }
        Ok(Self {
            family: result.family(),
            grid: *result.grid(),
            r: result.r(),
            starts,
            lower,
            upper,
            provenance: Provenance::Push,
        })
    }

    /// Builds an interval function from raw parts, checking monotonicity.
    pub fn from_parts(
        family: Family,
        grid: ParamGrid,
        r: u64,
        starts: Vec<f64>,
        lower: Vec<i64>,
        upper: Vec<i64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if starts.is_empty() || starts.len() != lower.len() || starts.len() != upper.len() {
            return Err(Error::InvalidArgument(
                "segment arrays must be non-empty and aligned",
            ));
        }
        if r < 1 || r > grid.m() {
            return Err(Error::WidthOutOfRange { r, m: grid.m() });
        }
        for i in 0..starts.len() {
            if lower[i] > upper[i] {
                return Err(Error::InvalidArgument(
                    "lower endpoint above upper endpoint",
                ));
            }
            if i > 0
                && (starts[i] <= starts[i - 1]
                    || lower[i] < lower[i - 1]
                    || upper[i] < upper[i - 1])
            {
                return Err(Error::InvalidArgument(
                    "segments must be increasing and monotone",
                ));
            }
        }
        Ok(Self {
            family,
            grid,
            r,
            starts,
            lower,
            upper,
            provenance,
        })
    }

    /// The constant interval `[lo, hi]`.
    pub fn full_range(family: Family, grid: ParamGrid) -> Self {
        Self {
            family,
            grid,
            r: grid.m(),
            starts: alloc::vec![family.statistic_inf()],
            lower: alloc::vec![0],
            upper: alloc::vec![grid.m() as i64],
            provenance: Provenance::Push,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    /// Nominal width index.
    pub fn r(&self) -> u64 {
        self.r
    }

    /// Nominal width.
    pub fn width(&self) -> f64 {
        (self.grid.hi() - self.grid.lo()) * self.r as f64 / self.grid.m() as f64
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn lower_indices(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper_indices(&self) -> &[i64] {
        &self.upper
    }

    /// Segments as `(y_lo, y_hi, L, R)` in parameter units.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.starts.len()).map(move |i| {
            let end = self.starts.get(i + 1).copied().unwrap_or(f64::INFINITY);
            (
                self.starts[i],
                end,
                self.grid.theta_at(self.lower[i]),
                self.grid.theta_at(self.upper[i]),
            )
        })
    }

    fn segment_at(&self, y: f64) -> usize {
        self.starts.partition_point(|&s| s <= y).saturating_sub(1)
    }

    /// Grid indices of the interval at `y`.
    pub fn indices_at(&self, y: f64) -> (i64, i64) {
        let i = self.segment_at(y);
        (self.lower[i], self.upper[i])
    }

    /// `[L(y), R(y)]` in parameter units.
    pub fn interval_at(&self, y: f64) -> (f64, f64) {
        let (l, u) = self.indices_at(y);
        (self.grid.theta_at(l), self.grid.theta_at(u))
    }

    /// Maximum of `R - L` over the segments.
    pub fn achieved_width(&self) -> f64 {
        self.segments()
            .map(|(_, _, l, u)| u - l)
            .fold(0.0, f64::max)
    }

    /// `inf { y : R(y) >= theta_k }` and `inf { y : L(y) > theta_k }`; the
    /// interval covers `theta_k` exactly when `a <= y < b`.
    pub fn covering_span(&self, k: i64) -> (f64, f64) {
        let a = self.first_start(self.upper.partition_point(|&u| u < k));
        let b = self.first_start(self.lower.partition_point(|&l| l <= k));
        (a, b)
    }

    /// `inf { y : R(y) >= theta_k }` and `inf { y : L(y) >= theta_k }`: the
    /// interval contains `[theta_{k-1}, theta_k]` exactly when `a <= y < b`.
    pub fn band_span(&self, k: i64) -> (f64, f64) {
        let a = self.first_start(self.upper.partition_point(|&u| u < k));
        let b = self.first_start(self.lower.partition_point(|&l| l < k));
        (a, b)
    }

    fn first_start(&self, i: usize) -> f64 {
        self.starts.get(i).copied().unwrap_or(f64::INFINITY)
    }

    /// Shifts intervals overflowing the grid range back inside it:
    /// `[hi - w, hi]` when `R > hi`, `[lo, lo + w]` when `L < lo`.
    pub fn constrain(&self) -> Result<Self> {
        let m = self.grid.m() as i64;
        let r = self.r as i64;
        if r > m {
            return Err(Error::InvalidArgument("width exceeds the grid range"));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| u - l != r) {
            return Err(Error::InvalidArgument(
                "constrain expects a fixed-width function",
            ));
        }
        let mut out = self.clone();
        for i in 0..out.starts.len() {
            if out.upper[i] > m {
                out.lower[i] = m - r;
                out.upper[i] = m;
            } else if out.lower[i] < 0 {
                out.lower[i] = 0;
                out.upper[i] = r;
            }
        }
        out.provenance = Provenance::Constrained;
        Ok(out)
    }

    /// Union with the mirror image under `y -> n - y`, `theta -> c - theta`:
    /// `[L(y) ^ (c - R(n - y)), R(y) v (c - L(n - y))]`.
    pub fn symmetrize(&self) -> Result<Self> {
        let n = match self.family.sample_size() {
            Some(n) => n as f64,
            None => return Err(Error::Unsupported("the normal mean has no mirror map")),
        };
        let g = &self.grid;
        if g.lo() != 0.0 || g.hi() != self.family.sup_theta() || g.sup_theta() != g.hi() {
            return Err(Error::InvalidArgument(
                "symmetrization needs the full parameter grid",
            ));
        }
        if self.lower.iter().any(|&l| l < 0) {
            return Err(Error::InvalidArgument("lower endpoint below the grid"));
        }
        let m = g.m() as i64;
        let inf = self.family.statistic_inf();
        let sup = self.family.statistic_sup();
        let mut bounds: Vec<f64> = Vec::with_capacity(2 * self.starts.len() + 1);
        bounds.push(inf);
        for &s in &self.starts {
            if s > inf && s < sup {
                bounds.push(s);
                bounds.push(n - s);
            }
        }
        bounds.sort_by(|a, b| a.partial_cmp(b).expect("finite boundaries"));
        let mut merged: Vec<f64> = Vec::with_capacity(bounds.len());
        for b in bounds {
            match merged.last() {
                Some(&last) if b - last <= MERGE_TOLERANCE => {}
                _ => merged.push(b),
            }
        }
        let mut starts = Vec::with_capacity(merged.len());
        let mut lower = Vec::with_capacity(merged.len());
        let mut upper = Vec::with_capacity(merged.len());
        for (i, &b) in merged.iter().enumerate() {
            let end = merged.get(i + 1).copied().unwrap_or(sup);
            let t = 0.5 * (b + end);
            let (l1, u1) = self.indices_at(t);
            let (l2, u2) = self.indices_at(n - t);
            let lo = l1.min(m - u2.min(m));
            let hi = u1.min(m).max(m - l2);
            if lower.last() == Some(&lo) && upper.last() == Some(&hi) {
                continue;
            }
            starts.push(b);
            lower.push(lo);
            upper.push(hi);
        }
        Ok(Self {
            family: self.family,
            grid: self.grid,
            r: self.r,
            starts,
            lower,
            upper,
            provenance: Provenance::Symmetric,
        })
    }

    /// Interval for an observed statistic under a randomization policy.
    ///
    /// For count families `x` must be an integer in `[0, n]`; the normal mean
    /// is never randomized.
    pub fn report(&self, x: f64, policy: RandomizationPolicy) -> Result<Reported> {
        let n = match self.family.sample_size() {
            None => {
                if !x.is_finite() {
                    return Err(Error::OutOfSupport(x));
                }
                let (lower, upper) = self.interval_at(x);
                return Ok(Reported::Single { lower, upper });
            }
            Some(n) => n as f64,
        };
        if !(0.0..=n).contains(&x) || libm::round(x) != x {
            return Err(Error::OutOfSupport(x));
        }
        match policy {
            RandomizationPolicy::CenterPoint => {
                let (lower, upper) = self.interval_at(x);
                Ok(Reported::Single { lower, upper })
            }
            RandomizationPolicy::Sampled { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let u: f64 = rng.random::<f64>() - 0.5;
                let (lower, upper) = self.interval_at(x + u);
                Ok(Reported::Single { lower, upper })
            }
            RandomizationPolicy::FullFunction => {
                let mut cuts = alloc::vec![-0.5];
                for &s in &self.starts {
                    let u = s - x;
                    if u > -0.5 && u < 0.5 {
                        cuts.push(u);
                    }
                }
                cuts.push(0.5);
                let mut pieces: Vec<WeightedInterval> = Vec::new();
                for w in cuts.windows(2) {
                    let (u_lo, u_hi) = (w[0], w[1]);
                    if u_hi <= u_lo {
                        continue;
                    }
                    let (lower, upper) = self.interval_at(x + 0.5 * (u_lo + u_hi));
                    match pieces.last_mut() {
                        Some(last) if last.lower == lower && last.upper == upper => {
                            last.u_hi = u_hi;
                            last.weight = last.u_hi - last.u_lo;
                        }
                        _ => pieces.push(WeightedInterval {
                            u_lo,
                            u_hi,
                            lower,
                            upper,
                            weight: u_hi - u_lo,
                        }),
                    }
                }
                Ok(Reported::Weighted(pieces))
            }
        }
    }
}

/// Outcome of the minimal-width search.
#[derive(Debug, Clone)]
pub struct MinWidth {
    /// Smallest width index whose recursion completes.
    pub r: u64,
    /// Recursion at `r`.
    pub result: PushResult,
    /// Every width index probed, with its existence outcome.
    pub probes: BTreeMap<u64, bool>,
}

impl MinWidth {
    pub fn width(&self) -> f64 {
        self.result.width()
    }
}

/// Smallest `r` for which the Push interval exists at level `gamma`.
pub fn min_width(family: Family, grid: ParamGrid, gamma: f64) -> Result<MinWidth> {
    min_width_from(
        family,
        grid,
        gamma,
        approximate_width_index(family, &grid, gamma),
    )
}

/// Width index of the normal-approximation interval at the least favourable
/// parameter, used as a starting guess for [`min_width`].
pub fn approximate_width_index(family: Family, grid: &ParamGrid, gamma: f64) -> u64 {
    if !(gamma > 0.0 && gamma < 1.0) {
        return 1;
    }
    let z = -norm_quantile(0.5 * (1.0 - gamma));
    let width = match family {
        Family::Binomial { n } => z / libm::sqrt(n as f64),
        Family::Hypergeometric { n, population } => {
            let (n, big) = (n as f64, population as f64);
            let fpc = if big > 1.0 {
                (big - n) / (big - 1.0)
            } else {
                0.0
            };
            big * z * libm::sqrt(fpc / n)
        }
        Family::NormalMean { sigma } => 2.0 * z * sigma,
    };
    let r = width / grid.step();
    if r.is_finite() {
        (r as u64).clamp(1, grid.m())
    } else {
        1
    }
}

/// [`min_width`] with an initial guess for `r`.
///
/// Searches by doubling steps away from the guess and then bisection,
/// assuming existence is monotone in `r`; the answer is then checked by
/// direct runs at `r*` and `r* - 1`, scanning down when the check fails.
pub fn min_width_from(family: Family, grid: ParamGrid, gamma: f64, hint: u64) -> Result<MinWidth> {
    let m = grid.m();
    let hint = hint.clamp(1, m);
    let mut probes: BTreeMap<u64, bool> = BTreeMap::new();
    let mut best: Option<PushResult> = None;
    let probe =
        |r: u64, probes: &mut BTreeMap<u64, bool>, best: &mut Option<PushResult>| -> Result<bool> {
            if let Some(&known) = probes.get(&r) {
                return Ok(known);
            }
            let res = push(family, grid, r, gamma)?;
            let ok = res.exists();
            probes.insert(r, ok);
            if ok && best.as_ref().is_none_or(|b| b.r() > r) {
                *best = Some(res);
            }
            Ok(ok)
        };

    // bracket: lo fails (0 = virtual failure), hi exists
    let (mut lo, mut hi);
    if probe(hint, &mut probes, &mut best)? {
        hi = hint;
        let mut step = 1u64;
        loop {
            if hi <= step {
                lo = 0;
                break;
            }
            let cand = hi - step;
            if probe(cand, &mut probes, &mut best)? {
                hi = cand;
                step *= 2;
            } else {
                lo = cand;
                break;
            }
        }
    } else {
        lo = hint;
        let mut step = 1u64;
        loop {
            let cand = (lo + step).min(m);
            if probe(cand, &mut probes, &mut best)? {
                hi = cand;
                break;
            }
            if cand == m {
                return Err(Error::NoSolution);
            }
            lo = cand;
            step *= 2;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid, &mut probes, &mut best)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut r_star = hi;
    // verification at r* - 1
    while r_star > 1 && probe(r_star - 1, &mut probes, &mut best)? {
        r_star -= 1;
    }
    let result = match best {
        Some(b) if b.r() == r_star => b,
        _ => push(family, grid, r_star, gamma)?,
    };
    Ok(MinWidth {
        r: r_star,
        result,
        probes,
    })
}
