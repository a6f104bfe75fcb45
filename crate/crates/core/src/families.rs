//! Statistic families: for each grid index, the continuous cdf `F_k` of the
//! (possibly smoothed) statistic `Y` and its generalized inverse.
//!
//! Discrete counts `X` are smoothed as `Y = X + U` with `U ~ Unif[-1/2, 1/2]`,
//! which makes `F_k` the piecewise-linear function bisecting the steps of the
//! count cdf `G_k`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::ParamGrid;
use crate::special::{dbinom_raw, dhyper, norm_cdf, norm_quantile, pbinom, CompensatedSum};

/// The supported statistic families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `S ~ Bin(n, p)`, parameter `p` in `[0, 1]`.
    Binomial { n: u64 },
    /// Successes in a draw of `n` without replacement from `population`
    /// items; the parameter is the number of successes in the population.
    Hypergeometric { n: u64, population: u64 },
    /// `Y ~ N(theta, sigma^2)` with known `sigma`.
    NormalMean { sigma: f64 },
}

impl Family {
    pub fn binomial(n: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidFamily("binomial n must be at least 1"));
        }
        Ok(Family::Binomial { n })
    }

    pub fn hypergeometric(n: u64, population: u64) -> Result<Self> {
        if n < 1 || n > population {
            return Err(Error::InvalidFamily("hypergeometric needs 1 <= n <= N"));
        }
        Ok(Family::Hypergeometric { n, population })
    }

    pub fn normal_mean(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidFamily("sigma must be positive and finite"));
        }
        Ok(Family::NormalMean { sigma })
    }

    /// Infimum of the statistic support.
    pub fn statistic_inf(&self) -> f64 {
        match self {
            Family::Binomial { .. } | Family::Hypergeometric { .. } => -0.5,
            Family::NormalMean { .. } => f64::NEG_INFINITY,
        }
    }

    /// Supremum of the statistic support.
    pub fn statistic_sup(&self) -> f64 {
        match *self {
            Family::Binomial { n } | Family::Hypergeometric { n, .. } => n as f64 + 0.5,
            Family::NormalMean { .. } => f64::INFINITY,
        }
    }

    /// Supremum of the full parameter space.
    pub fn sup_theta(&self) -> f64 {
        match *self {
            Family::Binomial { .. } => 1.0,
            Family::Hypergeometric { population, .. } => population as f64,
            Family::NormalMean { .. } => f64::INFINITY,
        }
    }

    /// Whether the statistic is a smoothed count.
    pub fn is_discrete(&self) -> bool {
        !matches!(self, Family::NormalMean { .. })
    }

    /// Whether the parameter itself is discrete (hypergeometric).
    pub fn has_discrete_parameter(&self) -> bool {
        matches!(self, Family::Hypergeometric { .. })
    }

    /// Sample size for the count families.
    pub fn sample_size(&self) -> Option<u64> {
        match *self {
            Family::Binomial { n } | Family::Hypergeometric { n, .. } => Some(n),
            Family::NormalMean { .. } => None,
        }
    }

    /// Natural grid: `[0, 1]` with `m` steps for the binomial, `{0, ..., N}`
    /// for the hypergeometric (ignores `m`). The normal mean has no natural
    /// bounds, use [`Family::grid`].
    pub fn default_grid(&self, m: u64) -> Result<ParamGrid> {
        match *self {
            Family::Binomial { .. } => ParamGrid::new(0.0, 1.0, m, 1.0),
            Family::Hypergeometric { population, .. } => {
                ParamGrid::new(0.0, population as f64, population, population as f64)
            }
            Family::NormalMean { .. } => Err(Error::InvalidArgument(
                "the normal mean needs explicit bounds",
            )),
        }
    }

    /// Grid over `[lo, hi]` with this family's parameter supremum.
    pub fn grid(&self, lo: f64, hi: f64, m: u64) -> Result<ParamGrid> {
        if let Family::Hypergeometric { .. } = self {
            return self.default_grid(m);
        }
        ParamGrid::new(lo, hi, m, self.sup_theta())
    }

    /// Law of the statistic at grid index `k`.
    pub fn law_at(&self, grid: &ParamGrid, k: i64) -> StatLaw {
        let theta = grid.theta_at(k);
        match *self {
            Family::Hypergeometric { n, population } => {
                let successes = libm::round(theta).clamp(0.0, population as f64) as u64;
                StatLaw::Count(CountLaw::Hypergeometric {
                    n,
                    successes,
                    population,
                })
            }
            _ => self
                .law_at_theta(theta)
                .expect("grid nodes lie in the parameter space"),
        }
    }

    /// Law of the statistic at an arbitrary parameter value.
    pub fn law_at_theta(&self, theta: f64) -> Result<StatLaw> {
        match *self {
            Family::Binomial { n } => {
                if !(0.0..=1.0).contains(&theta) {
                    return Err(Error::InvalidArgument("binomial p outside [0, 1]"));
                }
                Ok(StatLaw::Count(CountLaw::Binomial { n, p: theta }))
            }
            Family::Hypergeometric { n, population } => {
                if theta < 0.0 || theta > population as f64 || libm::round(theta) != theta {
                    return Err(Error::InvalidArgument(
                        "hypergeometric parameter must be an integer in [0, N]",
                    ));
                }
                Ok(StatLaw::Count(CountLaw::Hypergeometric {
                    n,
                    successes: theta as u64,
                    population,
                }))
            }
            Family::NormalMean { sigma } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidArgument("normal mean must be finite"));
                }
                Ok(StatLaw::Normal { mean: theta, sigma })
            }
        }
    }

    /// Base count law at grid index `k`, for the discrete families.
    pub fn count_law(&self, grid: &ParamGrid, k: i64) -> Option<CountLaw> {
        match self.law_at(grid, k) {
            StatLaw::Count(c) => Some(c),
            StatLaw::Normal { .. } => None,
        }
    }
}

/// Distribution of the unsmoothed count statistic, evaluated lazily.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountLaw {
    Binomial {
        n: u64,
        p: f64,
    },
    Hypergeometric {
        n: u64,
        successes: u64,
        population: u64,
    },
}

const WALK_LIMIT: usize = 24;

impl CountLaw {
    /// Range of counts with positive probability.
    pub fn support(&self) -> (i64, i64) {
        match *self {
            CountLaw::Binomial { n, p } => {
                if p <= 0.0 {
                    (0, 0)
                } else if p >= 1.0 {
                    (n as i64, n as i64)
                } else {
                    (0, n as i64)
                }
            }
            CountLaw::Hypergeometric {
                n,
                successes,
                population,
            } => {
                let failures = population - successes;
                let lo = n.saturating_sub(failures);
                let hi = n.min(successes);
                (lo as i64, hi as i64)
            }
        }
    }

    pub fn n(&self) -> u64 {
        match *self {
            CountLaw::Binomial { n, .. } | CountLaw::Hypergeometric { n, .. } => n,
        }
    }

    /// `g(s) = P(X = s)`.
    pub fn pmf(&self, s: i64) -> f64 {
        if s < 0 {
            return 0.0;
        }
        match *self {
            CountLaw::Binomial { n, p } => dbinom_raw(s as u64, n, p, 1.0 - p),
            CountLaw::Hypergeometric {
                n,
                successes,
                population,
            } => dhyper(s as u64, successes, population - successes, n),
        }
    }

    /// `G(s) = P(X <= s)`.
    pub fn cdf(&self, s: i64) -> f64 {
        match *self {
            CountLaw::Binomial { n, p } => pbinom(s, n, p),
            CountLaw::Hypergeometric { .. } => self.hyper_cdf(s),
        }
    }

    fn mean_sd(&self) -> (f64, f64) {
        match *self {
            CountLaw::Binomial { n, p } => {
                let n = n as f64;
                (n * p, libm::sqrt(n * p * (1.0 - p)))
            }
            CountLaw::Hypergeometric {
                n,
                successes,
                population,
            } => {
                let (n, k, big) = (n as f64, successes as f64, population as f64);
                let frac = k / big;
                let fpc = if big > 1.0 {
                    (big - n) / (big - 1.0)
                } else {
                    0.0
                };
                (n * frac, libm::sqrt(n * frac * (1.0 - frac) * fpc))
            }
        }
    }

    // Sums probabilities from the lighter tail with ratio recurrences.
    fn hyper_cdf(&self, s: i64) -> f64 {
        let CountLaw::Hypergeometric {
            n,
            successes,
            population,
        } = *self
        else {
            unreachable!()
        };
        let (lo, hi) = self.support();
        if s < lo {
            return 0.0;
        }
        if s >= hi {
            return 1.0;
        }
        let (n, k, big) = (n as f64, successes as f64, population as f64);
        let mode = libm::floor((n + 1.0) * (k + 1.0) / (big + 2.0)) as i64;
        let mut acc = CompensatedSum::default();
        if s < mode {
            // P(X <= s), walking down from s
            let mut term = self.pmf(s);
            let mut j = s;
            while j >= lo {
                acc.add(term);
                if term <= acc.value() * 1e-18 || j == lo {
                    break;
                }
                let jf = j as f64;
                term *= jf * (big - k - n + jf) / ((k - jf + 1.0) * (n - jf + 1.0));
                j -= 1;
            }
            acc.value()
        } else {
            // 1 - P(X > s), walking up from s + 1
            let mut j = s + 1;
            let mut term = self.pmf(j);
            while j <= hi {
                acc.add(term);
                if term <= acc.value() * 1e-18 || j == hi {
                    break;
                }
                let jf = j as f64;
                term *= (k - jf) * (n - jf) / ((jf + 1.0) * (big - k - n + jf + 1.0));
                j += 1;
            }
            1.0 - acc.value()
        }
    }

    /// Smallest count `s` with `G(s) >= beta`, together with `G(s - 1)`,
    /// for `0 < beta < 1`.
    fn first_reaching(&self, beta: f64) -> (i64, f64) {
        let (lo, hi) = self.support();
        if lo == hi {
            return (lo, 0.0);
        }
        let (mean, sd) = self.mean_sd();
        let guess = libm::ceil(mean + sd * norm_quantile(beta) - 0.5);
        let mut s = if guess.is_finite() {
            (guess as i64).clamp(lo, hi)
        } else {
            lo
        };
        let mut at_s = self.cdf(s);
        if at_s >= beta {
            for _ in 0..WALK_LIMIT {
                if s == lo {
                    return (s, 0.0);
                }
                let below = at_s - self.pmf(s);
                if below >= beta {
                    s -= 1;
                    at_s = below;
                } else {
                    return (s, below.max(0.0));
                }
            }
        } else {
            for _ in 0..WALK_LIMIT {
                s += 1;
                if s >= hi {
                    return (hi, at_s);
                }
                let next = at_s + self.pmf(s);
                if next >= beta {
                    return (s, at_s);
                }
                at_s = next;
            }
        }
        // bisection: cdf(left) < beta <= cdf(right)
        let (mut left, mut right) = (lo - 1, hi);
        while right - left > 1 {
            let mid = left + (right - left) / 2;
            if self.cdf(mid) >= beta {
                right = mid;
            } else {
                left = mid;
            }
        }
        (right, self.cdf(right - 1))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        match *self {
            CountLaw::Binomial { n, p } => {
                let d = Binomial::new(n, p).expect("valid binomial");
                d.sample(rng) as i64
            }
            CountLaw::Hypergeometric {
                n,
                successes,
                population,
            } => {
                let d =
                    Hypergeometric::new(population, successes, n).expect("valid hypergeometric");
                d.sample(rng) as i64
            }
        }
    }
}

/// Continuous law of the statistic `Y` at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatLaw {
    /// Smoothed count `Y = X + U`.
    Count(CountLaw),
    Normal {
        mean: f64,
        sigma: f64,
    },
}

impl StatLaw {
    /// Continuous cdf `F(y)`; total on the reals.
    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            StatLaw::Count(c) => {
                if y.is_nan() {
                    return f64::NAN;
                }
                if y <= -0.5 {
                    return 0.0;
                }
                if y >= c.n() as f64 + 0.5 {
                    return 1.0;
                }
                let s = libm::floor(y + 0.5);
                let si = s as i64;
                let value = c.cdf(si - 1) + c.pmf(si) * (y - s + 0.5);
                value.clamp(0.0, 1.0)
            }
            StatLaw::Normal { mean, sigma } => norm_cdf((y - mean) / sigma),
        }
    }

    /// Same cdf with round-half-down at half-integers; agrees with [`cdf`]
    /// by continuity.
    ///
    /// [`cdf`]: StatLaw::cdf
    pub fn cdf_round_half_down(&self, y: f64) -> f64 {
        match self {
            StatLaw::Count(c) => {
                if y <= -0.5 {
                    return 0.0;
                }
                if y >= c.n() as f64 + 0.5 {
                    return 1.0;
                }
                let s = libm::ceil(y - 0.5);
                let si = s as i64;
                (c.cdf(si - 1) + c.pmf(si) * (y - s + 0.5)).clamp(0.0, 1.0)
            }
            StatLaw::Normal { .. } => self.cdf(y),
        }
    }

    /// Generalized inverse `min { y : F(y) >= beta }`, with `+inf` for
    /// `beta > 1`.
    pub fn quantile(&self, beta: f64) -> f64 {
        if beta > 1.0 {
            return f64::INFINITY;
        }
        match self {
            StatLaw::Count(c) => {
                let (_, hi) = c.support();
                if beta <= 0.0 {
                    return -0.5;
                }
                if beta == 1.0 {
                    return hi as f64 + 0.5;
                }
                let (s, below) = c.first_reaching(beta);
                let mass = c.pmf(s);
                let frac = if mass > 0.0 {
                    ((beta - below) / mass).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                s as f64 - 0.5 + frac
            }
            StatLaw::Normal { mean, sigma } => mean + sigma * norm_quantile(beta),
        }
    }

    /// Infimum of the support.
    pub fn inf(&self) -> f64 {
        match self {
            StatLaw::Count(_) => -0.5,
            StatLaw::Normal { .. } => f64::NEG_INFINITY,
        }
    }

    /// Draws one value of `Y`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            StatLaw::Count(c) => {
                let x = c.sample(rng) as f64;
                let u: f64 = rng.random::<f64>() - 0.5;
                x + u
            }
            StatLaw::Normal { mean, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sigma * z
            }
        }
    }
}
