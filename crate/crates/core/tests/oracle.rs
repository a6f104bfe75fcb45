//! Cross-checks against a naive recursion built on statrs distributions and
//! bisection quantiles, and against numerically integrated coverage.

use pushci::coverage::StandardInterval;
use pushci::{exact_coverage, push, Family, IntervalFunction, ParamGrid};
use statrs::distribution::{
    Binomial, ContinuousCDF, Discrete, DiscreteCDF, Hypergeometric, Normal,
};

#[derive(Clone, Copy)]
enum Oracle {
    Binomial {
        n: u64,
        p: f64,
    },
    Hyper {
        n: u64,
        successes: u64,
        population: u64,
    },
    Normal {
        mean: f64,
    },
}

impl Oracle {
    fn at(family: Family, theta: f64) -> Self {
        match family {
            Family::Binomial { n } => Oracle::Binomial { n, p: theta },
            Family::Hypergeometric { n, population } => Oracle::Hyper {
                n,
                successes: theta.round() as u64,
                population,
            },
            Family::NormalMean { .. } => Oracle::Normal { mean: theta },
        }
    }

    fn count_cdf(&self, s: i64) -> f64 {
        if s < 0 {
            return 0.0;
        }
        match *self {
            Oracle::Binomial { n, p } => Binomial::new(p, n).unwrap().cdf(s as u64),
            Oracle::Hyper {
                n,
                successes,
                population,
            } => Hypergeometric::new(population, successes, n)
                .unwrap()
                .cdf(s as u64),
            Oracle::Normal { .. } => unreachable!(),
        }
    }

    fn count_pmf(&self, s: i64) -> f64 {
        if s < 0 {
            return 0.0;
        }
        match *self {
            Oracle::Binomial { n, p } => Binomial::new(p, n).unwrap().pmf(s as u64),
            Oracle::Hyper {
                n,
                successes,
                population,
            } => Hypergeometric::new(population, successes, n)
                .unwrap()
                .pmf(s as u64),
            Oracle::Normal { .. } => unreachable!(),
        }
    }

    fn n(&self) -> i64 {
        match *self {
            Oracle::Binomial { n, .. } | Oracle::Hyper { n, .. } => n as i64,
            Oracle::Normal { .. } => 0,
        }
    }

    fn cdf(&self, y: f64) -> f64 {
        match *self {
            Oracle::Normal { mean } => Normal::new(mean, 1.0).unwrap().cdf(y),
            _ => {
                if y < -0.5 {
                    return 0.0;
                }
                if y >= self.n() as f64 + 0.5 {
                    return 1.0;
                }
                let s = (y + 0.5).floor() as i64;
                (self.count_cdf(s - 1) + self.count_pmf(s) * (y - s as f64 + 0.5)).min(1.0)
            }
        }
    }

    fn quantile(&self, beta: f64) -> f64 {
        let (mut lo, mut hi) = match *self {
            Oracle::Normal { mean } => (mean - 40.0, mean + 40.0),
            _ => (-0.5, self.n() as f64 + 0.5),
        };
        if self.cdf(lo) >= beta {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= beta {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        hi
    }
}

/// Breakpoints `y_0..=y_m`, or `None` when the recursion overflows.
fn naive_push(family: Family, grid: ParamGrid, r: u64, gamma: f64) -> Option<Vec<f64>> {
    let m = grid.m() as i64;
    let r = r as i64;
    let discrete = family.has_discrete_parameter();
    let back_offset = if discrete { r + 1 } else { r };
    let start = match family {
        Family::NormalMean { .. } => f64::NEG_INFINITY,
        _ => -0.5,
    };
    let mut ys = vec![start; (m + back_offset + 1) as usize];
    let at = |k: i64| (k + back_offset) as usize;
    for k in 1..=m {
        let back = ys[at(k - back_offset)];
        let mut y = ys[at(k - 1)];
        let mut nodes = vec![k - 1];
        if !discrete {
            nodes.push(k);
        }
        for j in nodes {
            let law = Oracle::at(family, grid.theta_at(j));
            let beta = gamma + law.cdf(back);
            if beta > 1.0 + 1e-12 {
                return None;
            }
            y = y.max(law.quantile(beta.min(1.0)));
        }
        ys[at(k)] = y;
    }
    Some(ys[at(0)..].to_vec())
}

fn compare(family: Family, grid: ParamGrid, r: u64, gamma: f64) {
    let res = push(family, grid, r, gamma).unwrap();
    let naive = naive_push(family, grid, r, gamma);
    assert_eq!(res.exists(), naive.is_some(), "{family:?} r={r} existence");
    if let Some(ys) = naive {
        for (k, y) in ys.iter().enumerate() {
            let got = res.y(k as i64);
            if y.is_finite() || got.is_finite() {
                assert!(
                    (got - y).abs() < 1e-8,
                    "{family:?} r={r} k={k}: {got} vs {y}"
                );
            }
        }
    }
}

#[test]
fn binomial_breakpoints_match_naive_recursion() {
    let family = Family::binomial(10).unwrap();
    let grid = family.default_grid(400).unwrap();
    for r in [100, 127, 150, 220] {
        compare(family, grid, r, 0.8);
    }
    let family = Family::binomial(25).unwrap();
    let grid = family.default_grid(300).unwrap();
    compare(family, grid, 120, 0.9);
    compare(family, grid, 60, 0.9);
}

#[test]
fn normal_breakpoints_match_naive_recursion() {
    let family = Family::normal_mean(1.0).unwrap();
    let grid = family.grid(-5.0, 5.0, 400).unwrap();
    compare(family, grid, 150, 0.9);
    compare(family, grid, 80, 0.7);
}

#[test]
fn hypergeometric_breakpoints_match_naive_recursion() {
    let family = Family::hypergeometric(8, 40).unwrap();
    let grid = family.default_grid(40).unwrap();
    for r in [12, 15, 20, 30] {
        compare(family, grid, r, 0.8);
    }
}

/// Coverage by integrating the uniform smoothing numerically.
fn integrated_coverage(f: &IntervalFunction, k: i64) -> f64 {
    let law = Oracle::at(f.family(), f.grid().theta_at(k));
    let steps = 4000;
    let mut total = 0.0;
    for s in 0..=law.n() {
        let mass = law.count_pmf(s);
        if mass == 0.0 {
            continue;
        }
        let hits = (0..steps)
            .filter(|i| {
                let y = s as f64 - 0.5 + (*i as f64 + 0.5) / steps as f64;
                let (lo, hi) = f.indices_at(y);
                lo <= k && k <= hi
            })
            .count();
        total += mass * hits as f64 / steps as f64;
    }
    total
}

#[test]
fn exact_coverage_matches_integration() {
    let family = Family::binomial(12).unwrap();
    let grid = family.default_grid(200).unwrap();
    let f = IntervalFunction::from_push(&push(family, grid, 70, 0.85).unwrap()).unwrap();
    for k in (0..=200).step_by(7) {
        let exact = exact_coverage(&f, k);
        let approx = integrated_coverage(&f, k);
        assert!((exact - approx).abs() < 1e-3, "k={k}: {exact} vs {approx}");
    }
    let family = Family::hypergeometric(6, 30).unwrap();
    let grid = family.default_grid(30).unwrap();
    let f = IntervalFunction::from_push(&push(family, grid, 14, 0.8).unwrap()).unwrap();
    for k in 0..=30 {
        let exact = exact_coverage(&f, k);
        let approx = integrated_coverage(&f, k);
        assert!((exact - approx).abs() < 1e-3, "k={k}: {exact} vs {approx}");
    }
}

#[test]
fn standard_coverage_matches_direct_sum() {
    let family = Family::binomial(10).unwrap();
    let grid = family.default_grid(1000).unwrap();
    let s = StandardInterval::new(family, grid, 0.32).unwrap();
    for k in (0..=1000).step_by(13) {
        let theta = grid.theta_at(k);
        let law = Oracle::at(family, theta);
        let direct: f64 = (0..=10)
            .filter(|&x| {
                let (l, u) = s.interval(x as f64).unwrap();
                l <= theta && theta <= u
            })
            .map(|x| law.count_pmf(x))
            .sum();
        assert!((s.coverage(k) - direct).abs() < 1e-12, "k={k}");
    }
}
