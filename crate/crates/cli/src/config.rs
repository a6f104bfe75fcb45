//! Shared flags and their resolution into a family, grid and width.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use pushci::{
    EdgeRule, Family, IntervalFunction, ParamGrid, PushResult, RandomizationPolicy, WidthSpec,
};

use crate::error::{CliError, CliResult};
use crate::output::NumFmt;

pub const DEFAULT_M: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Binom,
    Hyper,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Center,
    Sampled,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Edges {
    /// Shift the standard interval back inside the range at either end.
    Shift,
    /// Cap the upper end at the range maximum only.
    Cap,
}

impl From<Edges> for EdgeRule {
    fn from(e: Edges) -> Self {
        match e {
            Edges::Shift => EdgeRule::ShiftBoth,
            Edges::Cap => EdgeRule::CapUpper,
        }
    }
}

/// Statistic family and parameter grid.
#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    /// Sample size (binomial, hypergeometric).
    #[arg(long)]
    pub n: Option<u64>,
    /// Population size (hypergeometric).
    #[arg(long = "N")]
    pub population: Option<u64>,
    /// Known standard deviation (normal).
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Lower parameter bound; defaults to 0 for count families.
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Upper parameter bound; defaults to 1 (binomial) or N (hypergeometric).
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    /// Grid resolution [default: 100000; N for the hypergeometric].
    #[arg(long)]
    pub m: Option<u64>,
}

/// Interval width, as a value or a number of grid steps.
#[derive(Debug, Clone, Args)]
pub struct WidthArgs {
    #[arg(long, conflicts_with = "r")]
    pub width: Option<f64>,
    #[arg(long)]
    pub r: Option<u64>,
}

/// Variant selection for Push interval functions.
#[derive(Debug, Clone, Args)]
pub struct VariantArgs {
    /// Shift intervals that overflow the parameter range back inside (default).
    #[arg(long, overrides_with = "no_constrain")]
    pub constrain: bool,
    #[arg(long = "no-constrain", overrides_with = "constrain")]
    pub no_constrain: bool,
    /// Replace each interval by its union with the mirrored interval.
    #[arg(long)]
    pub symmetric: bool,
}

impl VariantArgs {
    pub fn constrained(&self) -> bool {
        !self.no_constrain
    }

    pub fn apply(&self, result: &PushResult) -> CliResult<IntervalFunction> {
        let mut f = IntervalFunction::from_push(result)?;
        if self.constrained() {
            f = f.constrain()?;
        }
        if self.symmetric {
            f = f.symmetrize()?;
        }
        Ok(f)
    }
}

/// Output destination and style.
#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Three decimals instead of 17 significant digits.
    #[arg(long)]
    pub pretty: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl OutputArgs {
    pub fn fmt(&self) -> NumFmt {
        NumFmt {
            pretty: self.pretty,
        }
    }
}

impl FamilyArgs {
    pub fn family(&self) -> CliResult<Family> {
        let need_n = || {
            self.n
                .ok_or_else(|| CliError::Usage("--n is required for this family".into()))
        };
        let family = match self.family {
            FamilyKind::Binom => Family::binomial(need_n()?)?,
            FamilyKind::Hyper => {
                let population = self
                    .population
                    .ok_or_else(|| CliError::Usage("--N is required for --family hyper".into()))?;
                Family::hypergeometric(need_n()?, population)?
            }
            FamilyKind::Normal => Family::normal_mean(self.sigma)?,
        };
        Ok(family)
    }

    pub fn resolve(&self) -> CliResult<(Family, ParamGrid)> {
        let family = self.family()?;
        let grid = match family {
            Family::Hypergeometric { population, .. } => {
                if self.lo.is_some_and(|lo| lo != 0.0)
                    || self.hi.is_some_and(|hi| hi != population as f64)
                {
                    return Err(CliError::Usage(
                        "hypergeometric bounds are fixed at 0 and N".into(),
                    ));
                }
                if self.m.is_some_and(|m| m != population) {
                    return Err(CliError::Usage("hypergeometric grid has m = N".into()));
                }
                family.default_grid(population)?
            }
            Family::Binomial { .. } => {
                let m = self.m.unwrap_or(DEFAULT_M);
                family.grid(self.lo.unwrap_or(0.0), self.hi.unwrap_or(1.0), m)?
            }
            Family::NormalMean { .. } => {
                let (Some(lo), Some(hi)) = (self.lo, self.hi) else {
                    return Err(CliError::Usage(
                        "--lo and --hi are required for --family normal".into(),
                    ));
                };
                family.grid(lo, hi, self.m.unwrap_or(DEFAULT_M))?
            }
        };
        Ok((family, grid))
    }
}

/// Relative tolerance for accepting a width as a multiple of the grid step.
pub const WIDTH_TOLERANCE: f64 = 1e-12;

impl WidthArgs {
    /// Width index, refusing widths that are not a grid multiple.
    pub fn resolve(&self, grid: &ParamGrid) -> CliResult<u64> {
        match (self.width, self.r) {
            (_, Some(r)) => {
                grid.width_of(WidthSpec { r })?;
                Ok(r)
            }
            (Some(w), None) => grid.width_index(w, WIDTH_TOLERANCE).map_err(|(a, b)| {
                let fmt = NumFmt { pretty: false };
                let near = |r: u64| {
                    grid.width_of(WidthSpec { r }).map(|w| fmt.num(w)).unwrap_or_else(|_| "none".into())
                };
                CliError::Usage(format!(
                    "width {} is not a multiple of the grid step {}; nearest representable widths are {} and {}",
                    fmt.num(w),
                    fmt.num(grid.step()),
                    near(a),
                    near(b)
                ))
            }),
            (None, None) => Err(CliError::Usage("one of --width or --r is required".into())),
        }
    }
}

pub fn policy(kind: Policy, seed: u64) -> RandomizationPolicy {
    match kind {
        Policy::Center => RandomizationPolicy::CenterPoint,
        Policy::Sampled => RandomizationPolicy::Sampled { seed },
        Policy::Full => RandomizationPolicy::FullFunction,
    }
}

/// Family label for output rows.
pub fn family_label(family: Family) -> String {
    match family {
        Family::Binomial { n } => format!("binom(n={n})"),
        Family::Hypergeometric { n, population } => format!("hyper(n={n},N={population})"),
        Family::NormalMean { sigma } => format!("normal(sigma={})", crate::output::g17(sigma)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_resolution() {
        let grid = ParamGrid::new(-10.0, 10.0, 100_000, f64::INFINITY).unwrap();
        let by_width = WidthArgs {
            width: Some(2.004),
            r: None,
        };
        assert_eq!(by_width.resolve(&grid).unwrap(), 10_020);
        let by_r = WidthArgs {
            width: None,
            r: Some(10_020),
        };
        assert_eq!(by_r.resolve(&grid).unwrap(), 10_020);
        let off = WidthArgs {
            width: Some(2.0041),
            r: None,
        };
        let CliError::Usage(msg) = off.resolve(&grid).unwrap_err() else {
            panic!()
        };
        assert!(msg.contains("2.004 and 2.0042"), "{msg}");
        assert!(WidthArgs {
            width: None,
            r: None
        }
        .resolve(&grid)
        .is_err());
    }

    #[test]
    fn hypergeometric_grid_is_fixed() {
        let args = FamilyArgs {
            family: FamilyKind::Hyper,
            n: Some(10),
            population: Some(500),
            sigma: 1.0,
            lo: None,
            hi: None,
            m: Some(100),
        };
        assert!(args.resolve().is_err());
        let ok = FamilyArgs { m: None, ..args };
        assert_eq!(ok.resolve().unwrap().1.m(), 500);
    }
}
