use clap::{Args, ValueEnum};
use pushci::coverage::{z_coverage, z_width_for, StandardInterval};
use pushci::{
    exact_coverage, mc_coverage, min_coverage, EdgeRule, Family, IntervalFunction, ParamGrid,
};
use rayon::prelude::*;

use crate::cmd::batch::{compute, parse_rows, records, StratumSettings, HEADER};
use crate::cmd::coverage::strided;
use crate::cmd::push::minimal;
use crate::config::{OutputArgs, Policy, VariantArgs};
use crate::error::{CliError, CliResult};
use crate::output::{csv_err, csv_writer, sink, NumFmt};
use crate::pool;

const STRATA: &str = include_str!("../../data/table2_strata.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Table1,
    Table2,
    FigBinom,
    FigHyper,
    FigMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    /// m = 10^4 for binomial sweeps and 500 Monte Carlo replications.
    Desk,
    /// m = 10^5 and 2000 replications.
    Full,
}

impl Scale {
    fn m(self) -> u64 {
        match self {
            Scale::Desk => 10_000,
            Scale::Full => 100_000,
        }
    }

    fn reps(self) -> u64 {
        match self {
            Scale::Desk => 500,
            Scale::Full => 2000,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub target: Target,
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

type Table = (Vec<&'static str>, Vec<Vec<String>>);

pub fn run(args: &ReproduceArgs) -> CliResult<()> {
    let fmt = args.output.fmt();
    let (header, rows) = pool(args.jobs)?.install(|| match args.target {
        Target::Table1 => table1(fmt),
        Target::Table2 => table2(args.scale, fmt),
        Target::FigBinom => fig_coverage(binomial_setups(args.scale), args.scale, args.seed, fmt),
        Target::FigHyper => fig_coverage(hyper_setups(args.scale), args.scale, args.seed, fmt),
        Target::FigMin => fig_min(args.scale, fmt),
    })?;
    let mut w = csv_writer(sink(args.output.out.as_deref())?);
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("write failed", e))
}

/// Minimal Push widths for the normal mean on [-10, 10] against the z interval.
fn table1(fmt: NumFmt) -> CliResult<Table> {
    let family = Family::normal_mean(1.0)?;
    let grid = family.grid(-10.0, 10.0, 100_000)?;
    let rows = [0.7, 0.8, 0.9, 0.95]
        .par_iter()
        .map(|&gamma| -> CliResult<Vec<String>> {
            let min = minimal(family, grid, gamma, false)?;
            Ok(vec![
                fmt.num(gamma),
                min.r.to_string(),
                fmt.num(min.width),
                fmt.num(z_coverage(min.width, 1.0)),
                fmt.num(z_width_for(gamma, 1.0)?),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok((
        vec!["gamma", "push_r", "push_width", "z_coverage", "z_width"],
        rows,
    ))
}

/// Survey strata with derived observed counts.
fn table2(scale: Scale, fmt: NumFmt) -> CliResult<Table> {
    let (rows, bad) = parse_rows(STRATA.as_bytes())?;
    if !bad.is_empty() {
        return Err(CliError::Parse("bundled strata file is malformed".into()));
    }
    let variant = VariantArgs {
        constrain: true,
        no_constrain: false,
        symmetric: false,
    };
    let settings = StratumSettings {
        m: scale.m(),
        gamma: 0.95,
        variant: &variant,
        policy: Policy::Center,
        seed: 1,
        edges: EdgeRule::CapUpper,
    };
    let reports = rows
        .par_iter()
        .map(|row| compute(row, &settings))
        .collect::<CliResult<Vec<_>>>()?;
    let out = reports
        .iter()
        .flat_map(|r| records(r, scale.m(), fmt))
        .collect();
    Ok((HEADER.to_vec(), out))
}

struct Setup {
    family: Family,
    grid: ParamGrid,
    gamma: f64,
    stride: u64,
}

fn binomial_setups(scale: Scale) -> Vec<Setup> {
    let m = scale.m();
    let mut out = Vec::new();
    for n in [10, 20] {
        for gamma in [0.9, 0.95] {
            let family = Family::binomial(n).expect("valid n");
            let grid = family.default_grid(m).expect("valid grid");
            out.push(Setup {
                family,
                grid,
                gamma,
                stride: m / 100,
            });
        }
    }
    out
}

fn hyper_setups(scale: Scale) -> Vec<Setup> {
    let mut out = Vec::new();
    for n in [10, 20] {
        for gamma in [0.9, 0.95] {
            let family = Family::hypergeometric(n, 500).expect("valid sizes");
            let grid = family.default_grid(500).expect("valid grid");
            let stride = match scale {
                Scale::Desk => 5,
                Scale::Full => 1,
            };
            out.push(Setup {
                family,
                grid,
                gamma,
                stride,
            });
        }
    }
    out
}

/// Coverage against the parameter for Push (constrained and unconstrained),
/// symmetric Push and the standard interval at the Push minimal width.
fn fig_coverage(setups: Vec<Setup>, scale: Scale, seed: u64, fmt: NumFmt) -> CliResult<Table> {
    let reps = scale.reps();
    let per_setup = setups
        .par_iter()
        .map(|setup| -> CliResult<Vec<Vec<String>>> {
            let min = minimal(setup.family, setup.grid, setup.gamma, false)?;
            let raw = IntervalFunction::from_push(&min.result)?;
            let constrained = raw.constrain()?;
            let symmetric = constrained.symmetrize()?;
            let standard = StandardInterval::new(setup.family, setup.grid, min.width)?
                .with_edges(EdgeRule::CapUpper);
            let label = sizes(setup.family);
            let mut rows = Vec::new();
            for k in strided(setup.grid.m(), setup.stride) {
                let theta = setup.grid.theta_at(k);
                let mut push_row = |variant: &str, exact: f64, (mc, se): (f64, f64), width: f64| {
                    rows.push(vec![
                        label.0.clone(),
                        label.1.clone(),
                        fmt.num(setup.gamma),
                        variant.to_string(),
                        fmt.num(width),
                        fmt.num(theta),
                        fmt.num(exact),
                        fmt.num(mc),
                        fmt.num(se),
                    ]);
                };
                for (variant, f) in [
                    ("push", &constrained),
                    ("push_unconstrained", &raw),
                    ("symmetric", &symmetric),
                ] {
                    push_row(
                        variant,
                        exact_coverage(f, k),
                        mc_coverage(f, k, reps, seed),
                        f.achieved_width(),
                    );
                }
                push_row(
                    "standard",
                    standard.coverage(k),
                    standard.mc_coverage(k, reps, seed),
                    min.width,
                );
            }
            Ok(rows)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let header = vec![
        "n", "N", "gamma", "variant", "width", "theta", "exact", "mc", "se",
    ];
    Ok((header, per_setup.into_iter().flatten().collect()))
}

fn sizes(family: Family) -> (String, String) {
    match family {
        Family::Binomial { n } => (n.to_string(), String::new()),
        Family::Hypergeometric { n, population } => (n.to_string(), population.to_string()),
        Family::NormalMean { .. } => (String::new(), String::new()),
    }
}

/// Minimum coverage against achieved width, n = 10.
fn fig_min(scale: Scale, fmt: NumFmt) -> CliResult<Table> {
    let binom = Family::binomial(10)?;
    let hyper = Family::hypergeometric(10, 500)?;
    let families = [
        (binom, binom.default_grid(scale.m())?),
        (hyper, hyper.default_grid(500)?),
    ];
    let mut rows = Vec::new();
    for (family, grid) in families {
        let all: Vec<i64> = (0..=grid.m() as i64).collect();
        let variants = [0.7, 0.8, 0.9, 0.95]
            .par_iter()
            .map(|&gamma| -> CliResult<(f64, f64, f64, f64, f64)> {
                let min = minimal(family, grid, gamma, false)?;
                let push = IntervalFunction::from_push(&min.result)?.constrain()?;
                let symmetric = push.symmetrize()?;
                let push_min = min_coverage(&push, &all)?.0;
                let sym_min = min_coverage(&symmetric, &all)?.0;
                Ok((
                    gamma,
                    push.achieved_width(),
                    push_min,
                    symmetric.achieved_width(),
                    sym_min,
                ))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let label = sizes(family);
        let mut widths = Vec::new();
        for &(gamma, pw, pmin, sw, smin) in &variants {
            rows.push(row(&label, gamma, "push", pw, pmin, fmt));
            rows.push(row(&label, gamma, "symmetric", sw, smin, fmt));
            widths.push((gamma, pw));
            widths.push((gamma, sw));
        }
        widths.sort_by(|a, b| a.1.total_cmp(&b.1));
        widths.dedup_by(|a, b| a.1 == b.1);
        let standard = widths
            .par_iter()
            .map(|&(gamma, w)| -> CliResult<Vec<String>> {
                let s = StandardInterval::new(family, grid, w)?.with_edges(EdgeRule::CapUpper);
                Ok(row(
                    &label,
                    gamma,
                    "standard",
                    w,
                    s.grid_min_coverage().0,
                    fmt,
                ))
            })
            .collect::<CliResult<Vec<_>>>()?;
        rows.extend(standard);
    }
    Ok((
        vec!["n", "N", "gamma", "method", "width", "min_coverage"],
        rows,
    ))
}

fn row(
    label: &(String, String),
    gamma: f64,
    method: &str,
    width: f64,
    min: f64,
    fmt: NumFmt,
) -> Vec<String> {
    vec![
        label.0.clone(),
        label.1.clone(),
        fmt.num(gamma),
        method.to_string(),
        fmt.num(width),
        fmt.num(min),
    ]
}
