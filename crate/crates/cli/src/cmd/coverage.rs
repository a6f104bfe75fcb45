use clap::{Args, ValueEnum};
use pushci::coverage::StandardInterval;
use pushci::{exact_coverage, mc_coverage, push};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{family_label, Edges, FamilyArgs, Format, OutputArgs, VariantArgs, WidthArgs};
use crate::error::{CliError, CliResult};
use crate::output::{csv_err, csv_writer, sink, write_json, Num};
use crate::pool;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Compare {
    None,
    Standard,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub gamma: f64,
    #[command(flatten)]
    pub width: WidthArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,
    /// Monte Carlo replications per parameter value.
    #[arg(long, default_value_t = 2000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Compare::None)]
    pub compare: Compare,
    /// Edge handling of the standard comparator.
    #[arg(long, value_enum, default_value_t = Edges::Shift)]
    pub edges: Edges,
    /// Report every `stride`-th grid index (always including both ends).
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

struct Row {
    theta: f64,
    coverage: f64,
    se: Option<f64>,
    standard: Option<(f64, Option<f64>)>,
}

#[derive(Serialize)]
struct RowJson {
    k: i64,
    theta: Num,
    coverage: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    se: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    standard_coverage: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    standard_se: Option<Num>,
}

#[derive(Serialize)]
struct CoverageJson {
    family: String,
    gamma: Num,
    width: Num,
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    min_coverage: Num,
    rows: Vec<RowJson>,
}

/// Indices `0, stride, 2 stride, ..., m`.
pub fn strided(m: u64, stride: u64) -> Vec<i64> {
    let stride = stride.max(1);
    let mut ks: Vec<i64> = (0..=m).step_by(stride as usize).map(|k| k as i64).collect();
    if ks.last() != Some(&(m as i64)) {
        ks.push(m as i64);
    }
    ks
}

pub fn run(args: &CoverageArgs) -> CliResult<()> {
    if args.stride == 0 {
        return Err(CliError::Usage("--stride must be at least 1".into()));
    }
    if args.method == Method::Mc && args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let (family, grid) = args.family.resolve()?;
    let r = args.width.resolve(&grid)?;
    let result = push(family, grid, r, args.gamma)?;
    if !result.exists() {
        return Err(CliError::NotExists);
    }
    let f = args.variant.apply(&result)?;
    let standard = match args.compare {
        Compare::None => None,
        Compare::Standard => {
            Some(StandardInterval::new(family, grid, result.width())?.with_edges(args.edges.into()))
        }
    };
    let indices = strided(grid.m(), args.stride);
    let (method, reps, seed) = (args.method, args.reps, args.seed);
    let rows: Vec<Row> = pool(args.jobs)?.install(|| {
        indices
            .par_iter()
            .map(|&k| {
                let (coverage, se) = match method {
                    Method::Exact => (exact_coverage(&f, k), None),
                    Method::Mc => {
                        let (c, se) = mc_coverage(&f, k, reps, seed);
                        (c, Some(se))
                    }
                };
                let standard = standard.map(|s| match method {
                    Method::Exact => (s.coverage(k), None),
                    Method::Mc => {
                        let (c, se) = s.mc_coverage(k, reps, seed);
                        (c, Some(se))
                    }
                });
                Row {
                    theta: grid.theta_at(k),
                    coverage,
                    se,
                    standard,
                }
            })
            .collect()
    });
    write_rows(args, &family_label(family), result.width(), &indices, &rows)
}

fn write_rows(
    args: &CoverageArgs,
    family: &str,
    width: f64,
    indices: &[i64],
    rows: &[Row],
) -> CliResult<()> {
    let fmt = args.output.fmt();
    let method = match args.method {
        Method::Exact => "exact",
        Method::Mc => "mc",
    };
    let out = sink(args.output.out.as_deref())?;
    let opt = |x: Option<f64>| x.map(|v| fmt.num(v)).unwrap_or_default();
    match args.output.format {
        Format::Json => {
            let min = rows
                .iter()
                .map(|r| r.coverage)
                .fold(f64::INFINITY, f64::min);
            let mc = args.method == Method::Mc;
            let doc = CoverageJson {
                family: family.to_string(),
                gamma: fmt.json(args.gamma),
                width: fmt.json(width),
                method,
                reps: mc.then_some(args.reps),
                seed: mc.then_some(args.seed),
                min_coverage: fmt.json(min),
                rows: indices
                    .iter()
                    .zip(rows)
                    .map(|(&k, row)| RowJson {
                        k,
                        theta: fmt.json(row.theta),
                        coverage: fmt.json(row.coverage),
                        se: row.se.map(|v| fmt.json(v)),
                        standard_coverage: row.standard.map(|s| fmt.json(s.0)),
                        standard_se: row.standard.and_then(|s| s.1).map(|v| fmt.json(v)),
                    })
                    .collect(),
            };
            write_json(out, &doc, args.output.pretty)
        }
        Format::Csv => {
            let mut w = csv_writer(out);
            let mut header = vec![
                "theta", "coverage", "se", "method", "family", "gamma", "width",
            ];
            if args.compare == Compare::Standard {
                header.extend(["standard_coverage", "standard_se"]);
            }
            w.write_record(&header).map_err(csv_err)?;
            for row in rows {
                let mut rec = vec![
                    fmt.num(row.theta),
                    fmt.num(row.coverage),
                    opt(row.se),
                    method.to_string(),
                    family.to_string(),
                    fmt.num(args.gamma),
                    fmt.num(width),
                ];
                if let Some((c, se)) = row.standard {
                    rec.push(fmt.num(c));
                    rec.push(opt(se));
                }
                w.write_record(&rec).map_err(csv_err)?;
            }
            w.flush().map_err(|e| CliError::io("write failed", e))
        }
    }
}
