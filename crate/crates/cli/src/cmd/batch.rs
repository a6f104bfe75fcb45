use std::path::{Path, PathBuf};

use clap::Args;
use pushci::coverage::{standard_min_width, StandardInterval};
use pushci::{EdgeRule, Family, Reported};
use rayon::prelude::*;

use crate::cmd::push::minimal;
use crate::config::{policy, Edges, Format, OutputArgs, Policy, VariantArgs, DEFAULT_M};
use crate::error::{CliError, CliResult};
use crate::output::{csv_err, csv_writer, sink, NumFmt};
use crate::pool;

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// CSV with header `stratum,n,s,gamma`; `s` and `gamma` may be omitted.
    pub input: PathBuf,
    /// Level for rows without their own.
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    #[arg(long, default_value_t = DEFAULT_M)]
    pub m: u64,
    #[command(flatten)]
    pub variant: VariantArgs,
    #[arg(long, value_enum, default_value_t = Policy::Center)]
    pub policy: Policy,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Edge handling of the standard comparator.
    #[arg(long, value_enum, default_value_t = Edges::Shift)]
    pub edges: Edges,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// One stratum of the input file.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub line: u64,
    pub stratum: String,
    pub n: u64,
    pub s: Option<u64>,
    pub gamma: Option<f64>,
}

type ParsedRows = (Vec<BatchRow>, Vec<(u64, String)>);

/// Rows that parsed, and `(line, reason)` for those that did not.
pub fn read_rows(path: &Path) -> CliResult<ParsedRows> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
    parse_rows(file)
}

pub fn parse_rows<R: std::io::Read>(input: R) -> CliResult<ParsedRows> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse(format!("header: {e}")))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (Some(stratum_col), Some(n_col)) = (column("stratum"), column("n")) else {
        return Err(CliError::Parse(
            "header must contain stratum and n columns".into(),
        ));
    };
    let (s_col, gamma_col) = (column("s"), column("gamma"));
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                bad.push((line, e.to_string()));
                continue;
            }
        };
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: Option<usize>| i.and_then(|i| record.get(i)).filter(|v| !v.is_empty());
        let parsed = (|| -> Result<BatchRow, String> {
            let stratum = field(Some(stratum_col)).unwrap_or_default().to_string();
            let n: u64 = field(Some(n_col))
                .ok_or("missing n")?
                .parse()
                .map_err(|_| "n is not a non-negative integer")?;
            if n < 1 {
                return Err("n must be at least 1".into());
            }
            let s = field(s_col)
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| "s is not a non-negative integer")
                })
                .transpose()?;
            if s.is_some_and(|s| s > n) {
                return Err("s exceeds n".into());
            }
            let gamma = field(gamma_col)
                .map(|v| v.parse::<f64>().map_err(|_| "gamma is not a number"))
                .transpose()?;
            if gamma.is_some_and(|g| !(g > 0.0 && g < 1.0)) {
                return Err("gamma must lie in (0, 1)".into());
            }
            Ok(BatchRow {
                line,
                stratum,
                n,
                s,
                gamma,
            })
        })();
        match parsed {
            Ok(row) => rows.push(row),
            Err(reason) => bad.push((line, reason)),
        }
    }
    Ok((rows, bad))
}

/// Computed results for one stratum.
#[derive(Debug, Clone)]
pub struct StratumReport {
    pub row: BatchRow,
    pub gamma: f64,
    pub push_r: u64,
    pub push_width: f64,
    /// `(lower, upper, weight)` pieces of the reported Push interval.
    pub push_intervals: Vec<(f64, f64, f64)>,
    pub standard_r: u64,
    pub standard_width: f64,
    pub standard_interval: Option<(f64, f64)>,
}

pub struct StratumSettings<'a> {
    pub m: u64,
    pub gamma: f64,
    pub variant: &'a VariantArgs,
    pub policy: Policy,
    pub seed: u64,
    pub edges: EdgeRule,
}

pub fn compute(row: &BatchRow, settings: &StratumSettings) -> CliResult<StratumReport> {
    let gamma = row.gamma.unwrap_or(settings.gamma);
    let family = Family::binomial(row.n)?;
    let grid = family.default_grid(settings.m)?;
    let min = minimal(family, grid, gamma, false)?;
    let f = settings.variant.apply(&min.result)?;
    let (standard_r, _) = standard_min_width(family, grid, gamma, settings.edges, min.r)
        .map_err(|_| CliError::NoSolution(format!("no standard width reaches level {gamma}")))?;
    let standard_width = grid.width_of(pushci::WidthSpec { r: standard_r })?;
    let standard = StandardInterval::new(family, grid, standard_width)?.with_edges(settings.edges);
    let (push_intervals, standard_interval) = match row.s {
        None => (Vec::new(), None),
        Some(s) => {
            let pieces = match f.report(s as f64, policy(settings.policy, settings.seed))? {
                Reported::Single { lower, upper } => vec![(lower, upper, 1.0)],
                Reported::Weighted(pieces) => pieces
                    .iter()
                    .map(|p| (p.lower, p.upper, p.weight))
                    .collect(),
            };
            let (l, u) = standard.interval(s as f64)?;
            (pieces, Some((l.max(grid.lo()), u.min(grid.hi()))))
        }
    };
    Ok(StratumReport {
        row: row.clone(),
        gamma,
        push_r: min.r,
        push_width: min.width,
        push_intervals,
        standard_r,
        standard_width,
        standard_interval,
    })
}

pub const HEADER: [&str; 14] = [
    "stratum",
    "n",
    "s",
    "gamma",
    "push_r",
    "push_width",
    "push_lower",
    "push_upper",
    "weight",
    "standard_r",
    "standard_width",
    "standard_lower",
    "standard_upper",
    "m",
];

pub fn records(report: &StratumReport, m: u64, fmt: NumFmt) -> Vec<Vec<String>> {
    let base = |lower: String, upper: String, weight: String| {
        let (sl, su) = match report.standard_interval {
            Some((l, u)) => (fmt.num(l), fmt.num(u)),
            None => (String::new(), String::new()),
        };
        vec![
            report.row.stratum.clone(),
            report.row.n.to_string(),
            report.row.s.map(|s| s.to_string()).unwrap_or_default(),
            fmt.num(report.gamma),
            report.push_r.to_string(),
            fmt.num(report.push_width),
            lower,
            upper,
            weight,
            report.standard_r.to_string(),
            fmt.num(report.standard_width),
            sl,
            su,
            m.to_string(),
        ]
    };
    if report.push_intervals.is_empty() {
        return vec![base(String::new(), String::new(), String::new())];
    }
    report
        .push_intervals
        .iter()
        .map(|&(l, u, w)| base(fmt.num(l), fmt.num(u), fmt.num(w)))
        .collect()
}

pub fn run(args: &BatchArgs) -> CliResult<()> {
    if args.output.format != Format::Csv {
        return Err(CliError::Usage("batch writes CSV only".into()));
    }
    if !(args.gamma > 0.0 && args.gamma < 1.0) {
        return Err(CliError::Usage(format!(
            "confidence level {} outside (0, 1)",
            args.gamma
        )));
    }
    let (rows, mut bad) = read_rows(&args.input)?;
    let settings = StratumSettings {
        m: args.m,
        gamma: args.gamma,
        variant: &args.variant,
        policy: args.policy,
        seed: args.seed,
        edges: args.edges.into(),
    };
    let results: Vec<CliResult<StratumReport>> =
        pool(args.jobs)?.install(|| rows.par_iter().map(|row| compute(row, &settings)).collect());
    let fmt = args.output.fmt();
    let mut w = csv_writer(sink(args.output.out.as_deref())?);
    w.write_record(HEADER).map_err(csv_err)?;
    for (row, result) in rows.iter().zip(results) {
        match result {
            Ok(report) => {
                for rec in records(&report, args.m, fmt) {
                    w.write_record(&rec).map_err(csv_err)?;
                }
            }
            Err(e) => bad.push((row.line, format!("{}: {e}", e.code()))),
        }
    }
    w.flush().map_err(|e| CliError::io("write failed", e))?;
    if bad.is_empty() {
        return Ok(());
    }
    bad.sort_by_key(|(line, _)| *line);
    for (line, reason) in &bad {
        eprintln!("warning[row]: line {line}: {reason}");
    }
    Err(CliError::Parse(format!(
        "{} row(s) could not be processed",
        bad.len()
    )))
}
