use clap::Args;
use pushci::{min_width, push, Family, IntervalFunction, ParamGrid, PushResult};
use serde::Serialize;

use crate::config::{family_label, FamilyArgs, Format, OutputArgs, VariantArgs, WidthArgs};
use crate::error::{CliError, CliResult};
use crate::output::{csv_err, csv_writer, sink, write_json, Num, NumFmt};

#[derive(Debug, Args)]
pub struct PushArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub gamma: f64,
    #[command(flatten)]
    pub width: WidthArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MinWidthArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub gamma: f64,
    /// Also report the achieved width of the symmetrized interval function.
    #[arg(long)]
    pub symmetric: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct GridJson {
    lo: Num,
    hi: Num,
    m: u64,
    step: Num,
}

impl GridJson {
    fn new(grid: &ParamGrid, fmt: NumFmt) -> Self {
        Self {
            lo: fmt.json(grid.lo()),
            hi: fmt.json(grid.hi()),
            m: grid.m(),
            step: fmt.json(grid.step()),
        }
    }
}

#[derive(Serialize)]
struct SegmentJson {
    y_lo: Num,
    y_hi: Num,
    lower: Num,
    upper: Num,
}

#[derive(Serialize)]
struct PushJson {
    family: String,
    grid: GridJson,
    gamma: Num,
    r: u64,
    width: Num,
    exists: bool,
    constrained: bool,
    symmetric: bool,
    achieved_width: Num,
    /// `y_0..=y_m`.
    breakpoints: Vec<Num>,
    /// Bands `[y_k, y_{k+1})` before zero-length ones are dropped.
    bands: u64,
    segments: Vec<SegmentJson>,
}

pub fn run_push(args: &PushArgs) -> CliResult<()> {
    let (family, grid) = args.family.resolve()?;
    let r = args.width.resolve(&grid)?;
    let result = push(family, grid, r, args.gamma)?;
    if !result.exists() {
        return Err(CliError::NotExists);
    }
    let f = args.variant.apply(&result)?;
    let fmt = args.output.fmt();
    let out = sink(args.output.out.as_deref())?;
    match args.output.format {
        Format::Json => {
            let doc = PushJson {
                family: family_label(family),
                grid: GridJson::new(&grid, fmt),
                gamma: fmt.json(args.gamma),
                r,
                width: fmt.json(result.width()),
                exists: true,
                constrained: args.variant.constrained(),
                symmetric: args.variant.symmetric,
                achieved_width: fmt.json(f.achieved_width()),
                breakpoints: (0..=grid.m() as i64)
                    .map(|k| fmt.json(result.y(k)))
                    .collect(),
                bands: grid.m() + 1,
                segments: f
                    .segments()
                    .map(|(a, b, l, u)| SegmentJson {
                        y_lo: fmt.json(a),
                        y_hi: fmt.json(b),
                        lower: fmt.json(l),
                        upper: fmt.json(u),
                    })
                    .collect(),
            };
            write_json(out, &doc, args.output.pretty)
        }
        Format::Csv => write_segments(out, &f, fmt),
    }
}

fn write_segments(
    out: Box<dyn std::io::Write>,
    f: &IntervalFunction,
    fmt: NumFmt,
) -> CliResult<()> {
    let mut w = csv_writer(out);
    w.write_record(["y_lo", "y_hi", "lower", "upper"])
        .map_err(csv_err)?;
    for (a, b, l, u) in f.segments() {
        w.write_record([fmt.num(a), fmt.num(b), fmt.num(l), fmt.num(u)])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("write failed", e))
}

/// Minimal width plus, optionally, the symmetrized achieved width.
pub struct MinWidthReport {
    pub r: u64,
    pub width: f64,
    pub symmetric_width: Option<f64>,
    pub result: PushResult,
}

pub fn minimal(
    family: Family,
    grid: ParamGrid,
    gamma: f64,
    symmetric: bool,
) -> CliResult<MinWidthReport> {
    let mw = min_width(family, grid, gamma)?;
    let symmetric_width = if symmetric {
        let f = IntervalFunction::from_push(&mw.result)?
            .constrain()?
            .symmetrize()?;
        Some(f.achieved_width())
    } else {
        None
    };
    Ok(MinWidthReport {
        r: mw.r,
        width: mw.width(),
        symmetric_width,
        result: mw.result,
    })
}

#[derive(Serialize)]
struct MinWidthJson {
    family: String,
    grid: GridJson,
    gamma: Num,
    r: u64,
    width: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetric_width: Option<Num>,
}

pub fn run_minwidth(args: &MinWidthArgs) -> CliResult<()> {
    let (family, grid) = args.family.resolve()?;
    let report = minimal(family, grid, args.gamma, args.symmetric)?;
    let fmt = args.output.fmt();
    let out = sink(args.output.out.as_deref())?;
    match args.output.format {
        Format::Json => write_json(
            out,
            &MinWidthJson {
                family: family_label(family),
                grid: GridJson::new(&grid, fmt),
                gamma: fmt.json(args.gamma),
                r: report.r,
                width: fmt.json(report.width),
                symmetric_width: report.symmetric_width.map(|w| fmt.json(w)),
            },
            args.output.pretty,
        ),
        Format::Csv => {
            let mut w = csv_writer(out);
            let mut header = vec!["family", "m", "gamma", "r", "width"];
            let mut row = vec![
                family_label(family),
                grid.m().to_string(),
                fmt.num(args.gamma),
                report.r.to_string(),
                fmt.num(report.width),
            ];
            if let Some(sw) = report.symmetric_width {
                header.push("symmetric_width");
                row.push(fmt.num(sw));
            }
            w.write_record(&header).map_err(csv_err)?;
            w.write_record(&row).map_err(csv_err)?;
            w.flush().map_err(|e| CliError::io("write failed", e))
        }
    }
}
