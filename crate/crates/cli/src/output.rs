//! Number formatting and output sinks.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::{CliError, CliResult};

/// `%.17g`: 17 significant digits, trailing zeros removed, exponent form
/// outside `1e-4 <= |x| < 1e17`.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Formats a value for machine output or, with `pretty`, at three decimals.
#[derive(Debug, Clone, Copy)]
pub struct NumFmt {
    pub pretty: bool,
}

impl NumFmt {
    pub fn num(&self, x: f64) -> String {
        if self.pretty && x.is_finite() {
            format!("{x:.3}")
        } else {
            g17(x)
        }
    }

    pub fn json(&self, x: f64) -> Num {
        Num {
            value: x,
            pretty: self.pretty,
        }
    }
}

/// JSON number that keeps infinities as the strings `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy)]
pub struct Num {
    value: f64,
    pretty: bool,
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.value.is_finite() {
            if self.pretty {
                s.serialize_f64((self.value * 1000.0).round() / 1000.0)
            } else {
                s.serialize_f64(self.value)
            }
        } else {
            s.serialize_str(&g17(self.value))
        }
    }
}

/// Stdout or a file, buffered.
pub fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match out {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

/// CSV writer with LF line endings over `sink`.
pub fn csv_writer(sink: Box<dyn Write>) -> csv::Writer<Box<dyn Write>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

pub fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io("write failed", io),
        other => CliError::Parse(format!("{other:?}")),
    }
}

pub fn write_json<T: Serialize>(
    mut sink: Box<dyn Write>,
    value: &T,
    pretty: bool,
) -> CliResult<()> {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| CliError::Parse(e.to_string()))?;
    writeln!(sink, "{text}")
        .and_then(|_| sink.flush())
        .map_err(|e| CliError::io("write failed", e))
}
