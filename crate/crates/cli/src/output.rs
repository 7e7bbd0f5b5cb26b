use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use carleman::Error;
use serde_json::{Map, Value};

use crate::Format;

/// A failed run: a machine-readable kind, a message and the exit code.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    pub code: u8,
}

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RESTRICTIVE: u8 = 3;
pub const EXIT_NO_FIXED_POINT: u8 = 4;
pub const EXIT_OUT_OF_CHART: u8 = 5;
pub const EXIT_NON_CONVERGENT: u8 = 6;
pub const EXIT_NUMERICAL: u8 = 7;
pub const EXIT_INPUT: u8 = 8;
pub const EXIT_IO: u8 = 9;

impl Failure {
    pub fn usage(message: String) -> Self {
        Self {
            kind: "usage",
            message,
            code: EXIT_USAGE,
        }
    }

    /// Help and version requests print normally and exit 0; every other
    /// parse failure is folded onto one line.
    pub fn from_clap(e: &clap::Error) -> Self {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            e.exit();
        }
        let text = e.render().to_string();
        let message = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with("For more information"))
            .map(|l| l.strip_prefix("error: ").unwrap_or(l))
            .collect::<Vec<_>>()
            .join(" ");
        Self::usage(message)
    }

    pub fn io(path: &Path, e: &std::io::Error) -> Self {
        Self {
            kind: "io",
            message: format!("{}: {e}", path.display()),
            code: EXIT_IO,
        }
    }

    pub fn report(&self) -> ExitCode {
        let message = self.message.replace(['\n', '\r'], " ");
        eprintln!("error: kind={} message={message}", self.kind);
        ExitCode::from(self.code)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::RestrictiveConditionViolated { .. } => EXIT_RESTRICTIVE,
            Error::FixedPointNotFound { .. } => EXIT_NO_FIXED_POINT,
            Error::OutOfChart { .. } | Error::ChartEscape { .. } | Error::OrbitEscaped { .. } => {
                EXIT_OUT_OF_CHART
            }
            Error::NonConvergent { .. } => EXIT_NON_CONVERGENT,
            Error::ResonantEigenvalues { .. }
            | Error::Superattracting { .. }
            | Error::NotUpperTriangular { .. }
            | Error::ShiftInconsistent { .. }
            | Error::BranchMismatch { .. }
            | Error::ZeroLinearTerm { .. }
            | Error::NonZeroConstant { .. } => EXIT_NUMERICAL,
            Error::EmptySeries
            | Error::BaseMismatch { .. }
            | Error::DimensionMismatch { .. }
            | Error::DegenerateOrbit(_)
            | Error::Domain(_)
            | Error::Parse(_) => EXIT_INPUT,
        };
        Self {
            kind: e.kind(),
            message: e.to_string(),
            code,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(v + 0.0).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
fn format_number(v: f64) -> String {
    let v = v + 0.0;
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// Rows under fixed column names, rendered as CSV or a JSON array of objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).expect("in-memory write");
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(k, v)| (k.to_string(), v.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                json_string(&Value::Array(rows))
            }
        }
    }
}

pub fn json_string(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::io(p, &e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::io(Path::new("<stdout>"), &e))
        }
    }
}
