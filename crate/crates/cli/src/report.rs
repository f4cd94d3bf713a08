//! Machine-readable reports and the number formatting shared by all outputs.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// One pass/fail verdict. Failures name the module, operation and tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
    pub module: &'static str,
    pub op: &'static str,
    pub tolerance: String,
    pub measured: f64,
    pub passed: bool,
}

impl Check {
    pub fn named(id: impl Into<String>, module: &'static str, op: &'static str) -> CheckBuilder {
        CheckBuilder {
            id: id.into(),
            module,
            op,
        }
    }

    pub fn failure_line(&self) -> String {
        format!(
            "FAIL {}: {}::{} measured {:.16e}, tolerance {}",
            self.id, self.module, self.op, self.measured, self.tolerance
        )
    }
}

pub struct CheckBuilder {
    id: String,
    module: &'static str,
    op: &'static str,
}

impl CheckBuilder {
    fn finish(self, tolerance: String, measured: f64, passed: bool) -> Check {
        Check {
            id: self.id,
            criterion: None,
            module: self.module,
            op: self.op,
            tolerance,
            measured,
            passed,
        }
    }

    /// `measured < limit`; NaN fails.
    pub fn below(self, measured: f64, limit: f64) -> Check {
        self.finish(format!("< {limit:e}"), measured, measured < limit)
    }

    /// `lo <= measured <= hi`.
    pub fn within(self, measured: f64, lo: f64, hi: f64) -> Check {
        self.finish(
            format!("in [{lo:e}, {hi:e}]"),
            measured,
            measured >= lo && measured <= hi,
        )
    }

    /// A yes/no property; `measured` carries the quantity it was decided from.
    pub fn holds(self, what: &str, measured: f64, ok: bool) -> Check {
        self.finish(what.to_owned(), measured, ok)
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

impl Report {
    pub fn new(command: &'static str, config: Value, results: Value, checks: Vec<Check>) -> Self {
        let all_passed = checks.iter().all(|c| c.passed);
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            config,
            results,
            checks,
            all_passed,
        }
    }

    pub fn write_json<W: Write>(&self, out: W) -> io::Result<()> {
        write_json(self, out)
    }
}

/// Pretty JSON with every float printed to 17 significant digits.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFloats::default());
    value.serialize(&mut ser).map_err(io::Error::other)?;
    writeln!(out)
}

/// Pretty printer whose floats round-trip exactly.
#[derive(Default)]
struct SciFloats(PrettyFormatter<'static>);

impl Formatter for SciFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Flat CSV from a list of JSON objects, columns in field order.
pub fn write_rows_csv<W: Write>(rows: &[Value], mut out: W) -> io::Result<()> {
    let Some(Value::Object(first)) = rows.first() else {
        return Ok(());
    };
    let header: Vec<&str> = first.keys().map(String::as_str).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = header
            .iter()
            .map(|k| match row.get(*k) {
                Some(Value::Number(n)) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)),
                Some(Value::Number(n)) => n.to_string(),
                Some(Value::String(s)) => s.clone(),
                Some(Value::Bool(b)) => b.to_string(),
                Some(Value::Null) | None => String::new(),
                Some(other) => other.to_string(),
            })
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
