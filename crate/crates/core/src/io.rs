//! Columnar CSV files for tables, with a JSON metadata sidecar.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces the stored values bit for bit.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExcursionTable, LogWeight, PartitionSeries, Variant};

/// Layout version of the CSV files and sidecars written here.
pub const FORMAT_VERSION: u32 = 1;

/// Crate version recorded in every sidecar.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableContent {
    Partition,
    Excursion,
}

/// Metadata stored next to a table CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub code_version: String,
    pub content: TableContent,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

impl Sidecar {
    pub fn for_series(series: &PartitionSeries) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            code_version: CODE_VERSION.to_owned(),
            content: TableContent::Partition,
            beta: series.beta,
            variant: Some(series.variant),
            l_max: Some(series.l_max()),
            n: None,
            area_cap: None,
            height_cap: None,
            tail_bound: None,
        }
    }

    pub fn for_excursion(table: &ExcursionTable) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            code_version: CODE_VERSION.to_owned(),
            content: TableContent::Excursion,
            beta: table.beta,
            variant: None,
            l_max: None,
            n: Some(table.n),
            area_cap: Some(table.area_cap),
            height_cap: Some(table.height_cap),
            tail_bound: Some(table.tail_bound),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar fields serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sidecar: Self = serde_json::from_str(text).map_err(|e| Error::Format {
            op: "Sidecar::from_json",
            detail: e.to_string(),
        })?;
        if sidecar.format_version != FORMAT_VERSION {
            return Err(Error::Format {
                op: "Sidecar::from_json",
                detail: format!("unsupported format_version {}", sidecar.format_version),
            });
        }
        Ok(sidecar)
    }
}

pub fn write_series_csv<W: Write>(series: &PartitionSeries, mut out: W) -> std::io::Result<()> {
    writeln!(out, "L,log_value")?;
    for (l, v) in series.values.iter().enumerate() {
        writeln!(out, "{l},{:.16e}", v.ln())?;
    }
    Ok(())
}

pub fn write_excursion_csv<W: Write>(table: &ExcursionTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "k,prob")?;
    for (k, p) in table.probabilities.iter().enumerate() {
        writeln!(out, "{k},{p:.16e}")?;
    }
    Ok(())
}

/// Parses a two-column file whose first column counts `0, 1, 2, ...`.
fn read_columns<R: BufRead>(op: &'static str, header: &str, input: R) -> Result<Vec<f64>> {
    let bad = |detail: String| Error::Format { op, detail };
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| bad("empty input".into()))?
        .map_err(|e| bad(e.to_string()))?;
    if first.trim() != header {
        return Err(bad(format!("expected header {header:?}, found {first:?}")));
    }
    let mut values = Vec::new();
    for line in lines {
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (idx, val) = line
            .split_once(',')
            .ok_or_else(|| bad(format!("row {line:?} has no comma")))?;
        let idx: usize = idx.trim().parse().map_err(|e| bad(format!("{idx:?}: {e}")))?;
        if idx != values.len() {
            return Err(bad(format!("row index {idx} out of sequence")));
        }
        values.push(val.trim().parse::<f64>().map_err(|e| bad(format!("{val:?}: {e}")))?);
    }
    Ok(values)
}

pub fn read_series_csv<R: BufRead>(sidecar: &Sidecar, input: R) -> Result<PartitionSeries> {
    let op = "read_series_csv";
    let variant = match (sidecar.content, sidecar.variant) {
        (TableContent::Partition, Some(v)) => v,
        _ => {
            return Err(Error::Format {
                op,
                detail: "sidecar does not describe a partition series".into(),
            })
        }
    };
    let values: Vec<LogWeight> = read_columns(op, "L,log_value", input)?
        .into_iter()
        .map(LogWeight::from_log)
        .collect();
    if values.is_empty() || sidecar.l_max.is_some_and(|l| l + 1 != values.len()) {
        return Err(Error::Format {
            op,
            detail: format!("row count {} disagrees with sidecar", values.len()),
        });
    }
    Ok(PartitionSeries {
        variant,
        beta: sidecar.beta,
        values,
    })
}

pub fn read_excursion_csv<R: BufRead>(sidecar: &Sidecar, input: R) -> Result<ExcursionTable> {
    let op = "read_excursion_csv";
    let (TableContent::Excursion, Some(n), Some(area_cap), Some(height_cap), Some(tail_bound)) = (
        sidecar.content,
        sidecar.n,
        sidecar.area_cap,
        sidecar.height_cap,
        sidecar.tail_bound,
    ) else {
        return Err(Error::Format {
            op,
            detail: "sidecar does not describe an excursion table".into(),
        });
    };
    let probabilities = read_columns(op, "k,prob", input)?;
    if probabilities.len() != area_cap + 1 {
        return Err(Error::Format {
            op,
            detail: format!("{} rows for area_cap {area_cap}", probabilities.len()),
        });
    }
    Ok(ExcursionTable {
        beta: sidecar.beta,
        n,
        area_cap,
        height_cap,
        probabilities,
        tail_bound,
    })
}
