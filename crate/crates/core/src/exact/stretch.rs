//! Transfer recursion over stretches.
//!
//! `P[l][m]` is the weight of configurations of length `l` whose last stretch
//! is `+m` (by symmetry also those ending in `-m`), and `W0[l]` the weight of
//! those ending in a zero stretch. Appending `+m'` to a configuration of
//! length `l` gives length `l + m' + 1`, with weight `e^{beta min(m, m')}` if
//! the previous stretch was `-m` and 1 otherwise. Splitting the min-kernel
//! at `m = m'` makes every target cell O(1) after a linear pass over its
//! source row, so a table up to `l_max` costs `O(l_max^2)`.

use serde::{Deserialize, Serialize};

use super::logweight::{log_add, LogWeight};
use super::TableBudget;
use crate::error::{domain, Error, Result};
use crate::laplace::ModelParams;

/// Which family of configurations a table counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableKind {
    /// all configurations
    Full,
    /// nonzero stretches with alternating signs only
    Circ,
}

/// Partition-function variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `Z_L`, all configurations
    Full,
    /// `Z°_L`, single beads
    Circ,
    /// `Z^_L`, extended beads following another bead
    HatCirc,
    /// `Z¯_L`, first extended bead
    BarCirc,
    /// `Z^c_L`, configurations ending in a nonzero stretch (`Z^c_0 = 1`)
    CEnd,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Full,
        Variant::Circ,
        Variant::HatCirc,
        Variant::BarCirc,
        Variant::CEnd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Circ => "circ",
            Variant::HatCirc => "hat_circ",
            Variant::BarCirc => "bar_circ",
            Variant::CEnd => "c_end",
        }
    }

    fn kind(self) -> TableKind {
        match self {
            Variant::Full | Variant::CEnd => TableKind::Full,
            _ => TableKind::Circ,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| domain("Variant::from_str", format!("unknown variant {s:?}")))
    }
}

/// Partition values `values[L]` for `L = 0..=l_max` of one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSeries {
    pub variant: Variant,
    pub beta: f64,
    pub values: Vec<LogWeight>,
}

impl PartitionSeries {
    pub fn l_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, l: usize) -> LogWeight {
        self.values[l]
    }
}

/// Completed transfer table; immutable once built.
#[derive(Debug, Clone)]
pub struct StretchTable {
    beta: f64,
    l_max: usize,
    kind: TableKind,
    /// `log P[l][m]` for `1 <= m <= l - 1`, row `l` starting at `row_start(l)`
    cells: Vec<f64>,
    /// `log W0[l]`, empty for circ tables
    zeros: Vec<f64>,
    /// `log sum_m P[l][m]`
    row_sums: Vec<f64>,
}

fn row_start(l: usize) -> usize {
    if l < 2 {
        0
    } else {
        (l - 1) * (l - 2) / 2
    }
}

fn indicator(cond: bool) -> f64 {
    if cond {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

impl StretchTable {
    /// Bytes a table up to `l_max` occupies.
    pub fn bytes_needed(l_max: usize, kind: TableKind) -> u64 {
        let cells = row_start(l_max + 1) as u64;
        let rows = (l_max as u64 + 1) * if kind == TableKind::Full { 2 } else { 1 };
        8 * (cells + rows)
    }

    pub fn build(params: &ModelParams, l_max: usize, kind: TableKind, budget: &TableBudget) -> Result<Self> {
        if l_max < 1 {
            return Err(domain("stretch_dp", "l_max must be at least 1"));
        }
        budget.check("stretch_dp", Self::bytes_needed(l_max, kind))?;
        let beta = params.beta();
        let mut cells = vec![f64::NEG_INFINITY; row_start(l_max + 1)];
        let mut zeros = if kind == TableKind::Full {
            vec![f64::NEG_INFINITY; l_max + 1]
        } else {
            Vec::new()
        };
        let mut row_sums = vec![f64::NEG_INFINITY; l_max + 1];
        let decay = (-beta).exp();
        let mut lin: Vec<f64> = Vec::with_capacity(l_max);
        let mut suffix: Vec<f64> = Vec::with_capacity(l_max + 1);

        for l in 0..=l_max {
            let row = &cells[row_start(l)..row_start(l + 1)];
            // row entry k holds m = k + 1
            let mx = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            lin.clear();
            if mx > f64::NEG_INFINITY {
                lin.extend(row.iter().map(|&c| (c - mx).exp()));
            }
            let total: f64 = lin.iter().sum();
            let log_sum = if lin.is_empty() {
                f64::NEG_INFINITY
            } else {
                mx + total.ln()
            };
            row_sums[l] = log_sum;

            let base = match kind {
                TableKind::Full => {
                    let b = log_add(log_add(indicator(l == 0), zeros[l]), log_sum);
                    if l < l_max {
                        zeros[l + 1] = log_add(log_add(indicator(l == 0), zeros[l]), std::f64::consts::LN_2 + log_sum);
                    }
                    b
                }
                TableKind::Circ => indicator(l == 0),
            };
            if l + 2 > l_max {
                continue;
            }
            // suffix[k] = sum of lin over entries with m > k
            suffix.clear();
            suffix.resize(lin.len() + 1, 0.0);
            for k in (0..lin.len()).rev() {
                suffix[k] = suffix[k + 1] + lin[k];
            }
            // opposite-sign term for m' >= l - 1 is the constant sum_m P e^{beta m}
            let mut tail_log = f64::NEG_INFINITY;
            let mut r = 0.0;
            let max_target = l_max - l - 1;
            for mp in 1..=max_target {
                let lp = l + mp + 1;
                let opposite = if mp <= lin.len() {
                    // r = sum_{m <= m'} lin_m e^{-beta (m' - m)}
                    r = decay * r + lin[mp - 1];
                    let s = r + suffix[mp];
                    if mp == lin.len() {
                        tail_log = mx + beta * mp as f64 + r.ln();
                    }
                    if s > 0.0 {
                        mx + beta * mp as f64 + s.ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    tail_log
                };
                cells[row_start(lp) + mp - 1] = log_add(base, opposite);
            }
        }
        Ok(Self {
            beta,
            l_max,
            kind,
            cells,
            zeros,
            row_sums,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    /// `log P[l][m]`, or `-inf` outside the populated range.
    pub fn log_cell(&self, l: usize, m: usize) -> f64 {
        if m == 0 || m >= l || l > self.l_max {
            f64::NEG_INFINITY
        } else {
            self.cells[row_start(l) + m - 1]
        }
    }

    /// `log W0[l]` (full tables only).
    pub fn log_zero_end(&self, l: usize) -> f64 {
        self.zeros.get(l).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// `log sum_m P[l][m]`.
    pub fn log_row_sum(&self, l: usize) -> f64 {
        self.row_sums[l]
    }

    /// Total weight of length-`l` configurations represented by the table.
    pub fn total(&self, l: usize) -> LogWeight {
        let nonzero = std::f64::consts::LN_2 + self.row_sums[l];
        LogWeight::from_log(match self.kind {
            TableKind::Full => log_add(nonzero, self.zeros[l]),
            TableKind::Circ => nonzero,
        })
    }
}

/// Partition function series of one variant for `L = 0..=l_max`.
pub fn stretch_dp(
    params: &ModelParams,
    l_max: usize,
    variant: Variant,
    budget: &TableBudget,
) -> Result<PartitionSeries> {
    let table = StretchTable::build(params, l_max, variant.kind(), budget)?;
    Ok(series_from_table(&table, variant))
}

/// Extract a variant from a table of the matching kind.
pub fn series_from_table(table: &StretchTable, variant: Variant) -> PartitionSeries {
    assert_eq!(
        table.kind,
        variant.kind(),
        "variant {} needs a {:?} table",
        variant.name(),
        variant.kind()
    );
    let n = table.l_max + 1;
    let values = match variant {
        Variant::Full => (0..n)
            .map(|l| if l == 0 { LogWeight::ONE } else { table.total(l) })
            .collect(),
        Variant::CEnd => (0..n)
            .map(|l| {
                if l == 0 {
                    LogWeight::ONE
                } else {
                    LogWeight::from_log(std::f64::consts::LN_2 + table.row_sums[l])
                }
            })
            .collect(),
        Variant::Circ => (0..n)
            .map(|l| if l == 0 { LogWeight::ZERO } else { table.total(l) })
            .collect(),
        Variant::HatCirc | Variant::BarCirc => {
            let circ: Vec<LogWeight> = (0..n)
                .map(|l| if l == 0 { LogWeight::ZERO } else { table.total(l) })
                .collect();
            let half = LogWeight::from_value(0.5);
            let mut below = LogWeight::ZERO;
            let mut out = Vec::with_capacity(n);
            for &c in &circ {
                out.push(if variant == Variant::HatCirc {
                    half * c + below
                } else {
                    c + below
                });
                below += c;
            }
            out
        }
    };
    PartitionSeries {
        variant,
        beta: table.beta,
        values,
    }
}
