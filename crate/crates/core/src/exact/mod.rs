//! Exact partition functions, excursion probabilities, and the identities
//! tying them to the closed-form constants.

mod enumerate;
mod excursion;
mod identities;
mod logweight;
mod stretch;
mod trajectory;

use crate::error::{Error, Result};

pub use enumerate::{enumerate_all, evaluate_counts, exact_polynomial, ENUMERATE_MAX, POLYNOMIAL_MAX};
pub use excursion::{default_height_cap, excursion_bytes, excursion_sweep, excursion_table, ExcursionTable};
pub use identities::{
    asymptotics_fit, delta_series, llt_ratio, llt_scan, r_beta_series, renewal_check, walk_rep_series,
    walk_rep_single_bead, AsymptoticsFit, DeltaSeriesCheck, LltPoint, RenewalCheck, FIT_MIN_WINDOW, RENEWAL_MAX,
};
pub use logweight::LogWeight;
pub use stretch::{series_from_table, stretch_dp, PartitionSeries, StretchTable, TableKind, Variant};
pub use trajectory::{touching, Trajectory};

/// Memory cap for dynamic-programming tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableBudget {
    pub bytes: u64,
}

impl Default for TableBudget {
    fn default() -> Self {
        Self { bytes: 2 << 30 }
    }
}

impl TableBudget {
    pub(crate) fn check(&self, op: &'static str, needed: u64) -> Result<()> {
        if needed > self.bytes {
            Err(Error::Memory {
                op,
                needed,
                budget: self.bytes,
            })
        } else {
            Ok(())
        }
    }
}
