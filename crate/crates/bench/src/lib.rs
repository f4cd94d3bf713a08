//! Benchmark inputs shared by the criterion targets in `benches/`.

use ipdsaw_core::ModelParams;

/// Inverse temperature used by every benchmark.
pub const BETA: f64 = 2.0;

pub fn params() -> ModelParams {
    ModelParams::new(BETA).expect("benchmark beta is in the collapsed phase")
}
