//! Shared fixtures for the criterion benchmarks.

use cubic_cw_core::ModelParams;

/// Pure-phase couplings used across benchmarks: paramagnetic, polarized and
/// a cubic-dominated point.
pub const COUPLINGS: [(f64, f64); 3] = [(0.2, 0.5), (0.2, 1.1), (0.5, 0.8)];

/// Sizes for exact-law benchmarks.
pub const SIZES: [usize; 3] = [1 << 10, 1 << 13, 1 << 16];

pub fn params(k: f64, j: f64, n: usize) -> ModelParams {
    ModelParams::new(k, j, n).expect("benchmark parameters are valid")
}
