//! Shared input builders for the kernel benchmarks.

use rand::Rng;

use wdcusum::seed::derive_rng;

/// Deterministic per-sensor llr vectors for benchmarking the mixture
/// kernels.
pub fn llr_inputs(num_sensors: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = derive_rng(0xBE9C, &[num_sensors as u64]);
    (0..count)
        .map(|_| {
            (0..num_sensors)
                .map(|_| rng.random_range(-4.0..4.0))
                .collect()
        })
        .collect()
}
