//! Log-domain mixture likelihood ratios over all anomaly placements, and
//! Monte Carlo estimation of the per-phase KL numbers.
//!
//! The mixture density for an anomaly of size `j` averages the
//! placement-specific likelihoods over all `C(L, j)` sensor subsets.
//! Against the all-pre-change density the unaffected factors cancel, so
//! the log ratio is
//!
//! ```text
//! log( e_j(exp(llr_1), .., exp(llr_L)) ) - log C(L, j)
//! ```
//!
//! with `e_j` the j-th elementary symmetric polynomial of the per-sensor
//! likelihood ratios. `e_j` is computed by the triangular recurrence
//! `E[t][s] = E[t-1][s] + E[t-1][s-1] * r_t` entirely in log space, which
//! costs `O(L * n)` per observation instead of the `C(L, j)` direct sum.
//! The direct sum survives only as a test oracle.

use rayon::prelude::*;

use crate::distributions::DensityPair;
use crate::error::Error;
use crate::model::NetworkConfig;
use crate::numeric::{ln_binomial, log_sum_exp, mean_stderr};
use crate::seed::{derive_rng, stream};
use crate::Result;

/// Log elementary symmetric polynomials `log e_s(exp(llrs))` for all
/// `s = 0..=max_size` in one triangular pass. Accumulation order is fixed
/// (ascending sensor index) for reproducibility.
fn log_elementary_symmetric_all(llrs: &[f64], max_size: usize) -> Vec<f64> {
    let mut table = vec![f64::NEG_INFINITY; max_size + 1];
    table[0] = 0.0;
    for (t, &llr) in llrs.iter().enumerate() {
        let top = max_size.min(t + 1);
        for s in (1..=top).rev() {
            table[s] = log_sum_exp(table[s], table[s - 1] + llr);
        }
    }
    table
}

/// `log e_j(exp(llrs))` without ever exponentiating a raw llr alone.
///
/// `j = 0` returns 0 (`e_0 = 1`); `j` beyond the vector length is a
/// domain error.
pub fn log_elementary_symmetric(llrs: &[f64], j: usize) -> Result<f64> {
    if j > llrs.len() {
        return Err(Error::parameter(format!(
            "subset size {j} exceeds vector length {}",
            llrs.len()
        )));
    }
    Ok(log_elementary_symmetric_all(llrs, j)[j])
}

/// Log mixture likelihood ratio for an anomaly of size `j`:
/// `log_elementary_symmetric(llrs, j) - log C(L, j)`.
pub fn mixture_llr(llrs: &[f64], j: usize) -> Result<f64> {
    if j < 1 {
        return Err(Error::parameter("mixture subset size must be >= 1"));
    }
    Ok(log_elementary_symmetric(llrs, j)? - ln_binomial(llrs.len(), j))
}

/// Per-phase log mixture likelihood ratios computed from one observation
/// vector: entry `i` (1-based) is the ratio for anomaly size `m+i-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureLlrTable {
    entries: Vec<f64>,
}

impl MixtureLlrTable {
    pub fn num_phases(&self) -> usize {
        self.entries.len()
    }

    /// Log likelihood ratio for phase `i`, 1-based.
    #[inline]
    pub fn phase(&self, i: usize) -> f64 {
        self.entries[i - 1]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Assemble a table directly from per-phase values (test helper and
    /// CLI plumbing; `phase_llrs` is the production path).
    pub fn from_entries(entries: Vec<f64>) -> Self {
        MixtureLlrTable { entries }
    }
}

/// Compute the whole per-phase table from one observation. A single
/// elementary-symmetric pass up to size `n` serves every phase.
pub fn phase_llrs(
    pair: &DensityPair,
    config: &NetworkConfig,
    x: &[f64],
) -> Result<MixtureLlrTable> {
    if x.len() != config.num_sensors() {
        return Err(Error::config(format!(
            "observation has {} components, network has {}",
            x.len(),
            config.num_sensors()
        )));
    }
    let llrs = pair.per_sensor_llr(x);
    let log_esp = log_elementary_symmetric_all(&llrs, config.final_size());
    let entries = (1..=config.num_phases())
        .map(|i| {
            let size = config.anomaly_size(i);
            log_esp[size] - ln_binomial(config.num_sensors(), size)
        })
        .collect();
    Ok(MixtureLlrTable { entries })
}

/// Monte Carlo estimate of a phase's KL number: the expected log mixture
/// likelihood ratio under the phase's own mixture model.
#[derive(Debug, Clone, PartialEq)]
pub struct KlEstimate {
    pub phase: usize,
    pub size: usize,
    /// Point estimate in nats.
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Estimate the KL number of phase `i` by sampling the mixture model: a
/// uniform random size-`(m+i-1)` subset per trial, post-change draws on
/// it, pre-change draws elsewhere.
///
/// Trials run in parallel on per-trial derived rngs; the result does not
/// depend on the worker count.
pub fn estimate_kl(
    pair: &DensityPair,
    config: &NetworkConfig,
    phase: usize,
    trials: u64,
    seed: u64,
) -> Result<KlEstimate> {
    if phase < 1 || phase > config.num_phases() {
        return Err(Error::parameter(format!(
            "phase {phase} outside 1..={}",
            config.num_phases()
        )));
    }
    if trials < 1000 {
        return Err(Error::parameter("KL estimation needs at least 1000 trials"));
    }
    let size = config.anomaly_size(phase);
    let num_sensors = config.num_sensors();

    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = derive_rng(seed, &[stream::KL, phase as u64, t]);
            let subset = rand::seq::index::sample(&mut rng, num_sensors, size);
            let mut affected = vec![false; num_sensors];
            for s in subset {
                affected[s] = true;
            }
            let x: Vec<f64> = affected
                .iter()
                .map(|&hit| {
                    if hit {
                        pair.post().sample(&mut rng)
                    } else {
                        pair.pre().sample(&mut rng)
                    }
                })
                .collect();
            let llrs = pair.per_sensor_llr(&x);
            mixture_llr(&llrs, size).expect("size <= L by construction")
        })
        .collect();

    let (estimate, stderr) = mean_stderr(&values);
    Ok(KlEstimate {
        phase,
        size,
        estimate,
        stderr,
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn esp_order_zero_is_one() {
        let llrs = [3.0, -1.0, 0.5];
        assert_eq!(log_elementary_symmetric(&llrs, 0).unwrap(), 0.0);
    }

    #[test]
    fn esp_single_element() {
        assert_eq!(log_elementary_symmetric(&[2.5], 1).unwrap(), 2.5);
    }

    #[test]
    fn esp_four_ones_choose_two() {
        // e_2(1,1,1,1) = C(4,2) = 6
        let got = log_elementary_symmetric(&[0.0; 4], 2).unwrap();
        assert!((got - 6f64.ln()).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn esp_domain_guard() {
        assert!(log_elementary_symmetric(&[0.0; 3], 4).is_err());
        assert!(mixture_llr(&[0.0; 3], 0).is_err());
    }

    #[test]
    fn mixture_llr_equal_components() {
        // all C(L,j) products identical => j * a exactly up to rounding
        for (l, j, a) in [(5, 2, 0.7), (8, 3, -1.2), (4, 4, 2.0)] {
            let llrs = vec![a; l];
            let got = mixture_llr(&llrs, j).unwrap();
            assert!((got - j as f64 * a).abs() < 1e-12, "L={l} j={j}: got {got}");
        }
    }

    #[test]
    fn mixture_llr_hand_enumerated_pairs() {
        // ratios (1, 2, 3), pairs multiply to {2, 3, 6}: mean 11/3
        let llrs = [1f64.ln(), 2f64.ln(), 3f64.ln()];
        let got = mixture_llr(&llrs, 2).unwrap();
        assert!((got - (11.0 / 3.0f64).ln()).abs() < 1e-12, "got {got}");
        assert!((got - 1.299283).abs() < 1e-6);
    }

    #[test]
    fn phase_table_single_sensor() {
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(1, 1, 1).unwrap();
        let table = phase_llrs(&pair, &config, &[0.9]).unwrap();
        assert_eq!(table.num_phases(), 1);
        assert!((table.phase(1) - (0.9 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn phase_table_symmetric_zero() {
        // per-sensor llrs all zero => every mixture ratio is 1
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(3, 1, 3).unwrap();
        let table = phase_llrs(&pair, &config, &[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(table.num_phases(), 3);
        for i in 1..=3 {
            assert!(table.phase(i).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_table_length_mismatch() {
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(3, 1, 3).unwrap();
        assert!(phase_llrs(&pair, &config, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn monotone_in_each_component() {
        let base = [0.3, -0.8, 1.1, 0.0, -2.0];
        for j in 1..=base.len() {
            for idx in 0..base.len() {
                let mut bumped = base;
                bumped[idx] += 0.25;
                let lo = mixture_llr(&base, j).unwrap();
                let hi = mixture_llr(&bumped, j).unwrap();
                assert!(hi > lo, "j={j} idx={idx}: {hi} !> {lo}");
            }
        }
    }

    #[test]
    fn kl_single_sensor_is_half_nat() {
        // KL(N(1,1) || N(0,1)) = 1/2
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(1, 1, 1).unwrap();
        let est = estimate_kl(&pair, &config, 1, 200_000, 404).unwrap();
        assert!(
            (est.estimate - 0.5).abs() <= 3.0 * est.stderr,
            "KL = {} +- {}",
            est.estimate,
            est.stderr
        );
        assert!(est.estimate - 3.0 * est.stderr > 0.0);
    }

    #[test]
    fn kl_full_network_is_sum_of_kls() {
        // phase 3 of (L=3, m=1, n=3) affects every sensor: one subset,
        // so the "mixture" is a product and the KL is 3 * 1/2
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(3, 1, 3).unwrap();
        let est = estimate_kl(&pair, &config, 3, 200_000, 405).unwrap();
        assert!(
            (est.estimate - 1.5).abs() <= 3.0 * est.stderr,
            "KL = {} +- {}",
            est.estimate,
            est.stderr
        );
    }

    #[test]
    fn kl_guards() {
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(3, 1, 3).unwrap();
        assert!(estimate_kl(&pair, &config, 0, 10_000, 1).is_err());
        assert!(estimate_kl(&pair, &config, 4, 10_000, 1).is_err());
        assert!(estimate_kl(&pair, &config, 1, 10, 1).is_err());
    }

    #[test]
    fn kl_is_deterministic_and_worker_independent() {
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(3, 1, 2).unwrap();
        let a = estimate_kl(&pair, &config, 1, 20_000, 7).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate_kl(&pair, &config, 1, 20_000, 7).unwrap());
        assert_eq!(a.estimate.to_bits(), single.estimate.to_bits());
        assert_eq!(a.stderr.to_bits(), single.stderr.to_bits());
    }
}
