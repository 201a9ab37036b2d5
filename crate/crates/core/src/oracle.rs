//! Exponential-time reference implementations used by tests.
//!
//! Everything here is deliberately naive: explicit subset sums in place
//! of the elementary-symmetric recurrence, explicit phase-path
//! maximization in place of the detector recursion, and the likelihood
//! ratios of a fixed trajectory hypothesis versus the mixture hypothesis.
//! Budget guards keep accidental misuse from hanging a test run.

use crate::detector::DetectorParams;
use crate::distributions::DensityPair;
use crate::error::Error;
use crate::mixture::phase_llrs;
use crate::model::{NetworkConfig, PhaseSchedule};
use crate::numeric::{ln_binomial, log_sum_exp};
use crate::Result;

/// Cap on `C(L, j)` for subset enumeration.
const SUBSET_BUDGET: f64 = 1e6;

/// Cap on enumerated phase paths.
const PATH_BUDGET: u64 = 1_000_000;

fn for_each_subset(n: usize, j: usize, mut visit: impl FnMut(&[usize])) {
    // lexicographic j-combinations of 0..n
    let mut idx: Vec<usize> = (0..j).collect();
    if j > n {
        return;
    }
    loop {
        visit(&idx);
        // advance
        let mut i = j;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - j {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for t in i + 1..j {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Log mixture likelihood ratio by literal subset enumeration: the log of
/// the arithmetic mean of `exp(sum of member llrs)` over all size-`j`
/// subsets.
pub fn mixture_llr_enum(llrs: &[f64], j: usize) -> Result<f64> {
    let n = llrs.len();
    if j < 1 || j > n {
        return Err(Error::parameter(format!("subset size {j} outside 1..={n}")));
    }
    if ln_binomial(n, j) > SUBSET_BUDGET.ln() {
        return Err(Error::Budget(format!(
            "C({n}, {j}) exceeds {SUBSET_BUDGET} subsets"
        )));
    }
    let mut acc = f64::NEG_INFINITY;
    for_each_subset(n, j, |subset| {
        let s: f64 = subset.iter().map(|&i| llrs[i]).sum();
        acc = log_sum_exp(acc, s);
    });
    Ok(acc - ln_binomial(n, j))
}

/// `W[k]` by explicit maximization over monotone phase paths.
///
/// A path assigns each time `0..=k` a phase in `0..=P`, non-decreasing.
/// Its score collects, for every positive step, the phase's mixture llr
/// plus `log(1 - rho_i)`, and for every phase increment the transition
/// sum of log-rho terms; the all-zero path scores 0, which realizes the
/// floor of the recursion. The free choice of phase at time 0 mirrors the
/// zero initialization of every accumulator.
pub fn batch_statistic(
    observations: &[Vec<f64>],
    params: &DetectorParams,
    pair: &DensityPair,
    config: &NetworkConfig,
) -> Result<f64> {
    let k = observations.len();
    let num_phases = params.num_phases();
    if k > 10 || num_phases > 4 {
        return Err(Error::Budget(format!(
            "path enumeration limited to k <= 10 and <= 4 phases, got k={k}, phases={num_phases}"
        )));
    }
    let paths_bound = count_monotone_paths(k + 1, num_phases + 1);
    if paths_bound > PATH_BUDGET {
        return Err(Error::Budget(format!(
            "{paths_bound} paths exceed {PATH_BUDGET}"
        )));
    }

    let tables: Vec<_> = observations
        .iter()
        .map(|x| phase_llrs(pair, config, x))
        .collect::<Result<_>>()?;

    // depth-first over non-decreasing phase assignments
    let mut best = f64::NEG_INFINITY;
    let mut stack: Vec<(usize, usize, f64)> = (0..=num_phases).map(|p| (1, p, 0.0)).collect();
    while let Some((t, phase, score)) = stack.pop() {
        if t > k {
            if score > best {
                best = score;
            }
            continue;
        }
        let table: &crate::mixture::MixtureLlrTable = &tables[t - 1];
        for next in phase..=num_phases {
            let mut s = score;
            if next > phase {
                s += params.transition_sum(phase, next);
            }
            if next >= 1 {
                s += table.phase(next) + params.log_one_minus_rho(next);
            }
            stack.push((t + 1, next, s));
        }
    }
    Ok(best.max(0.0))
}

fn count_monotone_paths(slots: usize, values: usize) -> u64 {
    // C(slots + values - 1, values - 1)
    let mut acc = 1.0f64;
    for t in 1..values {
        acc *= (slots + t) as f64 / t as f64;
    }
    acc.round() as u64
}

/// A fully specified alternative: changepoint, transient durations, and
/// the explicit affected set per time step.
#[derive(Debug, Clone)]
pub struct FixedHypothesis {
    pub schedule: PhaseSchedule,
    /// Sensor sets (1-based labels), indexed by time `k` as `trajectory[k-1]`.
    pub trajectory: Vec<Vec<usize>>,
}

impl FixedHypothesis {
    /// Check that every provided set has the cardinality its phase
    /// requires and stays inside the network.
    pub fn validate(&self, config: &NetworkConfig) -> Result<()> {
        for (idx, set) in self.trajectory.iter().enumerate() {
            let k = idx as u64 + 1;
            let size = config.anomaly_size(self.schedule.phase_at(k));
            if set.len() != size {
                return Err(Error::config(format!(
                    "trajectory at k={k} has {} sensors, phase requires {size}",
                    set.len()
                )));
            }
            if set.iter().any(|&s| s < 1 || s > config.num_sensors()) {
                return Err(Error::config(format!(
                    "trajectory at k={k} leaves the network"
                )));
            }
        }
        Ok(())
    }
}

/// Log likelihood ratio at time `k` of the fixed-trajectory hypothesis
/// against "no anomaly ever": the sum over post-change times of the
/// affected sensors' llrs. Empty product convention: 0 when `k` precedes
/// the changepoint.
pub fn gamma_fixed(
    observations: &[Vec<f64>],
    hyp: &FixedHypothesis,
    pair: &DensityPair,
    k: usize,
) -> Result<f64> {
    if k > observations.len() {
        return Err(Error::parameter(format!(
            "k={k} beyond the {} recorded observations",
            observations.len()
        )));
    }
    let mut total = 0.0;
    for t in 1..=k {
        if hyp.schedule.phase_at(t as u64) == 0 {
            continue;
        }
        let set = hyp.trajectory.get(t - 1).ok_or_else(|| {
            Error::config(format!("fixed hypothesis has no affected set for k={t}"))
        })?;
        let x = &observations[t - 1];
        total += set.iter().map(|&s| pair.llr(x[s - 1])).sum::<f64>();
    }
    Ok(total)
}

/// Log likelihood ratio at time `k` of the mixture hypothesis (anomaly
/// appears at `nu`, placements uniform each step) against "no anomaly
/// ever". Uses the subset-enumeration kernel so it stays independent of
/// the production mixture path.
pub fn l_mixture(
    observations: &[Vec<f64>],
    nu: u64,
    durations: &[u64],
    pair: &DensityPair,
    config: &NetworkConfig,
    k: usize,
) -> Result<f64> {
    if k > observations.len() {
        return Err(Error::parameter(format!(
            "k={k} beyond the {} recorded observations",
            observations.len()
        )));
    }
    let schedule = PhaseSchedule::new(nu, durations.to_vec())?;
    let mut total = 0.0;
    for t in 1..=k {
        let phase = schedule.phase_at(t as u64);
        if phase == 0 {
            continue;
        }
        let size = config.anomaly_size(phase);
        let llrs = pair.per_sensor_llr(&observations[t - 1]);
        total += mixture_llr_enum(&llrs, size)?;
    }
    Ok(total)
}
