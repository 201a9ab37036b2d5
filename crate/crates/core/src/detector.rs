//! The mixture weighted-dynamic CuSum statistic, its stopping rule, and
//! parameter construction.
//!
//! With `P = n - m + 1` phases the statistic keeps one accumulator per
//! phase:
//!
//! ```text
//! omega_i[k] = max_{0 <= j <= i} ( omega_j[k-1] + sum_{r=j}^{i-1} log rho_r )
//!              + llr_i[k] + log(1 - rho_i)
//! W[k]       = max( omega_1[k], .., omega_P[k], 0 )
//! ```
//!
//! with the conventions `rho_0 = 1` (no cost to leave pre-change),
//! `rho_P = 0` (no leak out of the final phase), `omega_0[k] = 0` for all
//! `k`, and `omega_i[0] = 0`. All previous accumulators are snapshot
//! before any write: an in-place left-to-right sweep would corrupt the
//! `j < i` reads. The alarm fires at the first `k` with `W[k] >= b`.

use crate::distributions::DensityPair;
use crate::error::Error;
use crate::mixture::{phase_llrs, MixtureLlrTable};
use crate::model::{NetworkConfig, ObservationStream, ObservationVector};
use crate::Result;

/// Phase-transition weights and the alarm threshold.
///
/// The conventions `rho_0 = 1` and `rho_{P} = 0` are never stored: they
/// enter only as `log rho_0 = 0` and `log(1 - rho_P) = 0`, so `log 0`
/// never materializes.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    rho: Vec<f64>,
    threshold: f64,
    /// cum_log_rho[t] = sum of log rho_r for r = 1..=t; index 0 is 0.
    cum_log_rho: Vec<f64>,
    /// log(1 - rho_i) for i = 1..=P; the final entry is 0.
    log_one_minus_rho: Vec<f64>,
}

impl DetectorParams {
    /// Build params from explicit transition weights (one per transient
    /// phase) and a threshold.
    pub fn new(rho: Vec<f64>, threshold: f64, config: &NetworkConfig) -> Result<Self> {
        if rho.len() != config.num_transient_phases() {
            return Err(Error::parameter(format!(
                "{} transition weights supplied, config has {} transient phases",
                rho.len(),
                config.num_transient_phases()
            )));
        }
        if rho.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::parameter("transition weights must lie in (0, 1)"));
        }
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(Error::parameter("threshold must be finite and >= 0"));
        }
        let mut cum_log_rho = Vec::with_capacity(rho.len() + 1);
        cum_log_rho.push(0.0);
        for &r in &rho {
            cum_log_rho.push(cum_log_rho.last().unwrap() + r.ln());
        }
        let num_phases = rho.len() + 1;
        let mut log_one_minus_rho: Vec<f64> = rho.iter().map(|&r| (1.0 - r).ln()).collect();
        log_one_minus_rho.push(0.0);
        debug_assert_eq!(log_one_minus_rho.len(), num_phases);
        Ok(DetectorParams {
            rho,
            threshold,
            cum_log_rho,
            log_one_minus_rho,
        })
    }

    /// The standard construction: `b = log gamma` (natural log) and
    /// `rho_i = 1/b`, which meets the asymptotic-optimality conditions.
    /// Requires `gamma > e` so that `1/b` lies in `(0, 1)`.
    pub fn from_target_mtfa(gamma: f64, config: &NetworkConfig) -> Result<Self> {
        let b = gamma.ln();
        if !(b > 1.0) {
            return Err(Error::parameter(format!(
                "target MTFA {gamma} gives threshold {b}; need log(gamma) > 1"
            )));
        }
        let rho = vec![1.0 / b; config.num_transient_phases()];
        DetectorParams::new(rho, b, config)
    }

    /// Replace the threshold, keeping the transition weights.
    pub fn with_threshold(&self, threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(Error::parameter("threshold must be finite and >= 0"));
        }
        let mut out = self.clone();
        out.threshold = threshold;
        Ok(out)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn num_phases(&self) -> usize {
        self.rho.len() + 1
    }

    /// `sum_{r=j}^{i-1} log rho_r` with `log rho_0 = 0`; zero when `j >= i`.
    #[inline]
    pub fn transition_sum(&self, from: usize, to: usize) -> f64 {
        debug_assert!(to >= 1 && to <= self.num_phases());
        debug_assert!(from <= to);
        let lo = from.max(1) - 1;
        self.cum_log_rho[to - 1] - self.cum_log_rho[lo]
    }

    /// `log(1 - rho_i)` for phase `i`, 1-based; zero for the final phase.
    #[inline]
    pub fn log_one_minus_rho(&self, i: usize) -> f64 {
        self.log_one_minus_rho[i - 1]
    }
}

/// Running state of the detector: the per-phase accumulators (index 0
/// pinned at 0), the max statistic `W`, and the time counter.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorState {
    omega: Vec<f64>,
    scratch: Vec<f64>,
    w: f64,
    k: u64,
}

impl DetectorState {
    /// Fresh state: every accumulator at 0, `W = 0`, `k = 0`.
    pub fn new(config: &NetworkConfig) -> Self {
        let len = config.num_phases() + 1;
        DetectorState {
            omega: vec![0.0; len],
            scratch: vec![0.0; len],
            w: 0.0,
            k: 0,
        }
    }

    pub fn statistic(&self) -> f64 {
        self.w
    }

    pub fn time(&self) -> u64 {
        self.k
    }

    /// Accumulators `omega_0..omega_P`; index 0 is always 0.
    pub fn omegas(&self) -> &[f64] {
        &self.omega
    }

    /// Advance one step with a precomputed per-phase llr table.
    pub fn update(&mut self, params: &DetectorParams, llrs: &MixtureLlrTable) -> Result<()> {
        let num_phases = params.num_phases();
        if llrs.num_phases() != num_phases || self.omega.len() != num_phases + 1 {
            return Err(Error::config(format!(
                "phase count mismatch: params {num_phases}, llr table {}, state {}",
                llrs.num_phases(),
                self.omega.len() - 1
            )));
        }
        self.scratch[0] = 0.0;
        let mut w = 0.0f64;
        for i in 1..=num_phases {
            let mut best = f64::NEG_INFINITY;
            for j in 0..=i {
                let candidate = self.omega[j] + params.transition_sum(j, i);
                if candidate > best {
                    best = candidate;
                }
            }
            let value = best + llrs.phase(i) + params.log_one_minus_rho(i);
            self.scratch[i] = value;
            if value > w {
                w = value;
            }
        }
        std::mem::swap(&mut self.omega, &mut self.scratch);
        self.w = w;
        self.k += 1;
        Ok(())
    }

    /// Advance one step straight from an observation vector.
    pub fn step(
        &mut self,
        params: &DetectorParams,
        pair: &DensityPair,
        config: &NetworkConfig,
        x: &ObservationVector,
    ) -> Result<()> {
        let table = phase_llrs(pair, config, &x.values)?;
        self.update(params, &table)
    }
}

/// Outcome of running the stopping rule against a stream.
///
/// Censoring at the horizon is reported explicitly, never silently
/// treated as a stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlarmDecision {
    /// `W` first reached the threshold at this time index.
    Alarm { at: u64 },
    /// The horizon elapsed with `W` below threshold everywhere.
    Censored { horizon: u64 },
}

impl AlarmDecision {
    pub fn is_alarm(&self) -> bool {
        matches!(self, AlarmDecision::Alarm { .. })
    }

    /// Stopping time when an alarm fired.
    pub fn stopping_time(&self) -> Option<u64> {
        match *self {
            AlarmDecision::Alarm { at } => Some(at),
            AlarmDecision::Censored { .. } => None,
        }
    }

    /// Stopping time with censored runs contributing the horizon, the
    /// convention used by the Monte Carlo aggregates.
    pub fn time_or_horizon(&self) -> u64 {
        match *self {
            AlarmDecision::Alarm { at } => at,
            AlarmDecision::Censored { horizon } => horizon,
        }
    }
}

/// Run a fresh detector until the first `W[k] >= b` or the horizon.
pub fn run_until_stop(
    stream: &mut ObservationStream,
    params: &DetectorParams,
    pair: &DensityPair,
    config: &NetworkConfig,
    horizon: u64,
) -> Result<AlarmDecision> {
    if horizon < 1 {
        return Err(Error::parameter("horizon must be >= 1"));
    }
    let mut state = DetectorState::new(config);
    for k in 1..=horizon {
        let obs = stream.next_obs()?;
        state.step(params, pair, config, &obs)?;
        if state.statistic() >= params.threshold() {
            return Ok(AlarmDecision::Alarm { at: k });
        }
    }
    Ok(AlarmDecision::Censored { horizon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DensityModel;
    use crate::model::{PhaseSchedule, TrajectoryPolicy};
    use crate::seed::derive_rng;

    fn fig1_config() -> NetworkConfig {
        NetworkConfig::new(3, 1, 3).unwrap()
    }

    #[test]
    fn default_params_round_numbers() {
        let params = DetectorParams::from_target_mtfa(10f64.exp(), &fig1_config()).unwrap();
        assert!((params.threshold() - 10.0).abs() < 1e-12);
        for &r in params.rho() {
            assert!((r - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn default_params_ten_thousand() {
        let params = DetectorParams::from_target_mtfa(1e4, &fig1_config()).unwrap();
        assert!((params.threshold() - 9.2103).abs() < 1e-4);
        assert!((params.rho()[0] - 0.10857).abs() < 1e-5);
    }

    #[test]
    fn default_params_guard() {
        assert!(DetectorParams::from_target_mtfa(2.0, &fig1_config()).is_err());
        assert!(DetectorParams::from_target_mtfa(1.0, &fig1_config()).is_err());
    }

    #[test]
    fn fresh_state_shape() {
        let state = DetectorState::new(&fig1_config());
        assert_eq!(state.omegas(), &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(state.statistic(), 0.0);
        assert_eq!(state.time(), 0);

        let single = DetectorState::new(&NetworkConfig::new(3, 2, 2).unwrap());
        assert_eq!(single.omegas().len(), 2);
    }

    #[test]
    fn transition_sums_telescoping() {
        let config = NetworkConfig::new(5, 1, 4).unwrap();
        let rho = vec![0.1, 0.2, 0.3];
        let params = DetectorParams::new(rho.clone(), 5.0, &config).unwrap();
        // leaving pre-change is free
        assert_eq!(params.transition_sum(0, 1), 0.0);
        assert_eq!(params.transition_sum(1, 1), 0.0);
        // 0 -> 3 pays rho_1 rho_2
        let want = rho[0].ln() + rho[1].ln();
        assert!((params.transition_sum(0, 3) - want).abs() < 1e-12);
        // 2 -> 4 pays rho_2 rho_3
        let want = rho[1].ln() + rho[2].ln();
        assert!((params.transition_sum(2, 4) - want).abs() < 1e-12);
        assert_eq!(params.transition_sum(4, 4), 0.0);
        // no leak out of the final phase
        assert_eq!(params.log_one_minus_rho(4), 0.0);
    }

    #[test]
    fn single_phase_update_is_classical_cusum() {
        let config = NetworkConfig::new(2, 2, 2).unwrap();
        let params = DetectorParams::new(vec![], 5.0, &config).unwrap();
        let mut state = DetectorState::new(&config);
        let mut classic = 0.0f64;
        let llr_seq = [0.4, -0.9, 0.3, 0.8, -0.1, 2.0, -3.5, 0.2];
        for &l in &llr_seq {
            state
                .update(&params, &MixtureLlrTable::from_entries(vec![l]))
                .unwrap();
            classic = classic.max(0.0) + l;
            assert!(
                (state.omegas()[1] - classic).abs() < 1e-12,
                "omega {} vs cusum {classic}",
                state.omegas()[1]
            );
            assert!((state.statistic() - classic.max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn first_update_from_fresh_state() {
        // one transient phase, rho_1 = 0.1, zero llrs: the j = i branch of
        // the recursion starts each accumulator from omega_i[0] = 0, so
        // omega_1 = log(1 - rho_1) and omega_2 = 0 (final phase pays no
        // leak term); W stays at the floor
        let config = NetworkConfig::new(2, 1, 2).unwrap();
        let params = DetectorParams::new(vec![0.1], 5.0, &config).unwrap();
        let mut state = DetectorState::new(&config);
        state
            .update(&params, &MixtureLlrTable::from_entries(vec![0.0, 0.0]))
            .unwrap();
        assert!((state.omegas()[1] - 0.9f64.ln()).abs() < 1e-12);
        assert!((state.omegas()[2] - 0.0).abs() < 1e-12);
        assert_eq!(state.statistic(), 0.0);
        assert_eq!(state.time(), 1);
    }

    #[test]
    fn statistic_is_never_negative() {
        let config = NetworkConfig::new(2, 1, 2).unwrap();
        let params = DetectorParams::new(vec![0.2], 5.0, &config).unwrap();
        let mut state = DetectorState::new(&config);
        let mut rng = derive_rng(2, &[0]);
        let pair = DensityPair::standard_gaussian_shift();
        for _ in 0..500 {
            let x = vec![pair.pre().sample(&mut rng), pair.pre().sample(&mut rng)];
            let table = phase_llrs(&pair, &config, &x).unwrap();
            state.update(&params, &table).unwrap();
            assert!(state.statistic() >= 0.0);
        }
    }

    #[test]
    fn large_positive_llrs_drive_w_up() {
        let config = NetworkConfig::new(3, 1, 3).unwrap();
        let params = DetectorParams::new(vec![0.1, 0.1], 1e18, &config).unwrap();
        let mut state = DetectorState::new(&config);
        let mut last = 0.0;
        for _ in 0..50 {
            state
                .update(&params, &MixtureLlrTable::from_entries(vec![7.0, 8.0, 9.0]))
                .unwrap();
            assert!(state.statistic() > last);
            last = state.statistic();
        }
    }

    #[test]
    fn all_zero_observations_keep_w_at_the_floor() {
        // x = 0 gives llr = -0.5 per sensor, so every mixture ratio is
        // negative and the statistic sits on its floor indefinitely
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(3, 1, 3).unwrap();
        let params = DetectorParams::new(vec![0.1, 0.1], 5.0, &config).unwrap();
        let mut state = DetectorState::new(&config);
        for _ in 0..10_000 {
            state
                .step(
                    &params,
                    &pair,
                    &config,
                    &ObservationVector {
                        k: 0,
                        values: vec![0.0; 3],
                        phase: 0,
                        affected: vec![],
                    },
                )
                .unwrap();
            assert_eq!(state.statistic(), 0.0);
        }
    }

    #[test]
    fn run_until_stop_with_zero_threshold() {
        let config = fig1_config();
        let params = DetectorParams::new(vec![0.1, 0.1], 0.0, &config).unwrap();
        let pair = DensityPair::standard_gaussian_shift();
        let mut stream = ObservationStream::new(
            pair,
            config,
            PhaseSchedule::never(),
            TrajectoryPolicy::UniformRandom,
            derive_rng(1, &[1]),
        )
        .unwrap();
        let decision = run_until_stop(&mut stream, &params, &pair, &config, 100).unwrap();
        assert_eq!(decision, AlarmDecision::Alarm { at: 1 });
    }

    #[test]
    fn huge_shift_stops_within_two_steps() {
        let pair = DensityPair::new(
            DensityModel::gaussian(0.0, 1.0).unwrap(),
            DensityModel::gaussian(10.0, 1.0).unwrap(),
        )
        .unwrap();
        let config = NetworkConfig::new(3, 1, 2).unwrap();
        let params = DetectorParams::new(vec![0.2], 5.0, &config).unwrap();
        for trial in 0..50 {
            let mut stream = ObservationStream::new(
                pair,
                config,
                PhaseSchedule::new(1, vec![4]).unwrap(),
                TrajectoryPolicy::UniformRandom,
                derive_rng(123, &[trial]),
            )
            .unwrap();
            let decision = run_until_stop(&mut stream, &params, &pair, &config, 50).unwrap();
            let at = decision.stopping_time().expect("must alarm");
            assert!(at <= 2, "trial {trial} stopped at {at}");
        }
    }

    #[test]
    fn threshold_monotone_on_common_path() {
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(3, 1, 2).unwrap();
        let schedule = PhaseSchedule::new(1, vec![5]).unwrap();
        let low = DetectorParams::new(vec![0.15], 3.0, &config).unwrap();
        let high = DetectorParams::new(vec![0.15], 6.0, &config).unwrap();
        for trial in 0..20 {
            let run = |params: &DetectorParams| {
                let mut stream = ObservationStream::new(
                    pair,
                    config,
                    schedule.clone(),
                    TrajectoryPolicy::UniformRandom,
                    derive_rng(99, &[trial]),
                )
                .unwrap();
                run_until_stop(&mut stream, params, &pair, &config, 5_000)
                    .unwrap()
                    .time_or_horizon()
            };
            assert!(run(&low) <= run(&high), "trial {trial}");
        }
    }

    #[test]
    fn censoring_is_reported() {
        let pair = DensityPair::standard_gaussian_shift();
        let config = NetworkConfig::new(2, 1, 2).unwrap();
        let params = DetectorParams::new(vec![0.1], 50.0, &config).unwrap();
        let mut stream = ObservationStream::new(
            pair,
            config,
            PhaseSchedule::never(),
            TrajectoryPolicy::UniformRandom,
            derive_rng(5, &[0]),
        )
        .unwrap();
        let decision = run_until_stop(&mut stream, &params, &pair, &config, 20).unwrap();
        assert_eq!(decision, AlarmDecision::Censored { horizon: 20 });
        assert!(!decision.is_alarm());
        assert_eq!(decision.time_or_horizon(), 20);
    }
}
