//! Network/anomaly configuration, phase timing, trajectory policies, and
//! observation-stream generation.
//!
//! Time indices are 1-based (`k >= 1`) and sensor labels are 1-based
//! (`1..=L`), matching the CSV formats the CLI reads and writes.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::distributions::DensityPair;
use crate::error::Error;
use crate::Result;

/// Network size and the known initial/final anomaly sizes.
///
/// Phases are numbered `0` (pre-change) and `1..=n-m+1`; in phase `i >= 1`
/// the anomaly occupies exactly `m+i-1` sensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    num_sensors: usize,
    initial_size: usize,
    final_size: usize,
}

impl NetworkConfig {
    pub fn new(num_sensors: usize, initial_size: usize, final_size: usize) -> Result<Self> {
        if !(1 <= initial_size && initial_size <= final_size && final_size <= num_sensors) {
            return Err(Error::config(format!(
                "need 1 <= m <= n <= L, got L={num_sensors}, m={initial_size}, n={final_size}"
            )));
        }
        Ok(NetworkConfig {
            num_sensors,
            initial_size,
            final_size,
        })
    }

    pub fn num_sensors(&self) -> usize {
        self.num_sensors
    }

    pub fn initial_size(&self) -> usize {
        self.initial_size
    }

    pub fn final_size(&self) -> usize {
        self.final_size
    }

    /// Number of post-change phases, `n - m + 1`.
    pub fn num_phases(&self) -> usize {
        self.final_size - self.initial_size + 1
    }

    /// Number of transient phases, `n - m`.
    pub fn num_transient_phases(&self) -> usize {
        self.final_size - self.initial_size
    }

    /// Anomaly size in a phase: 0 before the change, `m+i-1` in phase `i`.
    pub fn anomaly_size(&self, phase: usize) -> usize {
        if phase == 0 {
            0
        } else {
            debug_assert!(phase <= self.num_phases());
            self.initial_size + phase - 1
        }
    }
}

/// First changepoint and the transient durations, which together fix the
/// phase boundaries.
///
/// `never()` encodes the pure pre-change regime. The final phase persists
/// forever; a zero duration skips its phase entirely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSchedule {
    nu1: Option<u64>,
    durations: Vec<u64>,
}

impl PhaseSchedule {
    pub fn new(nu1: u64, durations: Vec<u64>) -> Result<Self> {
        if nu1 < 1 {
            return Err(Error::config("first changepoint must be >= 1"));
        }
        Ok(PhaseSchedule {
            nu1: Some(nu1),
            durations,
        })
    }

    /// No change ever occurs.
    pub fn never() -> Self {
        PhaseSchedule {
            nu1: None,
            durations: Vec::new(),
        }
    }

    pub fn nu1(&self) -> Option<u64> {
        self.nu1
    }

    pub fn durations(&self) -> &[u64] {
        &self.durations
    }

    pub fn is_never(&self) -> bool {
        self.nu1.is_none()
    }

    /// Start of phase `i` (1-based), or `None` for a never-schedule.
    pub fn changepoint(&self, phase: usize) -> Option<u64> {
        debug_assert!(phase >= 1);
        let nu1 = self.nu1?;
        let extra: u64 = self.durations.iter().take(phase - 1).sum();
        Some(nu1 + extra)
    }

    /// Phase index at time `k`: 0 while `k < nu1`, otherwise the unique
    /// `i` with `nu_i <= k < nu_{i+1}` (the last phase extends forever).
    /// Zero-length phases are skipped by construction.
    pub fn phase_at(&self, k: u64) -> usize {
        debug_assert!(k >= 1, "time indices are 1-based");
        let Some(nu1) = self.nu1 else { return 0 };
        if k < nu1 {
            return 0;
        }
        let mut boundary = nu1;
        for (idx, &d) in self.durations.iter().enumerate() {
            boundary += d;
            if k < boundary {
                return idx + 1;
            }
        }
        self.durations.len() + 1
    }
}

/// How the anomaly moves around the network within each phase.
///
/// The detector's delay law does not depend on the trajectory (only on
/// the phase sizes), which the distinct policies here let tests confirm
/// empirically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrajectoryPolicy {
    /// Anomaly occupies sensors `1..=size`; it never moves within a phase.
    Prefix,
    /// Deterministic moving window: at time `k` the anomaly occupies
    /// `{((k-1+t) mod L)+1 : t < size}`, rotating one sensor per step.
    Rotating,
    /// Explicit sensor set per time step (1-based time index into the
    /// vector). Streaming past the end or a set of the wrong cardinality
    /// is a configuration error.
    Fixed(Vec<Vec<usize>>),
    /// Resample the affected set independently each step, uniformly over
    /// all size-`(m+i-1)` subsets. This realizes the mixture observation
    /// model.
    UniformRandom,
}

impl TrajectoryPolicy {
    /// Affected sensor set (sorted, 1-based) at time `k` given the phase's
    /// anomaly size. Draws from `rng` only for `UniformRandom` in a
    /// post-change phase, so pre-change prefixes consume identical
    /// randomness under every policy.
    fn affected_set<R: Rng + ?Sized>(
        &self,
        k: u64,
        size: usize,
        num_sensors: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        if size == 0 {
            return Ok(Vec::new());
        }
        match self {
            TrajectoryPolicy::Prefix => Ok((1..=size).collect()),
            TrajectoryPolicy::Rotating => {
                let mut set: Vec<usize> = (0..size)
                    .map(|t| ((k as usize - 1 + t) % num_sensors) + 1)
                    .collect();
                set.sort_unstable();
                Ok(set)
            }
            TrajectoryPolicy::Fixed(sets) => {
                let idx = (k - 1) as usize;
                let set = sets.get(idx).ok_or_else(|| {
                    Error::config(format!("fixed trajectory has no set for time k={k}"))
                })?;
                let mut set = set.clone();
                set.sort_unstable();
                set.dedup();
                if set.len() != size {
                    return Err(Error::config(format!(
                        "fixed trajectory at k={k} has {} distinct sensors, phase requires {size}",
                        set.len()
                    )));
                }
                if set.iter().any(|&s| s < 1 || s > num_sensors) {
                    return Err(Error::config(format!(
                        "fixed trajectory at k={k} names a sensor outside 1..={num_sensors}"
                    )));
                }
                Ok(set)
            }
            TrajectoryPolicy::UniformRandom => {
                let mut set: Vec<usize> = rand::seq::index::sample(rng, num_sensors, size)
                    .into_iter()
                    .map(|i| i + 1)
                    .collect();
                set.sort_unstable();
                Ok(set)
            }
        }
    }
}

/// One time step of network observations, labeled with the phase and the
/// affected set that generated it. Detectors read only `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    pub k: u64,
    pub values: Vec<f64>,
    pub phase: usize,
    /// Sorted 1-based sensor labels; empty in phase 0.
    pub affected: Vec<usize>,
}

/// Generate the observation vector at time `k`: affected sensors draw
/// from the post-change density, the rest from the pre-change density,
/// all independent given the affected set.
pub fn gen_observation<R: Rng + ?Sized>(
    pair: &DensityPair,
    config: &NetworkConfig,
    schedule: &PhaseSchedule,
    policy: &TrajectoryPolicy,
    k: u64,
    rng: &mut R,
) -> Result<ObservationVector> {
    let phase = schedule.phase_at(k);
    let size = config.anomaly_size(phase);
    let affected = policy.affected_set(k, size, config.num_sensors(), rng)?;

    let mut mask = vec![false; config.num_sensors()];
    for &s in &affected {
        mask[s - 1] = true;
    }
    // fixed draw order (ascending sensor) keeps streams reproducible
    let values = mask
        .iter()
        .map(|&hit| {
            if hit {
                pair.post().sample(rng)
            } else {
                pair.pre().sample(rng)
            }
        })
        .collect();

    Ok(ObservationVector {
        k,
        values,
        phase,
        affected,
    })
}

/// Lazy, unbounded source of observation vectors. Owns its random source;
/// any experiment truncation happens in the caller.
#[derive(Debug, Clone)]
pub struct ObservationStream {
    pair: DensityPair,
    config: NetworkConfig,
    schedule: PhaseSchedule,
    policy: TrajectoryPolicy,
    rng: ChaCha12Rng,
    k: u64,
}

impl ObservationStream {
    pub fn new(
        pair: DensityPair,
        config: NetworkConfig,
        schedule: PhaseSchedule,
        policy: TrajectoryPolicy,
        rng: ChaCha12Rng,
    ) -> Result<Self> {
        if !schedule.is_never() && schedule.durations().len() != config.num_transient_phases() {
            return Err(Error::config(format!(
                "schedule has {} durations, config has {} transient phases",
                schedule.durations().len(),
                config.num_transient_phases()
            )));
        }
        Ok(ObservationStream {
            pair,
            config,
            schedule,
            policy,
            rng,
            k: 0,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    /// Produce `X[k]` for the next time step.
    pub fn next_obs(&mut self) -> Result<ObservationVector> {
        self.k += 1;
        gen_observation(
            &self.pair,
            &self.config,
            &self.schedule,
            &self.policy,
            self.k,
            &mut self.rng,
        )
    }
}

impl Iterator for ObservationStream {
    type Item = Result<ObservationVector>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_obs())
    }
}
