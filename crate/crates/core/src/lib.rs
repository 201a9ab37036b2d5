//! Sequential quickest detection of a growing, moving anomaly in an
//! L-sensor network.
//!
//! The detector is a mixture weighted-dynamic CuSum: per-phase likelihood
//! ratios are uniform mixtures over all placements of an anomaly of the
//! phase's size, computed in log domain through elementary symmetric
//! polynomials, and the CuSum-style recursion carries phase-transition
//! weights so a single pass adapts to the anomaly growing from size `m`
//! to size `n`.
//!
//! Module map:
//! - [`distributions`]: pre/post-change density models and per-sensor
//!   log-likelihood ratios.
//! - [`model`]: network configuration, phase schedules, anomaly
//!   trajectories, and seeded observation streams.
//! - [`mixture`]: log-domain mixture likelihood ratios and Monte Carlo
//!   KL-number estimation.
//! - [`detector`]: the recursion, stopping rule, and parameter
//!   construction.
//! - [`oracle`]: deliberately naive enumeration references used by tests.
//! - [`experiments`]: Monte Carlo mean-time-to-false-alarm / detection
//!   delay estimation, threshold calibration, and tradeoff curves.

pub mod detector;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod mixture;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod seed;

pub use detector::{AlarmDecision, DetectorParams, DetectorState};
pub use distributions::{DensityModel, DensityPair};
pub use error::Error;
pub use experiments::{CurveRow, McEstimate, ScalingConstants};
pub use mixture::{KlEstimate, MixtureLlrTable};
pub use model::{
    NetworkConfig, ObservationStream, ObservationVector, PhaseSchedule, TrajectoryPolicy,
};

/// Workspace-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
