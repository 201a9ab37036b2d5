//! Subcommand argument types and implementations.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use wdcusum::detector::{DetectorParams, DetectorState};
use wdcusum::distributions::{DensityModel, DensityPair};
use wdcusum::experiments::{
    calibrate_threshold, curve as run_curve, estimate_mtfa, estimate_wadd_with_model, CurveSpec,
};
use wdcusum::mixture::estimate_kl;
use wdcusum::model::{NetworkConfig, ObservationStream, PhaseSchedule, TrajectoryPolicy};
use wdcusum::seed::{derive_rng, stream};

use crate::config::ConfigFile;
use crate::csvio::{read_stream, stream_header, stream_row, OutputSink};
use crate::error::EXIT_NO_ALARM;
use crate::manifest::RunManifest;
use crate::CliError;

/// Network shape flags shared by most subcommands.
#[derive(Args, Clone)]
pub struct NetworkArgs {
    /// Number of sensors.
    #[arg(long = "L")]
    pub l: usize,
    /// Initial anomaly size.
    #[arg(short, long)]
    pub m: usize,
    /// Final anomaly size.
    #[arg(short, long)]
    pub n: usize,
}

impl NetworkArgs {
    fn build(&self) -> Result<NetworkConfig, CliError> {
        Ok(NetworkConfig::new(self.l, self.m, self.n)?)
    }
}

/// Density flags; the defaults are the standard N(0,1) -> N(1,1) pair.
#[derive(Args, Clone)]
pub struct PairArgs {
    #[arg(long, default_value_t = 0.0)]
    pub pre_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub pre_var: f64,
    #[arg(long, default_value_t = 1.0)]
    pub post_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub post_var: f64,
}

impl PairArgs {
    fn build(&self) -> Result<DensityPair, CliError> {
        Ok(DensityPair::new(
            DensityModel::gaussian(self.pre_mean, self.pre_var)?,
            DensityModel::gaussian(self.post_mean, self.post_var)?,
        )?)
    }

    fn argv(&self) -> Vec<String> {
        vec![
            "--pre-mean".into(),
            self.pre_mean.to_string(),
            "--pre-var".into(),
            self.pre_var.to_string(),
            "--post-mean".into(),
            self.post_mean.to_string(),
            "--post-var".into(),
            self.post_var.to_string(),
        ]
    }
}

fn network_argv(n: &NetworkArgs) -> Vec<String> {
    vec![
        "--L".into(),
        n.l.to_string(),
        "--m".into(),
        n.m.to_string(),
        "--n".into(),
        n.n.to_string(),
    ]
}

fn parse_policy(name: &str) -> Result<TrajectoryPolicy, CliError> {
    match name {
        "prefix" => Ok(TrajectoryPolicy::Prefix),
        "rotating" => Ok(TrajectoryPolicy::Rotating),
        "uniform-random" => Ok(TrajectoryPolicy::UniformRandom),
        other => Err(CliError::config(format!(
            "unknown policy `{other}` (expected prefix, rotating, or uniform-random)"
        ))),
    }
}

fn policy_name(policy: &TrajectoryPolicy) -> &'static str {
    match policy {
        TrajectoryPolicy::Prefix => "prefix",
        TrajectoryPolicy::Rotating => "rotating",
        TrajectoryPolicy::Fixed(_) => "fixed",
        TrajectoryPolicy::UniformRandom => "uniform-random",
    }
}

/// Resolve detector params from --gamma / --threshold / --rho flags.
fn build_params(
    gamma: Option<f64>,
    threshold: Option<f64>,
    rho: &Option<Vec<f64>>,
    config: &NetworkConfig,
) -> Result<DetectorParams, CliError> {
    let b = match (gamma, threshold) {
        (Some(g), None) => g.ln(),
        (None, Some(b)) => b,
        (None, None) => {
            return Err(CliError::config(
                "one of --gamma or --threshold is required",
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let rho = match rho {
        Some(values) => values.clone(),
        None => {
            if config.num_transient_phases() == 0 {
                Vec::new()
            } else if b > 1.0 {
                vec![1.0 / b; config.num_transient_phases()]
            } else {
                return Err(CliError::config(format!(
                    "threshold {b} gives no valid default weight 1/b; pass --rho explicitly"
                )));
            }
        }
    };
    Ok(DetectorParams::new(rho, b, config)?)
}

/// Unified result schema shared by mtfa/wadd/calibrate/curve outputs.
pub const RESULT_HEADER: &str = "gamma_target,b,calibrated,mtfa_mean,mtfa_stderr,wadd_mean,\
                                 wadd_stderr,theory_wadd,trials,censored,horizon,seed,L,m,n,d,policy";

#[derive(Default)]
struct ResultRow {
    gamma_target: Option<f64>,
    b: f64,
    calibrated: bool,
    mtfa: Option<(f64, f64)>,
    wadd: Option<(f64, f64)>,
    theory_wadd: Option<f64>,
    trials: u64,
    censored: u64,
    horizon: u64,
    seed: u64,
    l: usize,
    m: usize,
    n: usize,
    durations: Option<Vec<u64>>,
    policy: Option<&'static str>,
}

impl ResultRow {
    fn render(&self) -> String {
        let opt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let pair = |v: &Option<(f64, f64)>, which: usize| {
            v.map(|t| if which == 0 { t.0 } else { t.1 })
                .map(|x| x.to_string())
                .unwrap_or_default()
        };
        let d = self
            .durations
            .as_ref()
            .map(|d| {
                d.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .unwrap_or_default();
        [
            opt(&self.gamma_target),
            self.b.to_string(),
            self.calibrated.to_string(),
            pair(&self.mtfa, 0),
            pair(&self.mtfa, 1),
            pair(&self.wadd, 0),
            pair(&self.wadd, 1),
            opt(&self.theory_wadd),
            self.trials.to_string(),
            self.censored.to_string(),
            self.horizon.to_string(),
            self.seed.to_string(),
            self.l.to_string(),
            self.m.to_string(),
            self.n.to_string(),
            d,
            self.policy.unwrap_or_default().to_string(),
        ]
        .join(",")
    }
}

/// Run `body` against the chosen sink, then drop a manifest next to any
/// file output.
fn with_output(
    subcommand: &str,
    argv: Vec<String>,
    seed: u64,
    output: Option<&PathBuf>,
    body: impl FnOnce(&mut OutputSink) -> Result<i32, CliError>,
) -> Result<i32, CliError> {
    let started = Instant::now();
    let mut sink = OutputSink::create(output.map(|p| p.as_path()))?;
    let code = body(&mut sink)?;
    let path = sink.path().map(|p| p.to_path_buf());
    sink.finish()?;
    if let Some(path) = path {
        RunManifest {
            subcommand: subcommand.to_string(),
            argv,
            seed,
            output: path.display().to_string(),
            duration: started.elapsed(),
        }
        .write_next_to(&path)?;
    }
    Ok(code)
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub pair: PairArgs,
    /// Transient durations d_1,..,d_{n-m} (comma-separated).
    #[arg(long, value_delimiter = ',', required = false)]
    pub d: Vec<u64>,
    /// First changepoint (time index >= 1), or `never`.
    #[arg(long)]
    pub nu1: String,
    /// Number of time steps to emit.
    #[arg(long)]
    pub steps: u64,
    /// Trajectory policy: prefix | rotating | uniform-random.
    #[arg(long, default_value = "uniform-random")]
    pub policy: String,
    /// Master seed (mandatory; there are no wall-clock defaults).
    #[arg(long)]
    pub seed: u64,
    /// Output file (stdout if omitted); a manifest is written next to it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_nu1(raw: &str, durations: &[u64]) -> Result<PhaseSchedule, CliError> {
    if raw == "never" {
        return Ok(PhaseSchedule::never());
    }
    let nu1: u64 = raw.parse().map_err(|_| {
        CliError::config(format!(
            "--nu1 expects a time index or `never`, got `{raw}`"
        ))
    })?;
    Ok(PhaseSchedule::new(nu1, durations.to_vec())?)
}

pub fn gen(args: GenArgs) -> Result<i32, CliError> {
    let config = args.network.build()?;
    let pair = args.pair.build()?;
    let schedule = parse_nu1(&args.nu1, &args.d)?;
    let policy = parse_policy(&args.policy)?;
    let rng = derive_rng(args.seed, &[stream::OBSERVATIONS, 0]);
    let mut source = ObservationStream::new(pair, config, schedule, policy, rng)?;

    let mut argv: Vec<String> = vec!["gen".into()];
    argv.extend(network_argv(&args.network));
    argv.extend(args.pair.argv());
    if !args.d.is_empty() {
        argv.push("--d".into());
        argv.push(
            args.d
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    argv.extend(["--nu1".into(), args.nu1.clone()]);
    argv.extend(["--steps".into(), args.steps.to_string()]);
    argv.extend(["--policy".into(), args.policy.clone()]);
    argv.extend(["--seed".into(), args.seed.to_string()]);
    if let Some(path) = &args.output {
        argv.extend(["--output".into(), path.display().to_string()]);
    }

    with_output("gen", argv, args.seed, args.output.as_ref(), |sink| {
        sink.write_line(&stream_header(config.num_sensors()))?;
        for _ in 0..args.steps {
            let obs = source.next_obs()?;
            sink.write_line(&stream_row(&obs))?;
        }
        Ok(0)
    })
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub pair: PairArgs,
    /// Target mean time to false alarm; sets b = log(gamma), rho = 1/b.
    #[arg(long, conflicts_with = "threshold")]
    pub gamma: Option<f64>,
    /// Explicit threshold (pass --rho too unless 1/threshold is a valid
    /// weight).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Override transition weights rho_1,..,rho_{n-m} (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    /// Stream CSV to read (stdin if omitted).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file for the trace (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn detect(args: DetectArgs) -> Result<i32, CliError> {
    let config = args.network.build()?;
    let pair = args.pair.build()?;
    let params = build_params(args.gamma, args.threshold, &args.rho, &config)?;

    let rows = match &args.input {
        None => read_stream(std::io::stdin().lock())?,
        Some(path) => {
            let file = std::fs::File::open(path)
                .map_err(|e| CliError::io(format!("open {}: {e}", path.display())))?;
            read_stream(std::io::BufReader::new(file))?
        }
    };

    let mut argv: Vec<String> = vec!["detect".into()];
    argv.extend(network_argv(&args.network));
    argv.extend(args.pair.argv());
    if let Some(g) = args.gamma {
        argv.extend(["--gamma".into(), g.to_string()]);
    }
    if let Some(b) = args.threshold {
        argv.extend(["--threshold".into(), b.to_string()]);
    }
    if let Some(rho) = &args.rho {
        argv.push("--rho".into());
        argv.push(
            rho.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    if let Some(path) = &args.input {
        argv.extend(["--input".into(), path.display().to_string()]);
    }
    if let Some(path) = &args.output {
        argv.extend(["--output".into(), path.display().to_string()]);
    }

    with_output("detect", argv, 0, args.output.as_ref(), |sink| {
        let num_phases = config.num_phases();
        let mut header = vec!["k".to_string(), "W".to_string()];
        header.extend((1..=num_phases).map(|i| format!("omega_{i}")));
        header.push("alarm".into());
        sink.write_line(&header.join(","))?;

        let mut state = DetectorState::new(&config);
        let mut alarmed = false;
        for (idx, values) in rows.iter().enumerate() {
            let table = wdcusum::mixture::phase_llrs(&pair, &config, values)?;
            state.update(&params, &table)?;
            let alarm = state.statistic() >= params.threshold();
            let mut cols = vec![(idx as u64 + 1).to_string(), state.statistic().to_string()];
            cols.extend(state.omegas()[1..].iter().map(|v| v.to_string()));
            cols.push(if alarm { "1" } else { "0" }.into());
            sink.write_line(&cols.join(","))?;
            if alarm {
                alarmed = true;
                break;
            }
        }
        Ok(if alarmed { 0 } else { EXIT_NO_ALARM })
    })
}

// ---------------------------------------------------------------------------
// kl
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct KlArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub pair: PairArgs,
    /// Phase to estimate (1-based); all phases when omitted.
    #[arg(long)]
    pub phase: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn kl(args: KlArgs) -> Result<i32, CliError> {
    let config = args.network.build()?;
    let pair = args.pair.build()?;
    let phases: Vec<usize> = match args.phase {
        Some(p) => vec![p],
        None => (1..=config.num_phases()).collect(),
    };

    let mut argv: Vec<String> = vec!["kl".into()];
    argv.extend(network_argv(&args.network));
    argv.extend(args.pair.argv());
    if let Some(p) = args.phase {
        argv.extend(["--phase".into(), p.to_string()]);
    }
    argv.extend(["--trials".into(), args.trials.to_string()]);
    argv.extend(["--seed".into(), args.seed.to_string()]);
    if let Some(path) = &args.output {
        argv.extend(["--output".into(), path.display().to_string()]);
    }

    with_output("kl", argv, args.seed, args.output.as_ref(), |sink| {
        sink.write_line("phase,size,estimate_nats,stderr,trials,seed")?;
        for phase in phases {
            let est = estimate_kl(&pair, &config, phase, args.trials, args.seed)?;
            sink.write_line(&format!(
                "{},{},{},{},{},{}",
                est.phase, est.size, est.estimate, est.stderr, est.trials, est.seed
            ))?;
        }
        Ok(0)
    })
}

// ---------------------------------------------------------------------------
// mtfa
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct MtfaArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, conflicts_with = "threshold")]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2000)]
    pub trials: u64,
    /// Truncation horizon; defaults to 50 * gamma when --gamma is given.
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn mtfa(args: MtfaArgs) -> Result<i32, CliError> {
    let config = args.network.build()?;
    let pair = args.pair.build()?;
    let params = build_params(args.gamma, args.threshold, &args.rho, &config)?;
    let horizon = match (args.horizon, args.gamma) {
        (Some(h), _) => h,
        (None, Some(g)) => (50.0 * g).ceil() as u64,
        (None, None) => return Err(CliError::config("--horizon is required with --threshold")),
    };

    let mut argv: Vec<String> = vec!["mtfa".into()];
    argv.extend(network_argv(&args.network));
    argv.extend(args.pair.argv());
    if let Some(g) = args.gamma {
        argv.extend(["--gamma".into(), g.to_string()]);
    }
    if let Some(b) = args.threshold {
        argv.extend(["--threshold".into(), b.to_string()]);
    }
    if let Some(rho) = &args.rho {
        argv.push("--rho".into());
        argv.push(
            rho.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    argv.extend(["--trials".into(), args.trials.to_string()]);
    argv.extend(["--horizon".into(), horizon.to_string()]);
    argv.extend(["--seed".into(), args.seed.to_string()]);
    if let Some(path) = &args.output {
        argv.extend(["--output".into(), path.display().to_string()]);
    }

    with_output("mtfa", argv, args.seed, args.output.as_ref(), |sink| {
        let est = estimate_mtfa(&params, &pair, &config, args.trials, horizon, args.seed)?;
        sink.write_line(RESULT_HEADER)?;
        let row = ResultRow {
            gamma_target: args.gamma,
            b: params.threshold(),
            calibrated: false,
            mtfa: Some((est.mean, est.stderr)),
            trials: est.trials,
            censored: est.censored,
            horizon: est.horizon,
            seed: est.seed,
            l: config.num_sensors(),
            m: config.initial_size(),
            n: config.final_size(),
            ..Default::default()
        };
        sink.write_line(&row.render())?;
        Ok(0)
    })
}

// ---------------------------------------------------------------------------
// wadd
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct WaddArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, conflicts_with = "threshold")]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    /// Transient durations d_1,..,d_{n-m} (comma-separated).
    #[arg(long, value_delimiter = ',', required = false)]
    pub d: Vec<u64>,
    /// Trajectory policy: prefix | rotating | uniform-random.
    #[arg(long, default_value = "uniform-random")]
    pub policy: String,
    /// Anomaly sizes the detector assumes, when different from the
    /// stream's true --m/--n (mismatch studies). Pass both or neither.
    #[arg(long, requires = "detector_n")]
    pub detector_m: Option<usize>,
    #[arg(long, requires = "detector_m")]
    pub detector_n: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn wadd(args: WaddArgs) -> Result<i32, CliError> {
    let stream_config = args.network.build()?;
    let detector_config = match (args.detector_m, args.detector_n) {
        (Some(m), Some(n)) => NetworkConfig::new(args.network.l, m, n)?,
        _ => stream_config,
    };
    let pair = args.pair.build()?;
    let params = build_params(args.gamma, args.threshold, &args.rho, &detector_config)?;
    let schedule = PhaseSchedule::new(1, args.d.clone())?;
    let policy = parse_policy(&args.policy)?;

    let mut argv: Vec<String> = vec!["wadd".into()];
    argv.extend(network_argv(&args.network));
    argv.extend(args.pair.argv());
    if let Some(g) = args.gamma {
        argv.extend(["--gamma".into(), g.to_string()]);
    }
    if let Some(b) = args.threshold {
        argv.extend(["--threshold".into(), b.to_string()]);
    }
    if let Some(rho) = &args.rho {
        argv.push("--rho".into());
        argv.push(
            rho.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    if !args.d.is_empty() {
        argv.push("--d".into());
        argv.push(
            args.d
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    argv.extend(["--policy".into(), args.policy.clone()]);
    if let (Some(m), Some(n)) = (args.detector_m, args.detector_n) {
        argv.extend(["--detector-m".into(), m.to_string()]);
        argv.extend(["--detector-n".into(), n.to_string()]);
    }
    argv.extend(["--trials".into(), args.trials.to_string()]);
    argv.extend(["--horizon".into(), args.horizon.to_string()]);
    argv.extend(["--seed".into(), args.seed.to_string()]);
    if let Some(path) = &args.output {
        argv.extend(["--output".into(), path.display().to_string()]);
    }

    with_output("wadd", argv, args.seed, args.output.as_ref(), |sink| {
        let est = estimate_wadd_with_model(
            &params,
            &detector_config,
            &pair,
            &stream_config,
            &schedule,
            &policy,
            args.trials,
            args.horizon,
            args.seed,
        )?;
        sink.write_line(RESULT_HEADER)?;
        let row = ResultRow {
            gamma_target: args.gamma,
            b: params.threshold(),
            calibrated: false,
            wadd: Some((est.mean, est.stderr)),
            trials: est.trials,
            censored: est.censored,
            horizon: est.horizon,
            seed: est.seed,
            l: stream_config.num_sensors(),
            m: stream_config.initial_size(),
            n: stream_config.final_size(),
            durations: Some(args.d.clone()),
            policy: Some(policy_name(&policy)),
            ..Default::default()
        };
        sink.write_line(&row.render())?;
        Ok(0)
    })
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub pair: PairArgs,
    /// Target mean time to false alarm.
    #[arg(long)]
    pub target: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: u64,
    /// Relative tolerance on the achieved estimate.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn calibrate(args: CalibrateArgs) -> Result<i32, CliError> {
    let config = args.network.build()?;
    let pair = args.pair.build()?;

    let mut argv: Vec<String> = vec!["calibrate".into()];
    argv.extend(network_argv(&args.network));
    argv.extend(args.pair.argv());
    argv.extend(["--target".into(), args.target.to_string()]);
    argv.extend(["--trials".into(), args.trials.to_string()]);
    argv.extend(["--tol".into(), args.tol.to_string()]);
    argv.extend(["--seed".into(), args.seed.to_string()]);
    if let Some(path) = &args.output {
        argv.extend(["--output".into(), path.display().to_string()]);
    }

    with_output("calibrate", argv, args.seed, args.output.as_ref(), |sink| {
        let (b, est) = calibrate_threshold(
            args.target,
            &pair,
            &config,
            args.trials,
            args.tol,
            args.seed,
        )?;
        sink.write_line(RESULT_HEADER)?;
        let row = ResultRow {
            gamma_target: Some(args.target),
            b,
            calibrated: true,
            mtfa: Some((est.mean, est.stderr)),
            trials: est.trials,
            censored: est.censored,
            horizon: est.horizon,
            seed: est.seed,
            l: config.num_sensors(),
            m: config.initial_size(),
            n: config.final_size(),
            ..Default::default()
        };
        sink.write_line(&row.render())?;
        Ok(0)
    })
}

// ---------------------------------------------------------------------------
// curve
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct CurveArgs {
    /// Config file driving the sweep.
    #[arg(long)]
    pub config: PathBuf,
    /// Override [run] trials.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Override [run] kl_trials.
    #[arg(long)]
    pub kl_trials: Option<u64>,
    /// Keep only the first N grid points.
    #[arg(long)]
    pub grid_head: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn curve_spec_from_config(cfg: &ConfigFile, args: &CurveArgs) -> Result<CurveSpec, CliError> {
    let pair = DensityPair::new(
        DensityModel::gaussian(
            cfg.get_f64_or("pair", "pre_mean", 0.0)?,
            cfg.get_f64_or("pair", "pre_var", 1.0)?,
        )?,
        DensityModel::gaussian(
            cfg.get_f64_or("pair", "post_mean", 1.0)?,
            cfg.get_f64_or("pair", "post_var", 1.0)?,
        )?,
    )?;
    let config = NetworkConfig::new(
        cfg.get_usize("network", "L")?,
        cfg.get_usize("network", "m")?,
        cfg.get_usize("network", "n")?,
    )?;
    let detector_config = if cfg.has_section("detector") {
        Some(NetworkConfig::new(
            cfg.get_usize("network", "L")?,
            cfg.get_usize("detector", "m")?,
            cfg.get_usize("detector", "n")?,
        )?)
    } else {
        None
    };
    let durations = if config.num_transient_phases() == 0 {
        Vec::new()
    } else {
        cfg.get_u64_list("schedule", "d")?
    };
    let mut gamma_grid = cfg.get_f64_list("run", "gamma")?;
    if let Some(head) = args.grid_head {
        gamma_grid.truncate(head.max(1));
    }
    Ok(CurveSpec {
        gamma_grid,
        pair,
        config,
        detector_config,
        durations,
        policy: parse_policy(cfg.get_or("run", "policy", "uniform-random"))?,
        trials: args
            .trials
            .unwrap_or(cfg.get_u64_or("run", "trials", 2000)?),
        kl_trials: args
            .kl_trials
            .unwrap_or(cfg.get_u64_or("run", "kl_trials", 100_000)?),
        calibrate: cfg.get_bool_or("run", "calibrate", false)?,
        calibration_tolerance: cfg.get_f64_or("run", "calibration_tol", 0.05)?,
        master_seed: cfg.get_u64("run", "seed")?,
        mtfa_horizon_factor: cfg.get_f64_or(
            "run",
            "mtfa_horizon_factor",
            CurveSpec::DEFAULT_MTFA_HORIZON_FACTOR,
        )?,
    })
}

pub fn curve(args: CurveArgs) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::io(format!("read {}: {e}", args.config.display())))?;
    let cfg = ConfigFile::parse(&text)?;
    let spec = curve_spec_from_config(&cfg, &args)?;

    let mut argv: Vec<String> = vec![
        "curve".into(),
        "--config".into(),
        args.config.display().to_string(),
    ];
    argv.extend(["--trials".into(), spec.trials.to_string()]);
    argv.extend(["--kl-trials".into(), spec.kl_trials.to_string()]);
    if let Some(head) = args.grid_head {
        argv.extend(["--grid-head".into(), head.to_string()]);
    }
    if let Some(path) = &args.output {
        argv.extend(["--output".into(), path.display().to_string()]);
    }

    let seed = spec.master_seed;
    let stream_config = spec.config;
    let durations = spec.durations.clone();
    let policy = policy_name(&spec.policy);
    with_output("curve", argv, seed, args.output.as_ref(), |sink| {
        let rows = run_curve(&spec)?;
        sink.write_line(RESULT_HEADER)?;
        for row in rows {
            let out = ResultRow {
                gamma_target: Some(row.gamma_target),
                b: row.threshold,
                calibrated: row.calibrated,
                mtfa: Some((row.mtfa.mean, row.mtfa.stderr)),
                wadd: Some((row.wadd.mean, row.wadd.stderr)),
                theory_wadd: Some(row.theory_wadd),
                trials: spec.trials,
                censored: row.mtfa.censored + row.wadd.censored,
                horizon: row.wadd.horizon,
                seed,
                l: stream_config.num_sensors(),
                m: stream_config.initial_size(),
                n: stream_config.final_size(),
                durations: Some(durations.clone()),
                policy: Some(policy),
            };
            sink.write_line(&out.render())?;
        }
        Ok(0)
    })
}
