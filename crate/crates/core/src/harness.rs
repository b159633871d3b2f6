//! Monte Carlo experiment runner: seeded independent trials of the full
//! uplink pipeline, aggregation with normal-approximation confidence
//! intervals, parameter sweeps, and CSV/JSON result files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{aloha_optimal_pa, pa_from_avg_degree};
use crate::channel::generate_frame_channels;
use crate::decoder::{aloha_decode, sic_decode, DecodingReport};
use crate::error::{Error, Result};
use crate::model::{default_beta, ActivitySchedule, PilotMatrix, SystemConfig, UserMessage};
use crate::phy::{filter_frame, FilteredFrame};

/// SplitMix64 finalizer; the stable mixing primitive behind seed derivation.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`. Depends only on the pair, so
/// extending an experiment never perturbs earlier trials.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ mix64(index.wrapping_add(1)))
}

/// Identifier for independent random substreams within one trial.
const STREAM_ACTIVITY: u64 = 1;
const STREAM_MESSAGES: u64 = 2;
const STREAM_CHANNELS: u64 = 3;
const STREAM_PILOT_NOISE: u64 = 4;
const STREAM_DATA_NOISE: u64 = 5;
/// Salt for the independent ALOHA-at-own-p_a companion trial.
const ALOHA_TRIAL_SALT: u64 = 0x0041_4c4f_4841;

fn substream(trial_seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(trial_seed ^ mix64(stream)))
}

/// Decoding scheme labels used in results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "SIC")]
    Sic,
    #[serde(rename = "ALOHA")]
    Aloha,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Sic => "SIC",
            Scheme::Aloha => "ALOHA",
        })
    }
}

/// Metrics of one decoder on one simulated frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub config_fingerprint: String,
    pub seed: u64,
    pub scheme: Scheme,
    pub throughput: f64,
    pub goodput: f64,
    pub bler: f64,
    pub decoded: usize,
    pub correct: usize,
}

impl TrialResult {
    fn new(config: &SystemConfig, seed: u64, scheme: Scheme, report: &DecodingReport) -> Self {
        TrialResult {
            config_fingerprint: config.fingerprint(),
            seed,
            scheme,
            throughput: report.throughput,
            goodput: report.goodput,
            bler: report.bler,
            decoded: report.decoded,
            correct: report.correct,
        }
    }
}

/// Paired outcome of both decoders on identical signals.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub sic: TrialResult,
    pub aloha: TrialResult,
}

struct SynthesizedFrame {
    schedule: ActivitySchedule,
    messages: Vec<UserMessage>,
    pilots: PilotMatrix,
    filtered: FilteredFrame,
}

fn synthesize_trial(config: &SystemConfig, seed: u64) -> Result<SynthesizedFrame> {
    let pilots = PilotMatrix::new(config.tau)?;
    let schedule = ActivitySchedule::draw(config, &mut substream(seed, STREAM_ACTIVITY));
    let messages = UserMessage::draw_all(
        config.num_users,
        config.msg_len,
        &mut substream(seed, STREAM_MESSAGES),
    );
    let channels = generate_frame_channels(config, &mut substream(seed, STREAM_CHANNELS))?;
    let filtered = filter_frame(
        &channels,
        &schedule,
        &messages,
        &pilots,
        config.sigma_n2,
        &mut substream(seed, STREAM_PILOT_NOISE),
        &mut substream(seed, STREAM_DATA_NOISE),
    );
    Ok(SynthesizedFrame {
        schedule,
        messages,
        pilots,
        filtered,
    })
}

/// Full per-frame outcome, retained for oracle comparisons.
#[derive(Debug, Clone)]
pub struct TrialDetail {
    pub schedule: ActivitySchedule,
    pub sic: DecodingReport,
    pub aloha: DecodingReport,
}

/// Runs one seeded frame end to end — activity, messages, channels, signal
/// synthesis, matched filtering — and decodes it with both schemes on the
/// identical filtered signals, returning the full per-user reports.
/// Deterministic given `(config, seed)`.
pub fn run_trial_detailed(config: &SystemConfig, seed: u64) -> Result<TrialDetail> {
    config.validate()?;
    let frame = synthesize_trial(config, seed)?;
    let sic = sic_decode(
        &frame.filtered,
        &frame.schedule,
        &frame.messages,
        &frame.pilots,
        config,
    );
    let aloha = aloha_decode(
        &frame.filtered,
        &frame.schedule,
        &frame.messages,
        &frame.pilots,
        config,
    );
    assert!(
        sic.decoded >= aloha.decoded,
        "SIC decoded {} < ALOHA decoded {} on shared signals (seed {seed})",
        sic.decoded,
        aloha.decoded
    );
    Ok(TrialDetail {
        schedule: frame.schedule,
        sic,
        aloha,
    })
}

/// [`run_trial_detailed`] reduced to the per-scheme metric pair.
pub fn run_trial(config: &SystemConfig, seed: u64) -> Result<TrialOutcome> {
    let detail = run_trial_detailed(config, seed)?;
    Ok(TrialOutcome {
        sic: TrialResult::new(config, seed, Scheme::Sic, &detail.sic),
        aloha: TrialResult::new(config, seed, Scheme::Aloha, &detail.aloha),
    })
}

/// Synthesizes an independent frame and runs only the ALOHA decoder; used
/// when the baseline is evaluated at its own activation probability.
fn run_aloha_trial(config: &SystemConfig, seed: u64) -> Result<TrialResult> {
    config.validate()?;
    let frame = synthesize_trial(config, seed)?;
    let report = aloha_decode(
        &frame.filtered,
        &frame.schedule,
        &frame.messages,
        &frame.pilots,
        config,
    );
    Ok(TrialResult::new(config, seed, Scheme::Aloha, &report))
}

/// Experiment shape: trial count, worker pool size, and whether the ALOHA
/// baseline runs at its own optimum `p_a = tau / K` on independent frames
/// instead of sharing the SIC frames.
#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub trials: usize,
    pub workers: usize,
    pub aloha_at_optimal_pa: bool,
}

impl ExperimentOptions {
    pub fn new(trials: usize) -> Self {
        ExperimentOptions {
            trials,
            workers: 1,
            aloha_at_optimal_pa: false,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_aloha_at_optimal_pa(mut self, enabled: bool) -> Self {
        self.aloha_at_optimal_pa = enabled;
        self
    }
}

/// Mean and 95% confidence half-width of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci95: f64,
}

fn summarize(values: impl Iterator<Item = f64> + Clone) -> MeanCi {
    let n = values.clone().count();
    if n == 0 {
        return MeanCi {
            mean: 0.0,
            ci95: 0.0,
        };
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return MeanCi { mean, ci95: 0.0 };
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    MeanCi {
        mean,
        ci95: 1.96 * (var / n as f64).sqrt(),
    }
}

/// Per-scheme metric summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub throughput: MeanCi,
    pub goodput: MeanCi,
    pub bler: MeanCi,
}

fn summarize_scheme(results: &[TrialResult]) -> SchemeSummary {
    SchemeSummary {
        throughput: summarize(results.iter().map(|r| r.throughput)),
        goodput: summarize(results.iter().map(|r| r.goodput)),
        bler: summarize(results.iter().map(|r| r.bler)),
    }
}

/// Aggregated experiment outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub trials: usize,
    pub sic: SchemeSummary,
    pub aloha: SchemeSummary,
}

/// Runs every trial of an experiment and returns the per-trial outcomes in
/// trial-index order, independent of the worker count.
pub fn run_trials(config: &SystemConfig, options: &ExperimentOptions) -> Result<Vec<TrialOutcome>> {
    if options.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    config.validate()?;
    let aloha_config = if options.aloha_at_optimal_pa {
        let mut own = config.clone();
        own.p_a = aloha_optimal_pa(config.num_users, config.tau);
        own.validate()?;
        Some(own)
    } else {
        None
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| {
        (0..options.trials)
            .into_par_iter()
            .map(|index| {
                let seed = trial_seed(config.seed, index as u64);
                let mut outcome = run_trial(config, seed)?;
                if let Some(own) = &aloha_config {
                    outcome.aloha = run_aloha_trial(own, mix64(seed ^ ALOHA_TRIAL_SALT))?;
                }
                Ok(outcome)
            })
            .collect()
    })
}

/// Runs an experiment and aggregates the per-scheme metrics.
pub fn run_experiment(
    config: &SystemConfig,
    options: &ExperimentOptions,
) -> Result<AggregateResult> {
    let outcomes = run_trials(config, options)?;
    let sic: Vec<TrialResult> = outcomes.iter().map(|o| o.sic.clone()).collect();
    let aloha: Vec<TrialResult> = outcomes.iter().map(|o| o.aloha.clone()).collect();
    Ok(AggregateResult {
        trials: outcomes.len(),
        sic: summarize_scheme(&sic),
        aloha: summarize_scheme(&aloha),
    })
}

/// A sweepable scenario parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Average resource-block degree; each point recomputes `p_a`.
    AvgDegree,
    /// User count; each point recomputes `beta` and holds the average
    /// degree at 2.5.
    NumUsers,
    /// Antenna count; everything else fixed.
    NumAntennas,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::AvgDegree => "avg_degree",
            SweepAxis::NumUsers => "K",
            SweepAxis::NumAntennas => "M",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg_degree" => Ok(SweepAxis::AvgDegree),
            "K" => Ok(SweepAxis::NumUsers),
            "M" => Ok(SweepAxis::NumAntennas),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep axis {other:?}; expected avg_degree, K, or M"
            ))),
        }
    }
}

fn as_count(value: f64, axis: &SweepAxis) -> Result<usize> {
    if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
        return Err(Error::InvalidParameter(format!(
            "{} sweep needs positive integers, got {value}",
            axis.name()
        )));
    }
    Ok(value as usize)
}

/// Derives the configuration of one sweep point from the base scenario.
pub fn sweep_point_config(
    base: &SystemConfig,
    axis: SweepAxis,
    value: f64,
) -> Result<SystemConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::AvgDegree => {
            cfg.p_a = pa_from_avg_degree(value, cfg.num_users, cfg.tau)?;
        }
        SweepAxis::NumUsers => {
            cfg.num_users = as_count(value, &axis)?;
            cfg.beta = default_beta(cfg.num_users, cfg.tau);
            cfg.p_a = pa_from_avg_degree(2.5, cfg.num_users, cfg.tau)?;
        }
        SweepAxis::NumAntennas => {
            cfg.num_antennas = as_count(value, &axis)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// One line of a result table: experiment coordinates plus aggregated
/// metrics for a single scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub axis_name: String,
    pub axis_value: f64,
    pub scheme: String,
    #[serde(rename = "K")]
    pub num_users: usize,
    #[serde(rename = "M")]
    pub num_antennas: usize,
    pub tau: usize,
    pub beta: usize,
    pub p_a: f64,
    pub trials: usize,
    pub throughput_mean: f64,
    pub throughput_ci95: f64,
    pub goodput_mean: f64,
    pub goodput_ci95: f64,
    pub bler_mean: f64,
    pub bler_ci95: f64,
}

const CSV_HEADER: [&str; 15] = [
    "axis_name",
    "axis_value",
    "scheme",
    "K",
    "M",
    "tau",
    "beta",
    "p_a",
    "trials",
    "throughput_mean",
    "throughput_ci95",
    "goodput_mean",
    "goodput_ci95",
    "bler_mean",
    "bler_ci95",
];

/// Expands one experiment point into its SIC and ALOHA rows. The `p_a`
/// column reports the activation probability each scheme actually used.
pub fn result_rows(
    config: &SystemConfig,
    aggregate: &AggregateResult,
    axis_name: &str,
    axis_value: f64,
    aloha_at_optimal_pa: bool,
) -> Vec<ResultRow> {
    let row = |scheme: Scheme, summary: &SchemeSummary, p_a: f64| ResultRow {
        axis_name: axis_name.to_string(),
        axis_value,
        scheme: scheme.to_string(),
        num_users: config.num_users,
        num_antennas: config.num_antennas,
        tau: config.tau,
        beta: config.beta,
        p_a,
        trials: aggregate.trials,
        throughput_mean: summary.throughput.mean,
        throughput_ci95: summary.throughput.ci95,
        goodput_mean: summary.goodput.mean,
        goodput_ci95: summary.goodput.ci95,
        bler_mean: summary.bler.mean,
        bler_ci95: summary.bler.ci95,
    };
    let aloha_pa = if aloha_at_optimal_pa {
        aloha_optimal_pa(config.num_users, config.tau)
    } else {
        config.p_a
    };
    vec![
        row(Scheme::Sic, &aggregate.sic, config.p_a),
        row(Scheme::Aloha, &aggregate.aloha, aloha_pa),
    ]
}

/// Sweeps one axis over the given values; two rows (SIC, ALOHA) per value.
pub fn sweep(
    base: &SystemConfig,
    axis: SweepAxis,
    values: &[f64],
    options: &ExperimentOptions,
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::with_capacity(values.len() * 2);
    for &value in values {
        let cfg = sweep_point_config(base, axis, value)?;
        let aggregate = run_experiment(&cfg, options)?;
        rows.extend(result_rows(
            &cfg,
            &aggregate,
            axis.name(),
            value,
            options.aloha_at_optimal_pa,
        ));
    }
    Ok(rows)
}

/// Result file encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown output format {other:?}; expected csv or json"
            ))),
        }
    }
}

/// Writes a result table. CSV columns follow [`CSV_HEADER`] exactly (a
/// header-only file for an empty table); JSON is an array of row objects
/// with the same field names.
pub fn write_results(
    rows: &[ResultRow],
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    let path = path.as_ref();
    match format {
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_path(path)
                .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
            if rows.is_empty() {
                writer
                    .write_record(CSV_HEADER)
                    .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            }
            for row in rows {
                writer
                    .serialize(row)
                    .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            }
            writer.flush().map_err(|e| Error::io(path, e))?;
        }
        OutputFormat::Json => {
            let text =
                serde_json::to_string_pretty(rows).map_err(|e| Error::Format(e.to_string()))?;
            std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

/// Parses a result table back from disk.
pub fn read_results(path: impl AsRef<Path>, format: OutputFormat) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    match format {
        OutputFormat::Csv => {
            let mut reader = csv::Reader::from_path(path)
                .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
            reader
                .deserialize()
                .collect::<std::result::Result<Vec<ResultRow>, _>>()
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        }
        OutputFormat::Json => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
        }
    }
}

/// Provenance record written next to every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SystemConfig,
    pub master_seed: u64,
    pub trials: usize,
    pub workers: usize,
    pub aloha_at_optimal_pa: bool,
    pub version: String,
}

impl RunManifest {
    pub fn new(config: &SystemConfig, options: &ExperimentOptions) -> Self {
        RunManifest {
            config: config.clone(),
            master_seed: config.seed,
            trials: options.trials,
            workers: options.workers,
            aloha_at_optimal_pa: options.aloha_at_optimal_pa,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Writes the manifest alongside `result_path` (suffix `.manifest.json`)
/// and returns the manifest path.
pub fn write_manifest(manifest: &RunManifest, result_path: impl AsRef<Path>) -> Result<PathBuf> {
    let result_path = result_path.as_ref();
    let mut name = result_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".manifest.json");
    let path = result_path.with_file_name(name);
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
