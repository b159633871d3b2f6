//! Simulation library for coded random pilot access in a single-cell
//! massive MIMO uplink.
//!
//! Users pick pilot sequences at random per slot; the base station turns the
//! resulting contaminated observations into per-resource-block matched-filter
//! signals whose coefficients are the (slowly varying) channel norms, then
//! peels the collision graph by successive interference cancellation.
//! A framed slotted ALOHA baseline, closed-form degree/delay analytics, and
//! a seeded Monte Carlo harness with parameter sweeps round out the library.
//!
//! Modules follow the processing chain:
//!
//! - [`model`] — scenario configuration, pilots, messages, activity schedule
//! - [`channel`] — fading backends and channel-norm helpers
//! - [`phy`] — signal synthesis, LS estimation, matched filtering
//! - [`decoder`] — SIC/peeling decoder and the ALOHA baseline
//! - [`analysis`] — closed-form degree and delay formulas
//! - [`harness`] — seeded trials, sweeps, and result files

pub mod analysis;
pub mod channel;
pub mod decoder;
pub mod error;
pub mod harness;
pub mod model;
pub mod phy;

pub use channel::{channel_norm_sq, generate_frame_channels, ChannelFrame, ScattererSet};
pub use decoder::{
    aloha_decode, sic_decode, sic_decode_detailed, DecodingReport, ResidualState, UserStatus,
};
pub use error::{Error, Result};
pub use harness::{
    run_experiment, run_trial, run_trial_detailed, run_trials, sweep, trial_seed, write_manifest,
    write_results, AggregateResult, ExperimentOptions, OutputFormat, ResultRow, RunManifest,
    Scheme, SweepAxis, TrialDetail, TrialOutcome, TrialResult,
};
pub use model::{
    ActivitySchedule, CancellationMode, ChannelBackend, PilotMatrix, SystemConfig, UserMessage,
};
pub use phy::{
    filter_frame, ls_channel_estimate, matched_filter_data, matched_filter_pilot,
    naive_data_estimate, synthesize_uplink_data, synthesize_uplink_pilot, DataObservation,
    FilteredFrame, PilotObservation,
};
