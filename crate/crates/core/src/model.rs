//! Scenario configuration, orthogonal pilot set, per-frame user messages, and
//! the random activity schedule that induces the pilot-collision graph.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation constant used for the Doppler shift (m/s).
pub const SPEED_OF_LIGHT_MPS: f64 = 3.0e8;

/// Channel generation backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelBackend {
    /// Sum-of-scatterers fading with temporal correlation set by the Doppler shift.
    Clarke,
    /// Independent circularly-symmetric complex Gaussian coefficients per slot.
    IidRayleigh,
    /// Exactly orthogonal user channels with frame-constant norms (oracle backend).
    OrthoIdeal,
}

/// How a resolved user's contribution is rebuilt before subtraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CancellationMode {
    /// Subtract the scaled soft symbol estimate.
    Soft,
    /// Subtract re-modulated hard decisions.
    Hard,
}

/// All scenario parameters for one simulated frame.
///
/// Serializes to JSON under the exact field names `K`, `M`, `tau`, `beta`,
/// `p_a`, `sigma_n2`, `L`, `carrier_hz`, `speed_mps`, `n_scatterers`,
/// `slot_s`, `channel_backend`, `cancellation_mode`, `seed`. Deserialization
/// rejects unknown keys; every field except `K` may be omitted and falls back
/// to its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystemConfig")]
pub struct SystemConfig {
    /// Number of users sharing the cell.
    #[serde(rename = "K")]
    pub num_users: usize,
    /// Number of base-station antennas.
    #[serde(rename = "M")]
    pub num_antennas: usize,
    /// Number (and length) of orthogonal pilot sequences.
    pub tau: usize,
    /// Slots per frame.
    pub beta: usize,
    /// Per-slot activation probability.
    pub p_a: f64,
    /// Noise variance per receive antenna per sample.
    pub sigma_n2: f64,
    /// Uplink message length in symbols.
    #[serde(rename = "L")]
    pub msg_len: usize,
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// User speed in m/s.
    pub speed_mps: f64,
    /// Number of scatterers in the fading model.
    pub n_scatterers: usize,
    /// Slot duration in seconds.
    pub slot_s: f64,
    pub channel_backend: ChannelBackend,
    pub cancellation_mode: CancellationMode,
    /// Master seed; all randomness in a trial derives from it.
    pub seed: u64,
}

impl SystemConfig {
    /// Builds a config from the user count and pilot count with every other
    /// parameter at its default: `beta = ceil(1.2 K / tau)`, `M = 100`,
    /// `sigma_n2 = 0.1`, `L = 1000`, 1.8 GHz carrier, 3 km/h user speed,
    /// 20 scatterers, 10 ms slots, Clarke fading, soft cancellation, and the
    /// activation probability set for an average resource-block degree of 2.5
    /// (capped at 1).
    pub fn new(num_users: usize, tau: usize) -> Result<Self> {
        let cfg = SystemConfig {
            num_users,
            num_antennas: 100,
            tau,
            beta: default_beta(num_users, tau),
            p_a: default_activation(num_users, tau),
            sigma_n2: 0.1,
            msg_len: 1000,
            carrier_hz: 1.8e9,
            speed_mps: 3.0 / 3.6,
            n_scatterers: 20,
            slot_s: 0.01,
            channel_backend: ChannelBackend::Clarke,
            cancellation_mode: CancellationMode::Soft,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        fn fail(msg: impl Into<String>) -> Result<()> {
            Err(Error::InvalidConfig(msg.into()))
        }
        if self.num_users == 0 {
            return fail("K must be >= 1");
        }
        if self.num_antennas == 0 {
            return fail("M must be >= 1");
        }
        if self.tau == 0 {
            return fail("tau must be >= 1");
        }
        if self.beta == 0 {
            return fail("beta must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.p_a) {
            return fail(format!("p_a must lie in [0, 1], got {}", self.p_a));
        }
        if !self.sigma_n2.is_finite() || self.sigma_n2 < 0.0 {
            return fail(format!("sigma_n2 must be >= 0, got {}", self.sigma_n2));
        }
        if self.msg_len == 0 {
            return fail("L must be >= 1");
        }
        if !self.carrier_hz.is_finite() || self.carrier_hz <= 0.0 {
            return fail("carrier_hz must be positive");
        }
        if !self.speed_mps.is_finite() || self.speed_mps < 0.0 {
            return fail("speed_mps must be >= 0");
        }
        if self.n_scatterers == 0 {
            return fail("n_scatterers must be >= 1");
        }
        if !self.slot_s.is_finite() || self.slot_s <= 0.0 {
            return fail("slot_s must be positive");
        }
        Ok(())
    }

    /// Maximum Doppler shift `(v / c) * f_c` in Hz.
    pub fn doppler_hz(&self) -> f64 {
        self.speed_mps / SPEED_OF_LIGHT_MPS * self.carrier_hz
    }

    /// Total number of resource blocks in the frame.
    pub fn resource_blocks(&self) -> usize {
        self.beta * self.tau
    }

    /// Parses a JSON document; unknown keys are rejected.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads and parses a JSON config file.
    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Returns a copy with one field replaced. `key` must be a JSON field
    /// name; `raw` is parsed as a JSON scalar, falling back to a plain string
    /// (so `channel_backend=Clarke` works without quoting).
    pub fn with_override(&self, key: &str, raw: &str) -> Result<Self> {
        let mut doc = serde_json::to_value(self).map_err(|e| Error::Format(e.to_string()))?;
        let value: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        doc.as_object_mut()
            .expect("config serializes to an object")
            .insert(key.to_string(), value);
        let text = serde_json::to_string(&doc).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_json_str(&text)
    }

    /// Stable 64-bit content fingerprint of the configuration, hex encoded.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        // FNV-1a, 64 bit
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in text.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

/// `ceil(1.2 K / tau)` in exact integer arithmetic.
pub fn default_beta(num_users: usize, tau: usize) -> usize {
    if tau == 0 {
        return 0;
    }
    (12 * num_users).div_ceil(10 * tau)
}

fn default_activation(num_users: usize, tau: usize) -> f64 {
    if num_users == 0 {
        return 0.0;
    }
    (2.5 * tau as f64 / num_users as f64).min(1.0)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystemConfig {
    #[serde(rename = "K")]
    num_users: usize,
    #[serde(rename = "M")]
    num_antennas: Option<usize>,
    tau: Option<usize>,
    beta: Option<usize>,
    p_a: Option<f64>,
    sigma_n2: Option<f64>,
    #[serde(rename = "L")]
    msg_len: Option<usize>,
    carrier_hz: Option<f64>,
    speed_mps: Option<f64>,
    n_scatterers: Option<usize>,
    slot_s: Option<f64>,
    channel_backend: Option<ChannelBackend>,
    cancellation_mode: Option<CancellationMode>,
    seed: Option<u64>,
}

impl TryFrom<RawSystemConfig> for SystemConfig {
    type Error = Error;

    fn try_from(raw: RawSystemConfig) -> Result<Self> {
        let tau = raw.tau.unwrap_or(5);
        let cfg = SystemConfig {
            num_users: raw.num_users,
            num_antennas: raw.num_antennas.unwrap_or(100),
            tau,
            beta: raw.beta.unwrap_or_else(|| default_beta(raw.num_users, tau)),
            p_a: raw
                .p_a
                .unwrap_or_else(|| default_activation(raw.num_users, tau)),
            sigma_n2: raw.sigma_n2.unwrap_or(0.1),
            msg_len: raw.msg_len.unwrap_or(1000),
            carrier_hz: raw.carrier_hz.unwrap_or(1.8e9),
            speed_mps: raw.speed_mps.unwrap_or(3.0 / 3.6),
            n_scatterers: raw.n_scatterers.unwrap_or(20),
            slot_s: raw.slot_s.unwrap_or(0.01),
            channel_backend: raw.channel_backend.unwrap_or(ChannelBackend::Clarke),
            cancellation_mode: raw.cancellation_mode.unwrap_or(CancellationMode::Soft),
            seed: raw.seed.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The `tau` mutually orthogonal pilot sequences, one per column.
///
/// Columns are scaled discrete-Fourier vectors, so `s_i^H s_j` is exactly
/// `tau` for `i = j` and `0` otherwise (up to floating point).
#[derive(Debug, Clone)]
pub struct PilotMatrix {
    columns: Array2<Complex64>,
}

impl PilotMatrix {
    /// Builds the pilot set for `tau` sequences of length `tau`.
    pub fn new(tau: usize) -> Result<Self> {
        if tau == 0 {
            return Err(Error::InvalidParameter("tau must be >= 1".into()));
        }
        let mut columns = Array2::zeros((tau, tau));
        for j in 0..tau {
            for t in 0..tau {
                let phase = -2.0 * std::f64::consts::PI * (j as f64) * (t as f64) / tau as f64;
                columns[(t, j)] = Complex64::from_polar(1.0, phase);
            }
        }
        Ok(PilotMatrix { columns })
    }

    pub fn tau(&self) -> usize {
        self.columns.ncols()
    }

    /// The `j`'th pilot sequence as a length-`tau` view.
    pub fn column(&self, j: usize) -> ArrayView1<'_, Complex64> {
        self.columns.column(j)
    }
}

/// Per-slot pilot choice (or inactivity) for every user in a frame.
///
/// Slot, user, and pilot indices are 0-based throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySchedule {
    choices: Vec<Vec<Option<u32>>>,
    tau: usize,
}

impl ActivitySchedule {
    /// Draws a random schedule: each (slot, user) pair is independently
    /// inactive with probability `1 - p_a`, otherwise a pilot uniform over
    /// the `tau` sequences, so each pilot is chosen with probability
    /// `p_a / tau`.
    pub fn draw(config: &SystemConfig, rng: &mut impl Rng) -> Self {
        let mut choices = vec![vec![None; config.num_users]; config.beta];
        for slot in choices.iter_mut() {
            for entry in slot.iter_mut() {
                if rng.random::<f64>() < config.p_a {
                    *entry = Some(rng.random_range(0..config.tau) as u32);
                }
            }
        }
        ActivitySchedule {
            choices,
            tau: config.tau,
        }
    }

    /// Builds a fixed schedule from explicit per-slot, per-user choices.
    pub fn from_choices(choices: Vec<Vec<Option<u32>>>, tau: usize) -> Result<Self> {
        if choices.is_empty() {
            return Err(Error::InvalidParameter("schedule needs >= 1 slot".into()));
        }
        let num_users = choices[0].len();
        for slot in &choices {
            if slot.len() != num_users {
                return Err(Error::InvalidParameter(
                    "all slots must list the same number of users".into(),
                ));
            }
            if let Some(j) = slot.iter().flatten().find(|&&j| j as usize >= tau) {
                return Err(Error::InvalidParameter(format!(
                    "pilot index {j} exceeds tau = {tau}"
                )));
            }
        }
        Ok(ActivitySchedule { choices, tau })
    }

    pub fn beta(&self) -> usize {
        self.choices.len()
    }

    pub fn num_users(&self) -> usize {
        self.choices[0].len()
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// The pilot chosen by user `k` in slot `n`, or `None` when inactive.
    pub fn choice(&self, n: usize, k: usize) -> Option<usize> {
        self.choices[n][k].map(|j| j as usize)
    }

    /// Number of users occupying resource block (`n`, `j`), i.e. `|A_n^j|`.
    pub fn resource_degree(&self, n: usize, j: usize) -> Result<usize> {
        if n >= self.beta() {
            return Err(Error::IndexOutOfRange {
                what: "slot",
                index: n,
                limit: self.beta(),
            });
        }
        if j >= self.tau {
            return Err(Error::IndexOutOfRange {
                what: "pilot",
                index: j,
                limit: self.tau,
            });
        }
        Ok(self.members(n, j).count())
    }

    /// Users applying pilot `j` in slot `n`.
    pub fn members(&self, n: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.choices[n]
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c == Some(j as u32))
            .map(|(k, _)| k)
    }

    /// Users active in slot `n` regardless of pilot.
    pub fn active_users(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.choices[n]
            .iter()
            .enumerate()
            .filter_map(|(k, c)| c.map(|j| (k, j as usize)))
    }

    /// All (slot, pilot) blocks user `k` participates in.
    pub fn user_pattern(&self, k: usize) -> Vec<(usize, usize)> {
        (0..self.beta())
            .filter_map(|n| self.choice(n, k).map(|j| (n, j)))
            .collect()
    }

    pub fn is_ever_active(&self, k: usize) -> bool {
        (0..self.beta()).any(|n| self.choices[n][k].is_some())
    }
}

/// One user's uplink payload: `L` antipodal symbols and the matching bits.
///
/// Bit `true` maps to symbol `+1`, bit `false` to `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserMessage {
    bits: Vec<bool>,
    symbols: Vec<f64>,
}

impl UserMessage {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let symbols = bits.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
        UserMessage { bits, symbols }
    }

    /// Draws `len` uniform random bits.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        Self::from_bits((0..len).map(|_| rng.random::<bool>()).collect())
    }

    /// One message per user, drawn once per frame.
    pub fn draw_all(num_users: usize, len: usize, rng: &mut impl Rng) -> Vec<Self> {
        (0..num_users).map(|_| Self::random(len, rng)).collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Antipodal symbol values, each exactly `+1` or `-1`.
    pub fn symbols(&self) -> &[f64] {
        &self.symbols
    }
}

/// Fixed two-slot, two-pilot, three-user schedule used by the decoder's
/// worked-example tests: slot 0 = {users 0, 1 -> pilot 0; user 2 -> pilot 1},
/// slot 1 = {user 1 -> pilot 0; users 0, 2 -> pilot 1}.
#[cfg(test)]
pub(crate) fn fig3_schedule() -> ActivitySchedule {
    ActivitySchedule::from_choices(
        vec![
            vec![Some(0), Some(0), Some(1)],
            vec![Some(1), Some(0), Some(1)],
        ],
        2,
    )
    .unwrap()
}
