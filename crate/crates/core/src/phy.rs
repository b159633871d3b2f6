//! Received-signal synthesis and base-station front-end processing:
//! least-squares channel estimation over each pilot, the contaminated
//! data-detection baseline, and the matched filters that turn raw
//! observations into per-resource-block collision-graph signals.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::ChannelFrame;
use crate::error::{Error, Result};
use crate::model::{ActivitySchedule, PilotMatrix, UserMessage};

/// Received uplink pilot signal, one `M x tau` matrix per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservation {
    slots: Vec<Array2<Complex64>>,
}

impl PilotObservation {
    pub fn beta(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, n: usize) -> &Array2<Complex64> {
        &self.slots[n]
    }
}

/// Received uplink data signal, one `M x L` matrix per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct DataObservation {
    slots: Vec<Array2<Complex64>>,
}

impl DataObservation {
    pub fn beta(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, n: usize) -> &Array2<Complex64> {
        &self.slots[n]
    }
}

/// Matched-filter outputs for every resource block: a length-`L` data signal
/// and a length-`tau` pilot signal per (slot, pilot) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredFrame {
    data: Vec<Vec<Array1<Complex64>>>,
    pilot: Vec<Vec<Array1<Complex64>>>,
}

impl FilteredFrame {
    pub fn beta(&self) -> usize {
        self.data.len()
    }

    pub fn tau(&self) -> usize {
        self.data[0].len()
    }

    pub fn msg_len(&self) -> usize {
        self.data[0][0].len()
    }

    /// Filtered data signal of resource block (`n`, `j`).
    pub fn data(&self, n: usize, j: usize) -> &Array1<Complex64> {
        &self.data[n][j]
    }

    /// Filtered pilot signal of resource block (`n`, `j`).
    pub fn pilot(&self, n: usize, j: usize) -> &Array1<Complex64> {
        &self.pilot[n][j]
    }
}

fn add_noise(matrix: &mut Array2<Complex64>, sigma_n2: f64, rng: &mut impl Rng) {
    if sigma_n2 == 0.0 {
        return;
    }
    let scale = (sigma_n2 / 2.0).sqrt();
    for v in matrix.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *v += Complex64::new(re * scale, im * scale);
    }
}

/// Synthesizes the received pilot signal of slot `n`:
/// `sum_j sum_{k in A_n^j} h_nk s_j^T` plus circularly-symmetric noise.
pub fn synthesize_pilot_slot(
    channels: &ChannelFrame,
    schedule: &ActivitySchedule,
    pilots: &PilotMatrix,
    n: usize,
    sigma_n2: f64,
    rng: &mut impl Rng,
) -> Array2<Complex64> {
    let m = channels.num_antennas();
    let tau = pilots.tau();
    let mut y = Array2::zeros((m, tau));
    for (k, j) in schedule.active_users(n) {
        let h = channels.h(n, k);
        let s = pilots.column(j);
        for (antenna, &hm) in h.iter().enumerate() {
            let mut row = y.row_mut(antenna);
            for (t, &st) in s.iter().enumerate() {
                row[t] += hm * st;
            }
        }
    }
    add_noise(&mut y, sigma_n2, rng);
    y
}

/// Synthesizes the received data signal of slot `n`:
/// `sum_{k in A_n} h_nk x_k^T` plus circularly-symmetric noise.
pub fn synthesize_data_slot(
    channels: &ChannelFrame,
    schedule: &ActivitySchedule,
    messages: &[UserMessage],
    n: usize,
    sigma_n2: f64,
    rng: &mut impl Rng,
) -> Array2<Complex64> {
    let m = channels.num_antennas();
    let msg_len = messages.first().map_or(0, UserMessage::len);
    let mut y = Array2::zeros((m, msg_len));
    for (k, _) in schedule.active_users(n) {
        let h = channels.h(n, k);
        let x = messages[k].symbols();
        for (antenna, &hm) in h.iter().enumerate() {
            let row = y.row_mut(antenna).into_slice().expect("row-major layout");
            for (yl, &xl) in row.iter_mut().zip(x) {
                *yl += hm * xl;
            }
        }
    }
    add_noise(&mut y, sigma_n2, rng);
    y
}

/// Whole-frame pilot synthesis; slots consume `rng` in slot order.
pub fn synthesize_uplink_pilot(
    channels: &ChannelFrame,
    schedule: &ActivitySchedule,
    pilots: &PilotMatrix,
    sigma_n2: f64,
    rng: &mut impl Rng,
) -> PilotObservation {
    let slots = (0..channels.beta())
        .map(|n| synthesize_pilot_slot(channels, schedule, pilots, n, sigma_n2, rng))
        .collect();
    PilotObservation { slots }
}

/// Whole-frame data synthesis; slots consume `rng` in slot order.
pub fn synthesize_uplink_data(
    channels: &ChannelFrame,
    schedule: &ActivitySchedule,
    messages: &[UserMessage],
    sigma_n2: f64,
    rng: &mut impl Rng,
) -> DataObservation {
    let slots = (0..channels.beta())
        .map(|n| synthesize_data_slot(channels, schedule, messages, n, sigma_n2, rng))
        .collect();
    DataObservation { slots }
}

/// Least-squares channel estimate for pilot `j` from one slot's pilot
/// observation: `((s_j^H s_j)^{-1} s_j^H Y^T)^T`, which recovers the sum of
/// the channels of all users that applied `s_j` plus a noise term.
pub fn ls_channel_estimate(
    y_pu: &Array2<Complex64>,
    pilots: &PilotMatrix,
    j: usize,
) -> Array1<Complex64> {
    let s = pilots.column(j);
    let tau = s.len() as f64;
    let m = y_pu.nrows();
    let mut phi = Array1::zeros(m);
    for antenna in 0..m {
        let row = y_pu.row(antenna);
        let acc: Complex64 = s
            .iter()
            .zip(row.iter())
            .map(|(st, yt)| st.conj() * yt)
            .sum();
        phi[antenna] = acc / tau;
    }
    phi
}

/// Contaminated data detection baseline:
/// `((phi^H phi)^{-1} phi^H Y_u)^T`, the norm-weighted mixture of all
/// messages colliding on the estimate. Not used by the cancellation
/// pipeline; it demonstrates what a pilot collision does to naive detection.
pub fn naive_data_estimate(
    phi: ArrayView1<'_, Complex64>,
    y_u: &Array2<Complex64>,
) -> Result<Array1<Complex64>> {
    let norm_sq: f64 = phi.iter().map(|v| v.norm_sqr()).sum();
    if norm_sq <= 0.0 {
        return Err(Error::InvalidParameter(
            "data estimate needs a nonzero channel estimate".into(),
        ));
    }
    Ok(matched_filter_data(phi, y_u) / Complex64::new(norm_sq, 0.0))
}

/// Matched filter for the data signal: `(phi^H Y_u)^T`. On orthogonal
/// channels this reduces to `sum_k ||h_k||^2 x_k` over the block's users.
pub fn matched_filter_data(
    phi: ArrayView1<'_, Complex64>,
    y_u: &Array2<Complex64>,
) -> Array1<Complex64> {
    let len = y_u.ncols();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (antenna, &coef) in phi.iter().enumerate() {
        let c = coef.conj();
        let row = y_u.row(antenna);
        let row = row.to_slice().expect("row-major layout");
        for (o, &yl) in out.iter_mut().zip(row) {
            *o += c * yl;
        }
    }
    Array1::from_vec(out)
}

/// Matched filter for the pilot signal: `(phi^H Y_pu)^T`.
pub fn matched_filter_pilot(
    phi: ArrayView1<'_, Complex64>,
    y_pu: &Array2<Complex64>,
) -> Array1<Complex64> {
    let tau = y_pu.ncols();
    let mut out = Array1::zeros(tau);
    for (antenna, &coef) in phi.iter().enumerate() {
        let c = coef.conj();
        let row = y_pu.row(antenna);
        for (t, &yt) in row.iter().enumerate() {
            out[t] += c * yt;
        }
    }
    out
}

/// Runs the whole front end slot by slot — synthesis, LS estimation for every
/// pilot index, matched filtering — holding only one slot's raw observations
/// at a time. Consumes the two noise streams exactly like the whole-frame
/// synthesis functions, so the result is bit-identical to filtering
/// [`synthesize_uplink_pilot`] / [`synthesize_uplink_data`] outputs.
#[allow(clippy::too_many_arguments)]
pub fn filter_frame(
    channels: &ChannelFrame,
    schedule: &ActivitySchedule,
    messages: &[UserMessage],
    pilots: &PilotMatrix,
    sigma_n2: f64,
    pilot_rng: &mut impl Rng,
    data_rng: &mut impl Rng,
) -> FilteredFrame {
    let tau = pilots.tau();
    let mut data = Vec::with_capacity(channels.beta());
    let mut pilot = Vec::with_capacity(channels.beta());
    for n in 0..channels.beta() {
        let y_pu = synthesize_pilot_slot(channels, schedule, pilots, n, sigma_n2, pilot_rng);
        let y_u = synthesize_data_slot(channels, schedule, messages, n, sigma_n2, data_rng);
        let mut f_row = Vec::with_capacity(tau);
        let mut g_row = Vec::with_capacity(tau);
        for j in 0..tau {
            let phi = ls_channel_estimate(&y_pu, pilots, j);
            f_row.push(matched_filter_data(phi.view(), &y_u));
            g_row.push(matched_filter_pilot(phi.view(), &y_pu));
        }
        data.push(f_row);
        pilot.push(g_row);
    }
    FilteredFrame { data, pilot }
}

/// Matched-filters already-synthesized whole-frame observations.
pub fn filter_observations(
    y_pu: &PilotObservation,
    y_u: &DataObservation,
    pilots: &PilotMatrix,
) -> FilteredFrame {
    let tau = pilots.tau();
    let mut data = Vec::with_capacity(y_pu.beta());
    let mut pilot = Vec::with_capacity(y_pu.beta());
    for n in 0..y_pu.beta() {
        let mut f_row = Vec::with_capacity(tau);
        let mut g_row = Vec::with_capacity(tau);
        for j in 0..tau {
            let phi = ls_channel_estimate(y_pu.slot(n), pilots, j);
            f_row.push(matched_filter_data(phi.view(), y_u.slot(n)));
            g_row.push(matched_filter_pilot(phi.view(), y_pu.slot(n)));
        }
        data.push(f_row);
        pilot.push(g_row);
    }
    FilteredFrame { data, pilot }
}
