//! Per-slot, per-user channel vector generation under three backends:
//! sum-of-scatterers fading (temporally correlated), i.i.d. Rayleigh per
//! slot, and an exactly-orthogonal synthetic backend used for oracle tests.

use std::io::{Read, Write};

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{ChannelBackend, SystemConfig};

/// Angles of arrival and initial phases for one (user, antenna) pair,
/// fixed for the whole frame. All entries are i.i.d. uniform on [-pi, pi).
#[derive(Debug, Clone)]
pub struct ScattererSet {
    pub angles: Vec<f64>,
    pub phases: Vec<f64>,
}

impl ScattererSet {
    pub fn draw(n_scatterers: usize, rng: &mut impl Rng) -> Self {
        fn uniform_angle(rng: &mut impl Rng) -> f64 {
            let u: f64 = rng.random();
            -std::f64::consts::PI + u * 2.0 * std::f64::consts::PI
        }
        let angles = (0..n_scatterers).map(|_| uniform_angle(rng)).collect();
        let phases = (0..n_scatterers).map(|_| uniform_angle(rng)).collect();
        ScattererSet { angles, phases }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// One fading coefficient under the sum-of-scatterers model:
/// `(1/sqrt(N_s)) sum_i exp(j (2 pi f_d n t_s cos(alpha_i) + phi_i))`.
pub fn clarke_coefficient(
    scatterers: &ScattererSet,
    doppler_hz: f64,
    slot: usize,
    slot_s: f64,
) -> Complex64 {
    let t = slot as f64 * slot_s;
    let sum: Complex64 = scatterers
        .angles
        .iter()
        .zip(&scatterers.phases)
        .map(|(&alpha, &phi)| {
            Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * doppler_hz * t * alpha.cos() + phi,
            )
        })
        .sum();
    sum / (scatterers.len() as f64).sqrt()
}

/// All channel vectors of one frame: `h(n, k)` has length `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFrame {
    slots: Vec<Vec<Array1<Complex64>>>,
    doppler_hz: f64,
}

impl ChannelFrame {
    pub fn from_slots(slots: Vec<Vec<Array1<Complex64>>>, doppler_hz: f64) -> Self {
        ChannelFrame { slots, doppler_hz }
    }

    pub fn beta(&self) -> usize {
        self.slots.len()
    }

    pub fn num_users(&self) -> usize {
        self.slots[0].len()
    }

    pub fn num_antennas(&self) -> usize {
        self.slots[0][0].len()
    }

    pub fn doppler_hz(&self) -> f64 {
        self.doppler_hz
    }

    /// Channel vector of user `k` in slot `n`.
    pub fn h(&self, n: usize, k: usize) -> &Array1<Complex64> {
        &self.slots[n][k]
    }
}

/// Squared Euclidean norm of a channel vector, `||h||^2`.
pub fn channel_norm_sq(h: ArrayView1<'_, Complex64>) -> f64 {
    h.iter().map(|v| v.norm_sqr()).sum()
}

/// Generates the frame's channels under the configured backend.
///
/// `OrthoIdeal` requires `K <= M`; its per-user squared norm is drawn once
/// per frame from the chi-square law of an `M`-dimensional complex Gaussian
/// and held constant across slots, while a fresh random phase per slot keeps
/// the coefficients themselves varying.
pub fn generate_frame_channels(config: &SystemConfig, rng: &mut impl Rng) -> Result<ChannelFrame> {
    let beta = config.beta;
    let k_users = config.num_users;
    let m = config.num_antennas;
    let doppler = config.doppler_hz();

    let slots = match config.channel_backend {
        ChannelBackend::Clarke => {
            let mut slots = vec![vec![Array1::zeros(m); k_users]; beta];
            let inv_sqrt_ns = 1.0 / (config.n_scatterers as f64).sqrt();
            for k in 0..k_users {
                for antenna in 0..m {
                    let set = ScattererSet::draw(config.n_scatterers, rng);
                    // Phasor iteration: rotate each scatterer by its per-slot
                    // Doppler increment instead of re-evaluating sin/cos.
                    let step = 2.0 * std::f64::consts::PI * doppler * config.slot_s;
                    let mut phasors: Vec<Complex64> = set
                        .phases
                        .iter()
                        .map(|&phi| Complex64::from_polar(1.0, phi))
                        .collect();
                    let rotations: Vec<Complex64> = set
                        .angles
                        .iter()
                        .map(|&alpha| Complex64::from_polar(1.0, step * alpha.cos()))
                        .collect();
                    for slot in slots.iter_mut() {
                        let sum: Complex64 = phasors.iter().sum();
                        slot[k][antenna] = sum * inv_sqrt_ns;
                        for (v, w) in phasors.iter_mut().zip(&rotations) {
                            *v *= *w;
                        }
                    }
                }
            }
            slots
        }
        ChannelBackend::IidRayleigh => {
            let scale = 0.5f64.sqrt();
            (0..beta)
                .map(|_| {
                    (0..k_users)
                        .map(|_| {
                            Array1::from_iter((0..m).map(|_| {
                                let re: f64 = StandardNormal.sample(rng);
                                let im: f64 = StandardNormal.sample(rng);
                                Complex64::new(re * scale, im * scale)
                            }))
                        })
                        .collect()
                })
                .collect()
        }
        ChannelBackend::OrthoIdeal => {
            if k_users > m {
                return Err(Error::InvalidConfig(format!(
                    "OrthoIdeal backend needs K <= M, got K = {k_users}, M = {m}"
                )));
            }
            let gamma = Gamma::new(m as f64, 1.0)
                .map_err(|e| Error::InvalidConfig(format!("norm distribution: {e}")))?;
            let amplitudes: Vec<f64> = (0..k_users).map(|_| gamma.sample(rng).sqrt()).collect();
            (0..beta)
                .map(|_| {
                    amplitudes
                        .iter()
                        .enumerate()
                        .map(|(k, &amp)| {
                            let phase: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                            let mut h = Array1::zeros(m);
                            h[k] = Complex64::from_polar(amp, phase);
                            h
                        })
                        .collect()
                })
                .collect()
        }
    };
    Ok(ChannelFrame {
        slots,
        doppler_hz: doppler,
    })
}

/// Writes a frame as a regression fixture: a `(beta, K, M)` header of 32-bit
/// little-endian unsigned integers followed by row-major (slot, user,
/// antenna) coefficients, each stored as two little-endian `f32` values.
pub fn dump_channel_frame(frame: &ChannelFrame, out: &mut impl Write) -> std::io::Result<()> {
    out.write_all(&(frame.beta() as u32).to_le_bytes())?;
    out.write_all(&(frame.num_users() as u32).to_le_bytes())?;
    out.write_all(&(frame.num_antennas() as u32).to_le_bytes())?;
    for n in 0..frame.beta() {
        for k in 0..frame.num_users() {
            for v in frame.h(n, k) {
                out.write_all(&(v.re as f32).to_le_bytes())?;
                out.write_all(&(v.im as f32).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Reads a fixture written by [`dump_channel_frame`]. The Doppler shift is
/// not part of the format and must be supplied by the caller.
pub fn load_channel_frame(input: &mut impl Read, doppler_hz: f64) -> Result<ChannelFrame> {
    fn read_u32(input: &mut impl Read) -> Result<u32> {
        let mut buf = [0u8; 4];
        input
            .read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("fixture header: {e}")))?;
        Ok(u32::from_le_bytes(buf))
    }
    let beta = read_u32(input)? as usize;
    let k_users = read_u32(input)? as usize;
    let m = read_u32(input)? as usize;
    let mut slots = Vec::with_capacity(beta);
    let mut buf = [0u8; 8];
    for _ in 0..beta {
        let mut users = Vec::with_capacity(k_users);
        for _ in 0..k_users {
            let mut h = Array1::zeros(m);
            for idx in 0..m {
                input
                    .read_exact(&mut buf)
                    .map_err(|e| Error::Format(format!("fixture body: {e}")))?;
                let re = f32::from_le_bytes(buf[0..4].try_into().unwrap());
                let im = f32::from_le_bytes(buf[4..8].try_into().unwrap());
                h[idx] = Complex64::new(re as f64, im as f64);
            }
            users.push(h);
        }
        slots.push(users);
    }
    Ok(ChannelFrame { slots, doppler_hz })
}
