//! Successive interference cancellation over the filtered collision graph,
//! plus the framed slotted ALOHA baseline that only accepts collision-free
//! blocks.
//!
//! Singleton detection and the release of a resolved user's full pilot
//! pattern are genie-granted, modeling the protocol's protected in-band
//! graph information: block multiplicity and pattern become known to the
//! receiver exactly when a message is recovered, independent of payload bit
//! errors.

use std::collections::BTreeSet;

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActivitySchedule, CancellationMode, PilotMatrix, SystemConfig, UserMessage};
use crate::phy::FilteredFrame;

/// Estimates `||h_k||^2` for the single remaining user of a block from its
/// pilot-domain residual: the real part of `(s_j^H s_j)^{-1} s_j^H g_res`.
pub fn norm_estimate_from_g(
    g_res: ArrayView1<'_, Complex64>,
    s_j: ArrayView1<'_, Complex64>,
) -> f64 {
    let tau = s_j.len() as f64;
    let acc: Complex64 = s_j
        .iter()
        .zip(g_res.iter())
        .map(|(st, gt)| st.conj() * gt)
        .sum();
    acc.re / tau
}

/// Scales a data-domain residual by the norm estimate and slices hard bits
/// from the real parts. Rejects nonpositive (or non-finite) norms.
pub fn message_estimate(
    f_res: ArrayView1<'_, Complex64>,
    norm_est: f64,
) -> Result<(Array1<Complex64>, Vec<bool>)> {
    if norm_est <= 0.0 || !norm_est.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "norm estimate must be positive, got {norm_est}"
        )));
    }
    let soft = f_res.mapv(|v| v / norm_est);
    let hard = soft.iter().map(|v| v.re >= 0.0).collect();
    Ok((soft, hard))
}

/// Per-user outcome of a decoding pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UserStatus {
    /// The user transmitted in no slot of the frame.
    NeverActive,
    /// Active but never isolated by the decoder.
    Unresolved,
    /// A message was recovered; `correct` marks exact bit equality.
    Decoded { correct: bool },
}

/// Frame-level decode outcome and normalized metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingReport {
    pub status: Vec<UserStatus>,
    pub decoded: usize,
    pub correct: usize,
    pub resource_blocks: usize,
    pub throughput: f64,
    pub goodput: f64,
    pub bler: f64,
}

impl DecodingReport {
    fn new(status: Vec<UserStatus>, resource_blocks: usize) -> Self {
        let decoded = status
            .iter()
            .filter(|s| matches!(s, UserStatus::Decoded { .. }))
            .count();
        let correct = status
            .iter()
            .filter(|s| matches!(s, UserStatus::Decoded { correct: true }))
            .count();
        let rb = resource_blocks as f64;
        DecodingReport {
            status,
            decoded,
            correct,
            resource_blocks,
            throughput: decoded as f64 / rb,
            goodput: correct as f64 / rb,
            bler: if decoded > 0 {
                (decoded - correct) as f64 / decoded as f64
            } else {
                0.0
            },
        }
    }

    /// Users decoded by this pass, in index order.
    pub fn decoded_users(&self) -> Vec<usize> {
        self.status
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, UserStatus::Decoded { .. }))
            .map(|(k, _)| k)
            .collect()
    }
}

/// Record of one resolved user kept inside [`ResidualState`].
#[derive(Debug, Clone)]
pub struct ResolvedUser {
    pub norm_estimate: f64,
    pub soft_symbols: Array1<Complex64>,
    pub hard_bits: Vec<bool>,
    pub resolving_block: (usize, usize),
}

/// Mutable decoder state: residual filtered signals, the genie member sets
/// (revealed incrementally), and the per-user resolution records.
#[derive(Debug, Clone)]
pub struct ResidualState {
    f_res: Vec<Vec<Array1<Complex64>>>,
    g_res: Vec<Vec<Array1<Complex64>>>,
    members: Vec<Vec<BTreeSet<usize>>>,
    dead: Vec<Vec<bool>>,
    resolved: Vec<Option<ResolvedUser>>,
}

impl ResidualState {
    /// Copies the filtered frame and populates the genie member sets from
    /// the true schedule.
    pub fn new(filtered: &FilteredFrame, schedule: &ActivitySchedule) -> Self {
        let beta = filtered.beta();
        let tau = filtered.tau();
        let mut f_res = Vec::with_capacity(beta);
        let mut g_res = Vec::with_capacity(beta);
        let mut members = Vec::with_capacity(beta);
        for n in 0..beta {
            f_res.push((0..tau).map(|j| filtered.data(n, j).clone()).collect());
            g_res.push((0..tau).map(|j| filtered.pilot(n, j).clone()).collect());
            members.push(
                (0..tau)
                    .map(|j| schedule.members(n, j).collect::<BTreeSet<_>>())
                    .collect(),
            );
        }
        ResidualState {
            f_res,
            g_res,
            members,
            dead: vec![vec![false; tau]; beta],
            resolved: vec![None; schedule.num_users()],
        }
    }

    pub fn data_residual(&self, n: usize, j: usize) -> &Array1<Complex64> {
        &self.f_res[n][j]
    }

    pub fn pilot_residual(&self, n: usize, j: usize) -> &Array1<Complex64> {
        &self.g_res[n][j]
    }

    pub fn members(&self, n: usize, j: usize) -> &BTreeSet<usize> {
        &self.members[n][j]
    }

    pub fn is_dead(&self, n: usize, j: usize) -> bool {
        self.dead[n][j]
    }

    pub fn resolved(&self, k: usize) -> Option<&ResolvedUser> {
        self.resolved[k].as_ref()
    }

    fn total_membership(&self) -> usize {
        self.members
            .iter()
            .flat_map(|row| row.iter().map(BTreeSet::len))
            .sum()
    }
}

/// Peels the filtered frame and returns per-user outcomes plus metrics.
///
/// The loop scans resource blocks in (slot, pilot) lexicographic order for a
/// live block whose member set holds exactly one user, estimates that user's
/// channel norm from the block's pilot residual and its message from the data
/// residual, reveals the user's full pilot pattern, cancels the scaled
/// contribution from every block the user occupies, and restarts the scan.
/// A nonpositive norm estimate kills the block instead; its user stays
/// available through other blocks. The pass halts when no live singleton
/// remains.
pub fn sic_decode(
    filtered: &FilteredFrame,
    schedule: &ActivitySchedule,
    messages: &[UserMessage],
    pilots: &PilotMatrix,
    config: &SystemConfig,
) -> DecodingReport {
    sic_decode_detailed(filtered, schedule, messages, pilots, config).0
}

/// [`sic_decode`] variant that also returns the halted residual state.
pub fn sic_decode_detailed(
    filtered: &FilteredFrame,
    schedule: &ActivitySchedule,
    messages: &[UserMessage],
    pilots: &PilotMatrix,
    config: &SystemConfig,
) -> (DecodingReport, ResidualState) {
    let beta = filtered.beta();
    let tau = filtered.tau();
    let mut state = ResidualState::new(filtered, schedule);
    let mut resolutions = 0usize;

    loop {
        let mut resolved_one = false;
        'scan: for n in 0..beta {
            for j in 0..tau {
                if state.dead[n][j] || state.members[n][j].len() != 1 {
                    continue;
                }
                let k = *state.members[n][j].iter().next().expect("singleton");
                let norm = norm_estimate_from_g(state.g_res[n][j].view(), pilots.column(j));
                if norm <= 0.0 || !norm.is_finite() {
                    state.dead[n][j] = true;
                    continue;
                }
                let (soft, hard) = message_estimate(state.f_res[n][j].view(), norm)
                    .expect("norm checked positive");
                let signal = match config.cancellation_mode {
                    CancellationMode::Soft => soft.clone(),
                    CancellationMode::Hard => Array1::from_iter(
                        hard.iter()
                            .map(|&b| Complex64::new(if b { 1.0 } else { -1.0 }, 0.0)),
                    ),
                };
                let before = state.total_membership();
                for (n2, j2) in schedule.user_pattern(k) {
                    let f = &mut state.f_res[n2][j2];
                    for (r, s) in f.iter_mut().zip(signal.iter()) {
                        *r -= s * norm;
                    }
                    let g = &mut state.g_res[n2][j2];
                    for (r, s) in g.iter_mut().zip(pilots.column(j2).iter()) {
                        *r -= s * norm;
                    }
                    state.members[n2][j2].remove(&k);
                }
                debug_assert!(state.total_membership() < before);
                state.resolved[k] = Some(ResolvedUser {
                    norm_estimate: norm,
                    soft_symbols: soft,
                    hard_bits: hard,
                    resolving_block: (n, j),
                });
                resolutions += 1;
                resolved_one = true;
                break 'scan;
            }
        }
        if !resolved_one {
            break;
        }
    }
    debug_assert!(resolutions <= schedule.num_users());

    let status = statuses(schedule, messages, |k| {
        state.resolved[k].as_ref().map(|r| r.hard_bits.as_slice())
    });
    (DecodingReport::new(status, config.resource_blocks()), state)
}

/// Framed slotted ALOHA baseline: decodes exactly the blocks whose true
/// degree is one, with no cancellation and no graph propagation. Repeat
/// decodes of a user count once.
pub fn aloha_decode(
    filtered: &FilteredFrame,
    schedule: &ActivitySchedule,
    messages: &[UserMessage],
    pilots: &PilotMatrix,
    config: &SystemConfig,
) -> DecodingReport {
    let mut hard: Vec<Option<Vec<bool>>> = vec![None; schedule.num_users()];
    for n in 0..filtered.beta() {
        for j in 0..filtered.tau() {
            let mut block = schedule.members(n, j);
            let k = match (block.next(), block.next()) {
                (Some(k), None) => k,
                _ => continue,
            };
            if hard[k].is_some() {
                continue;
            }
            let norm = norm_estimate_from_g(filtered.pilot(n, j).view(), pilots.column(j));
            if norm <= 0.0 || !norm.is_finite() {
                continue;
            }
            let (_, bits) =
                message_estimate(filtered.data(n, j).view(), norm).expect("norm checked positive");
            hard[k] = Some(bits);
        }
    }
    let status = statuses(schedule, messages, |k| hard[k].as_deref());
    DecodingReport::new(status, config.resource_blocks())
}

fn statuses<'a>(
    schedule: &ActivitySchedule,
    messages: &[UserMessage],
    decoded_bits: impl Fn(usize) -> Option<&'a [bool]>,
) -> Vec<UserStatus> {
    (0..schedule.num_users())
        .map(|k| match decoded_bits(k) {
            Some(bits) => UserStatus::Decoded {
                correct: bits == messages[k].bits(),
            },
            None if schedule.is_ever_active(k) => UserStatus::Unresolved,
            None => UserStatus::NeverActive,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_norm_sq, generate_frame_channels};
    use crate::model::{fig3_schedule, ChannelBackend, SystemConfig};
    use crate::phy::filter_frame;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn fig3_config() -> SystemConfig {
        let mut cfg = SystemConfig::new(3, 2).unwrap();
        cfg.num_antennas = 4;
        cfg.msg_len = 16;
        cfg.sigma_n2 = 0.0;
        cfg.channel_backend = ChannelBackend::OrthoIdeal;
        cfg.beta = 2;
        cfg
    }

    struct Frame {
        cfg: SystemConfig,
        schedule: ActivitySchedule,
        messages: Vec<UserMessage>,
        pilots: PilotMatrix,
        filtered: FilteredFrame,
        channels: crate::channel::ChannelFrame,
    }

    fn synthesize(cfg: &SystemConfig, schedule: ActivitySchedule, seed: u64) -> Frame {
        let channels = generate_frame_channels(cfg, &mut rng(seed)).unwrap();
        let messages = UserMessage::draw_all(cfg.num_users, cfg.msg_len, &mut rng(seed + 1));
        let pilots = PilotMatrix::new(cfg.tau).unwrap();
        let filtered = filter_frame(
            &channels,
            &schedule,
            &messages,
            &pilots,
            cfg.sigma_n2,
            &mut rng(seed + 2),
            &mut rng(seed + 3),
        );
        Frame {
            cfg: cfg.clone(),
            schedule,
            messages,
            pilots,
            filtered,
            channels,
        }
    }

    #[test]
    fn norm_estimate_reads_scaled_pilot() {
        let pilots = PilotMatrix::new(2).unwrap();
        let s0 = pilots.column(0);
        let g = s0.mapv(|v| v * 4.0);
        assert!((norm_estimate_from_g(g.view(), s0) - 4.0).abs() < 1e-12);

        // An orthogonal perturbation along another pilot does not leak in.
        let s1 = pilots.column(1);
        let g = Array1::from_iter(s0.iter().zip(s1.iter()).map(|(a, b)| a * 4.0 + b * 0.37));
        assert!((norm_estimate_from_g(g.view(), s0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn norm_estimate_worked_difference() {
        // g_00 with norms (3, 2) minus g_10 with norm 2 leaves exactly 3.
        let pilots = PilotMatrix::new(2).unwrap();
        let s0 = pilots.column(0);
        let g00 = s0.mapv(|v| v * (3.0 + 2.0));
        let g10 = s0.mapv(|v| v * 2.0);
        let diff = &g00 - &g10;
        assert!((norm_estimate_from_g(diff.view(), s0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn message_estimate_scales_and_slices() {
        let msg = UserMessage::from_bits(vec![true, false, false, true]);
        let f = Array1::from_iter(msg.symbols().iter().map(|&x| Complex64::new(4.0 * x, 0.0)));
        let (soft, hard) = message_estimate(f.view(), 4.0).unwrap();
        for (s, &x) in soft.iter().zip(msg.symbols()) {
            assert!((s - Complex64::new(x, 0.0)).norm() < 1e-12);
        }
        assert_eq!(hard, msg.bits());

        // Overestimated norm shrinks the soft values but not the signs.
        let (soft, hard) = message_estimate(f.view(), 5.0).unwrap();
        for (s, &x) in soft.iter().zip(msg.symbols()) {
            assert!((s - Complex64::new(0.8 * x, 0.0)).norm() < 1e-12);
        }
        assert_eq!(hard, msg.bits());

        assert!(message_estimate(f.view(), 0.0).is_err());
        assert!(message_estimate(f.view(), -1.0).is_err());
    }

    #[test]
    fn message_estimate_error_free_at_high_margin() {
        // Unit symbols plus complex noise of variance 0.01: the per-bit error
        // probability is Q(1 / 0.0707) ~ 1e-45, so 1000 bits decode clean.
        let len = 1000;
        let msg = UserMessage::random(len, &mut rng(1));
        let mut r = rng(2);
        use rand_distr::{Distribution, StandardNormal};
        let scale = (0.01f64 / 2.0).sqrt();
        let f = Array1::from_iter(msg.symbols().iter().map(|&x| {
            let re: f64 = StandardNormal.sample(&mut r);
            let im: f64 = StandardNormal.sample(&mut r);
            Complex64::new(x + re * scale, im * scale)
        }));
        let (_, hard) = message_estimate(f.view(), 1.0).unwrap();
        let errors = hard.iter().zip(msg.bits()).filter(|(a, b)| a != b).count();
        assert_eq!(errors, 0);
    }

    #[test]
    fn sic_resolves_worked_example() {
        let cfg = fig3_config();
        let frame = synthesize(&cfg, fig3_schedule(), 10);
        let report = sic_decode(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        assert_eq!(report.decoded, 3);
        assert_eq!(report.correct, 3);
        assert!((report.throughput - 0.75).abs() < 1e-12);
        assert!((report.goodput - 0.75).abs() < 1e-12);
        assert_eq!(report.bler, 0.0);
        for s in &report.status {
            assert_eq!(*s, UserStatus::Decoded { correct: true });
        }
    }

    #[test]
    fn sic_hard_cancellation_also_resolves_noiseless_example() {
        let mut cfg = fig3_config();
        cfg.cancellation_mode = CancellationMode::Hard;
        let frame = synthesize(&cfg, fig3_schedule(), 11);
        let report = sic_decode(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        assert_eq!(report.decoded, 3);
        assert_eq!(report.correct, 3);
    }

    #[test]
    fn identical_patterns_never_peel() {
        let mut cfg = fig3_config();
        cfg.num_users = 2;
        let schedule =
            ActivitySchedule::from_choices(vec![vec![Some(0), Some(0)], vec![Some(1), Some(1)]], 2)
                .unwrap();
        let frame = synthesize(&cfg, schedule, 12);
        let report = sic_decode(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        assert_eq!(report.decoded, 0);
        assert_eq!(report.throughput, 0.0);
        for s in &report.status {
            assert_eq!(*s, UserStatus::Unresolved);
        }
    }

    #[test]
    fn empty_schedule_reports_never_active() {
        let cfg = fig3_config();
        let schedule = ActivitySchedule::from_choices(vec![vec![None; 3]; 2], 2).unwrap();
        let frame = synthesize(&cfg, schedule, 13);
        let report = sic_decode(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        assert_eq!(report.decoded, 0);
        assert_eq!(report.throughput, 0.0);
        for s in &report.status {
            assert_eq!(*s, UserStatus::NeverActive);
        }
    }

    #[test]
    fn aloha_decodes_only_true_singletons() {
        let cfg = fig3_config();
        let frame = synthesize(&cfg, fig3_schedule(), 14);
        let report = aloha_decode(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        // Blocks (0,1) and (1,0) are singletons holding users 2 and 1.
        assert_eq!(report.decoded, 2);
        assert!((report.throughput - 0.5).abs() < 1e-12);
        assert_eq!(report.status[0], UserStatus::Unresolved);
        assert_eq!(report.status[1], UserStatus::Decoded { correct: true });
        assert_eq!(report.status[2], UserStatus::Decoded { correct: true });
    }

    #[test]
    fn aloha_sees_nothing_in_fully_collided_frames() {
        let mut cfg = fig3_config();
        cfg.num_users = 2;
        let schedule =
            ActivitySchedule::from_choices(vec![vec![Some(0), Some(0)], vec![Some(1), Some(1)]], 2)
                .unwrap();
        let frame = synthesize(&cfg, schedule, 15);
        let report = aloha_decode(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        assert_eq!(report.decoded, 0);
    }

    #[test]
    fn aloha_counts_repeat_singletons_once() {
        let mut cfg = fig3_config();
        cfg.num_users = 1;
        cfg.num_antennas = 4;
        cfg.beta = 3;
        let schedule =
            ActivitySchedule::from_choices(vec![vec![Some(0)], vec![Some(0)], vec![Some(1)]], 2)
                .unwrap();
        let frame = synthesize(&cfg, schedule, 16);
        let report = aloha_decode(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        assert_eq!(report.decoded, 1);
        assert!((report.throughput - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn sic_dominates_aloha_on_shared_frames() {
        let mut cfg = SystemConfig::new(30, 3).unwrap();
        cfg.num_antennas = 24;
        cfg.msg_len = 64;
        cfg.p_a = 0.25;
        cfg.channel_backend = ChannelBackend::Clarke;
        for seed in 0..8u64 {
            let schedule = ActivitySchedule::draw(&cfg, &mut rng(100 + seed));
            let frame = synthesize(&cfg, schedule, 200 + 7 * seed);
            let sic = sic_decode(
                &frame.filtered,
                &frame.schedule,
                &frame.messages,
                &frame.pilots,
                &frame.cfg,
            );
            let aloha = aloha_decode(
                &frame.filtered,
                &frame.schedule,
                &frame.messages,
                &frame.pilots,
                &frame.cfg,
            );
            let sic_set: BTreeSet<usize> = sic.decoded_users().into_iter().collect();
            for k in aloha.decoded_users() {
                assert!(sic_set.contains(&k), "seed {seed}: user {k} lost by SIC");
            }
            assert!(sic.decoded >= aloha.decoded);
            assert!(sic.goodput <= sic.throughput);
            assert!(sic.throughput <= cfg.num_users as f64 / cfg.resource_blocks() as f64);
        }
    }

    #[test]
    fn residuals_conserve_unresolved_contributions() {
        // On ideal noiseless channels the halted residual of every block is
        // exactly the sum over its remaining members.
        let mut cfg = SystemConfig::new(20, 3).unwrap();
        cfg.num_antennas = 32;
        cfg.msg_len = 32;
        cfg.sigma_n2 = 0.0;
        cfg.p_a = 0.5;
        cfg.channel_backend = ChannelBackend::OrthoIdeal;
        let schedule = ActivitySchedule::draw(&cfg, &mut rng(17));
        let frame = synthesize(&cfg, schedule, 18);
        let (_, state) = sic_decode_detailed(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        for n in 0..cfg.beta {
            for j in 0..cfg.tau {
                let expected: Vec<f64> = (0..cfg.msg_len)
                    .map(|l| {
                        state
                            .members(n, j)
                            .iter()
                            .map(|&k| {
                                channel_norm_sq(frame.channels.h(n, k).view())
                                    * frame.messages[k].symbols()[l]
                            })
                            .sum()
                    })
                    .collect();
                let scale = channel_norm_sq(frame.channels.h(n, 0).view()).max(1.0);
                for (v, e) in state.data_residual(n, j).iter().zip(&expected) {
                    assert!(
                        (v - Complex64::new(*e, 0.0)).norm() <= 1e-9 * scale,
                        "block ({n},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn membership_shrinks_by_resolved_patterns() {
        let mut cfg = SystemConfig::new(40, 4).unwrap();
        cfg.num_antennas = 48;
        cfg.msg_len = 32;
        cfg.p_a = 0.3;
        cfg.channel_backend = ChannelBackend::OrthoIdeal;
        cfg.sigma_n2 = 0.0;
        let schedule = ActivitySchedule::draw(&cfg, &mut rng(19));
        let initial: usize = (0..cfg.beta)
            .flat_map(|n| (0..cfg.tau).map(move |j| (n, j)))
            .map(|(n, j)| schedule.resource_degree(n, j).unwrap())
            .sum();
        let frame = synthesize(&cfg, schedule, 20);
        let (report, state) = sic_decode_detailed(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        let removed: usize = report
            .decoded_users()
            .iter()
            .map(|&k| frame.schedule.user_pattern(k).len())
            .sum();
        let remaining: usize = (0..cfg.beta)
            .flat_map(|n| (0..cfg.tau).map(move |j| (n, j)))
            .map(|(n, j)| state.members(n, j).len())
            .sum();
        assert_eq!(initial, removed + remaining);
        // A resolved user never reappears in any member set.
        for &k in &report.decoded_users() {
            for n in 0..cfg.beta {
                for j in 0..cfg.tau {
                    assert!(!state.members(n, j).contains(&k));
                }
            }
        }
    }

    #[test]
    fn report_serializes_with_named_fields() {
        let cfg = fig3_config();
        let frame = synthesize(&cfg, fig3_schedule(), 21);
        let report = sic_decode(
            &frame.filtered,
            &frame.schedule,
            &frame.messages,
            &frame.pilots,
            &frame.cfg,
        );
        let text = serde_json::to_string(&report).unwrap();
        for field in [
            "status",
            "decoded",
            "correct",
            "resource_blocks",
            "throughput",
            "goodput",
            "bler",
        ] {
            assert!(text.contains(field), "missing {field} in {text}");
        }
        let back: DecodingReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
