//! Closed-form analytics for the random pilot access scheme: resource-block
//! degree distribution, the ALOHA-optimal activation probability, the
//! average-degree mapping, and downlink delay statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the resource-block degree distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeParams {
    pub num_users: usize,
    pub activation_prob: f64,
    pub num_pilots: usize,
}

impl DegreeParams {
    pub fn new(num_users: usize, activation_prob: f64, num_pilots: usize) -> Result<Self> {
        if num_users == 0 {
            return Err(Error::InvalidParameter("K must be >= 1".into()));
        }
        if num_pilots == 0 {
            return Err(Error::InvalidParameter("tau must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&activation_prob) {
            return Err(Error::InvalidParameter(format!(
                "p_a must lie in [0, 1], got {activation_prob}"
            )));
        }
        Ok(DegreeParams {
            num_users,
            activation_prob,
            num_pilots,
        })
    }
}

/// Probability that a resource block is occupied by exactly `d` users:
/// `C(K, d) (p_a/tau)^d (1 - p_a/tau)^(K-d)`.
///
/// Evaluated in log space so it stays finite for `K` in the thousands.
pub fn degree_pmf(params: &DegreeParams, d: usize) -> Result<f64> {
    let k = params.num_users;
    if d > k {
        return Err(Error::InvalidParameter(format!(
            "degree {d} exceeds user count {k}"
        )));
    }
    let p = params.activation_prob / params.num_pilots as f64;
    // Degenerate endpoints avoid log(0).
    if p == 0.0 {
        return Ok(if d == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if d == k { 1.0 } else { 0.0 });
    }
    let log_pmf = ln_binomial(k, d) + d as f64 * p.ln() + (k - d) as f64 * (1.0 - p).ln();
    Ok(log_pmf.exp())
}

/// Mean of the degree distribution, `K p_a / tau`.
pub fn mean_degree(params: &DegreeParams) -> f64 {
    params.num_users as f64 * params.activation_prob / params.num_pilots as f64
}

/// `ln C(n, k)` accumulated term by term in log space.
fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 0.0;
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}

/// Activation probability maximizing the singleton probability for the
/// framed slotted ALOHA baseline: `tau / K`, capped at 1.
pub fn aloha_optimal_pa(num_users: usize, num_pilots: usize) -> f64 {
    (num_pilots as f64 / num_users as f64).min(1.0)
}

/// Inverts the average-degree relation `d_bar = p_a K / tau` to an
/// activation probability. Rejects targets that would need `p_a > 1`.
pub fn pa_from_avg_degree(d_bar: f64, num_users: usize, num_pilots: usize) -> Result<f64> {
    if !d_bar.is_finite() || d_bar <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "average degree must be positive, got {d_bar}"
        )));
    }
    let p_a = d_bar * num_pilots as f64 / num_users as f64;
    if p_a > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "average degree {d_bar} needs p_a = {p_a} > 1 at K = {num_users}, tau = {num_pilots}"
        )));
    }
    Ok(p_a)
}

/// Probability that a user is active and alone on its pilot in one slot:
/// `p_a (1 - p_a/tau)^(K-1)`.
pub fn collision_free_prob(num_users: usize, p_a: f64, num_pilots: usize) -> f64 {
    p_a * (1.0 - p_a / num_pilots as f64).powi(num_users as i32 - 1)
}

/// Downlink-delay distribution `p* (1 - p*)^(delta - 1)` over `delta >= 1`.
pub fn delay_pmf(p_star: f64, delta: usize) -> Result<f64> {
    if !(p_star > 0.0 && p_star <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p_star must lie in (0, 1], got {p_star}"
        )));
    }
    if delta == 0 {
        return Err(Error::InvalidParameter("delta must be >= 1".into()));
    }
    Ok(p_star * (1.0 - p_star).powi(delta as i32 - 1))
}

/// Expected downlink delay `(1 - p*) / p*` in slots.
pub fn expected_delay(p_star: f64) -> Result<f64> {
    if !(p_star > 0.0 && p_star <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p_star must lie in (0, 1], got {p_star}"
        )));
    }
    Ok((1.0 - p_star) / p_star)
}
