//! Performance functionals of the hybrid uplink.
//!
//! NOMA users are decoded by SIC in ascending `|g|^2` order; the user decoded
//! at stage `j` sees residual interference from the not-yet-decoded NOMA
//! users plus all AirComp users (which carry functional data and cannot be
//! cancelled):
//!
//! ```text
//! Gamma_j = |g_j|^2 rho_j / ( sum_{t>j} |g_t|^2 rho_t + I_A + N sigma^2 )
//! R_N     = sum_j B log2(1 + Gamma_j)
//!         = B log2(1 + sum_j rho_j |g_j|^2 / (I_A + N sigma^2))   (telescoped)
//! ```
//!
//! The AirComp side estimates the symbol sum with a scalar combiner `w`:
//!
//! ```text
//! MSE = sum_k |w^H g_k p_k - 1|^2 + N sigma^2 |w|^2
//! E   = sum_k |w^H g_k p_k|^2     + N sigma^2 |w|^2
//! R_A = B log2(max(E / MSE, 1))
//! ```
//!
//! and the hybrid rate blends the two sides: `R_H = alpha R_A + (1-alpha) R_N`.
//! `R_A` is clamped at zero because a negative computation rate (possible for
//! a badly misaligned `w`) carries no physical meaning.

use crate::model::{ChannelState, Placement, Scenario};
use num_complex::Complex64;

/// Relative slack tolerance used by feasibility checks; iterative solvers
/// satisfy constraints only to numerical precision.
pub const FEASIBILITY_REL_TOL: f64 = 1e-9;

/// Full decision state of problem variables: AirComp precoders as
/// power/phase pairs, NOMA powers, receive scalar, antenna placement.
#[derive(Debug, Clone)]
pub struct DesignPoint {
    /// AirComp transmit powers rho_k = |p_k|^2, watts (original user index).
    pub rho_aircomp: Vec<f64>,
    /// AirComp precoder phases arg(p_k), radians.
    pub theta_aircomp: Vec<f64>,
    /// NOMA transmit powers rho_j = |p_j|^2, watts (original user index).
    pub rho_noma: Vec<f64>,
    /// Receive combining scalar.
    pub w: Complex64,
    pub placement: Placement,
}

impl DesignPoint {
    /// AirComp precoder p_k = sqrt(rho_k) e^{j theta_k}.
    pub fn precoder(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.rho_aircomp[k].max(0.0).sqrt(), self.theta_aircomp[k])
    }

    /// Combined term m_k = w^H g_k p_k.
    pub fn aircomp_product(&self, k: usize, channels: &ChannelState) -> Complex64 {
        self.w.conj() * channels.g_aircomp[k] * self.precoder(k)
    }
}

/// Everything the harness records about one evaluated design.
#[derive(Debug, Clone)]
pub struct RateBreakdown {
    /// Per-NOMA-user rates, bits/s, in original user index order.
    pub per_user_noma_rates: Vec<f64>,
    pub noma_sum: f64,
    pub aircomp_mse: f64,
    pub computation_rate: f64,
    pub hybrid: f64,
    /// AirComp interference power seen by NOMA decoding, watts.
    pub interference_aircomp: f64,
    /// Total received NOMA power, watts.
    pub interference_noma: f64,
}

/// SIC permutation over raw channel vectors: indices sorted by |g|^2
/// ascending, ties broken by original index.
pub fn sic_order_of(g_noma: &[Complex64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g_noma.len()).collect();
    order.sort_by(|&a, &b| {
        g_noma[a]
            .norm_sqr()
            .partial_cmp(&g_noma[b].norm_sqr())
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}

/// SIC decoding order of a channel state (weakest |g|^2 first).
pub fn sic_order(channels: &ChannelState) -> Vec<usize> {
    sic_order_of(&channels.g_noma)
}

/// AirComp interference power I_A = sum_k rho_k |g_k|^2.
pub fn aircomp_interference(design: &DesignPoint, channels: &ChannelState) -> f64 {
    design
        .rho_aircomp
        .iter()
        .zip(&channels.g_aircomp)
        .map(|(&rho, g)| rho * g.norm_sqr())
        .sum()
}

/// Total received NOMA power I_N = sum_j rho_j |g_j|^2.
pub fn noma_received_power(design: &DesignPoint, channels: &ChannelState) -> f64 {
    design
        .rho_noma
        .iter()
        .zip(&channels.g_noma)
        .map(|(&rho, g)| rho * g.norm_sqr())
        .sum()
}

/// SINR for the NOMA user decoded at stage `decode_pos` (0-based position in
/// the SIC order). Residual interference comes from the users decoded later
/// plus all AirComp users plus feed noise.
pub fn noma_sinr(
    decode_pos: usize,
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> f64 {
    let order = &channels.sic_order;
    let user = order[decode_pos];
    let signal = design.rho_noma[user] * channels.g_noma[user].norm_sqr();
    let intra: f64 = order[decode_pos + 1..]
        .iter()
        .map(|&t| design.rho_noma[t] * channels.g_noma[t].norm_sqr())
        .sum();
    signal / (intra + aircomp_interference(design, channels) + scenario.feed_noise())
}

/// Per-user NOMA rates (original index order) and their sum.
pub fn noma_rates(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> (Vec<f64>, f64) {
    let k_n = channels.g_noma.len();
    let mut per_user = vec![0.0; k_n];
    let mut sum = 0.0;
    for pos in 0..k_n {
        let rate = scenario.bandwidth * (1.0 + noma_sinr(pos, design, channels, scenario)).log2();
        per_user[channels.sic_order[pos]] = rate;
        sum += rate;
    }
    (per_user, sum)
}

/// NOMA sum-rate via the telescoped single-log form; must agree with the
/// per-user sum to floating-point accuracy regardless of decode order.
pub fn noma_sum_closed_form(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> f64 {
    let s = noma_received_power(design, channels);
    let denom = aircomp_interference(design, channels) + scenario.feed_noise();
    scenario.bandwidth * (1.0 + s / denom).log2()
}

/// Aggregation distortion MSE of the AirComp symbol-sum estimate.
pub fn aircomp_mse(design: &DesignPoint, channels: &ChannelState, scenario: &Scenario) -> f64 {
    let misalignment: f64 = (0..channels.g_aircomp.len())
        .map(|k| (design.aircomp_product(k, channels) - Complex64::new(1.0, 0.0)).norm_sqr())
        .sum();
    misalignment + scenario.feed_noise() * design.w.norm_sqr()
}

/// Second moment E[|s_hat|^2] of the combined AirComp estimate under
/// unit-power symbols.
pub fn aircomp_second_moment(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> f64 {
    let signal: f64 = (0..channels.g_aircomp.len())
        .map(|k| design.aircomp_product(k, channels).norm_sqr())
        .sum();
    signal + scenario.feed_noise() * design.w.norm_sqr()
}

/// Achievable computation rate R_A = B log2(max(E/MSE, 1)).
///
/// The clamp keeps the rate at zero when the combiner is so badly aligned
/// that E < MSE; the optimizer never prefers such points.
pub fn computation_rate(design: &DesignPoint, channels: &ChannelState, scenario: &Scenario) -> f64 {
    let e = aircomp_second_moment(design, channels, scenario);
    let mse = aircomp_mse(design, channels, scenario);
    if e <= mse {
        return 0.0;
    }
    scenario.bandwidth * (e / mse).log2()
}

/// Hybrid rate R_H = alpha R_A + (1-alpha) R_N with the full breakdown.
pub fn hybrid_rate(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> RateBreakdown {
    let (per_user, noma_sum) = noma_rates(design, channels, scenario);
    let mse = aircomp_mse(design, channels, scenario);
    let r_a = computation_rate(design, channels, scenario);
    RateBreakdown {
        hybrid: scenario.alpha * r_a + (1.0 - scenario.alpha) * noma_sum,
        per_user_noma_rates: per_user,
        noma_sum,
        aircomp_mse: mse,
        computation_rate: r_a,
        interference_aircomp: aircomp_interference(design, channels),
        interference_noma: noma_received_power(design, channels),
    }
}

/// Hybrid rate only, without allocating the breakdown.
pub fn hybrid_rate_value(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> f64 {
    let noma_sum = noma_sum_closed_form(design, channels, scenario);
    scenario.alpha * computation_rate(design, channels, scenario)
        + (1.0 - scenario.alpha) * noma_sum
}

/// Per-constraint slack report for one design.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    /// P_u - rho_u per AirComp user (negative = violated).
    pub power_slack_aircomp: Vec<f64>,
    /// P_u - rho_u per NOMA user.
    pub power_slack_noma: Vec<f64>,
    /// R_{N,j} - R_min per NOMA user (original index order).
    pub qos_slack: Vec<f64>,
    /// epsilon_0 - MSE.
    pub mse_slack: f64,
    /// Smallest distance of any antenna inside [0, L_x] (negative = outside).
    pub placement_slack: f64,
    pub power_ok: bool,
    pub qos_ok: bool,
    pub mse_ok: bool,
    pub placement_ok: bool,
    pub feasible: bool,
}

/// Evaluate all constraints of the hybrid problem with relative tolerance
/// [`FEASIBILITY_REL_TOL`]. Boundary points count as feasible.
pub fn check_constraints(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> FeasibilityReport {
    let tol = FEASIBILITY_REL_TOL;
    let p = scenario.p_max;

    let slack = |rho: &[f64]| -> Vec<f64> { rho.iter().map(|&r| p - r).collect() };
    let power_slack_aircomp = slack(&design.rho_aircomp);
    let power_slack_noma = slack(&design.rho_noma);
    let power_ok = design
        .rho_aircomp
        .iter()
        .chain(design.rho_noma.iter())
        .all(|&r| r >= -tol * p && r <= p * (1.0 + tol));

    let (per_user, _) = noma_rates(design, channels, scenario);
    let qos_slack: Vec<f64> = per_user.iter().map(|&r| r - scenario.r_min).collect();
    let qos_scale = scenario.r_min.max(1.0);
    let qos_ok = qos_slack.iter().all(|&s| s >= -tol * qos_scale);

    let mse = aircomp_mse(design, channels, scenario);
    let mse_slack = scenario.mse_threshold - mse;
    let mse_ok = mse <= scenario.mse_threshold * (1.0 + tol);

    let lx = scenario.waveguide_length;
    let placement_slack = design
        .placement
        .positions
        .iter()
        .map(|&v| v.min(lx - v))
        .fold(f64::INFINITY, f64::min);
    let placement_ok = placement_slack >= -tol * lx;

    FeasibilityReport {
        power_slack_aircomp,
        power_slack_noma,
        qos_slack,
        mse_slack,
        placement_slack,
        power_ok,
        qos_ok,
        mse_ok,
        placement_ok,
        feasible: power_ok && qos_ok && mse_ok && placement_ok,
    }
}
