//! NOMA transmit-power allocation.
//!
//! With AirComp powers, the combiner, and the placement held fixed, the NOMA
//! sum-rate collapses (by the SIC telescoping identity) to a single log of
//! `S = sum_j rho_j |g_j|^2`, so maximizing the sum-rate subject to the
//! per-user QoS constraints
//!
//! ```text
//! rho_j |g_j|^2 >= gamma_j ( sum_{t>j} rho_t |g_t|^2 + I_A + N sigma^2 )
//! ```
//!
//! and the power boxes is exactly a linear program in the powers: the log is
//! strictly increasing in S, so maximizing S is equivalent. The LP is solved
//! by the dense simplex kernel.

use super::lp::{solve_lp, LpProblem, LpStatus};
use super::QosCoefficients;
use crate::metrics::{aircomp_interference, DesignPoint};
use crate::model::{ChannelState, Scenario};

/// Result of the NOMA power block.
#[derive(Debug, Clone)]
pub struct NomaPowerOutcome {
    /// Optimal powers in original user index order.
    pub rho: Vec<f64>,
    /// Achieved received-power objective S = sum rho |g|^2.
    pub received_power: f64,
}

/// QoS constraints cannot all be met for this interference level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QosInfeasible;

fn qos_lp(
    g_sq_ordered: &[f64],
    gamma_ordered: &[f64],
    budgets_ordered: &[f64],
    interference_floor: f64,
    objective: Vec<f64>,
) -> LpProblem {
    let k = g_sq_ordered.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for pos in 0..k {
        let gamma = gamma_ordered[pos];
        if gamma == 0.0 {
            continue; // rho >= 0 already implies the constraint
        }
        let mut row = vec![0.0; k];
        row[pos] = -g_sq_ordered[pos];
        for later in pos + 1..k {
            row[later] = gamma * g_sq_ordered[later];
        }
        a.push(row);
        b.push(-gamma * interference_floor);
    }
    LpProblem {
        c: objective,
        a,
        b,
        lo: vec![0.0; k],
        hi: budgets_ordered.to_vec(),
    }
}

/// Maximize `S = sum_j rho_j |g_j|^2` subject to QoS and power boxes, in the
/// SIC-ordered variable space. Inputs are indexed by decode position.
pub fn max_received_power(
    g_sq_ordered: &[f64],
    gamma_ordered: &[f64],
    budgets_ordered: &[f64],
    interference_floor: f64,
) -> Result<Vec<f64>, QosInfeasible> {
    let p = qos_lp(
        g_sq_ordered,
        gamma_ordered,
        budgets_ordered,
        interference_floor,
        g_sq_ordered.to_vec(),
    );
    let sol = solve_lp(&p);
    match sol.status {
        LpStatus::Optimal => Ok(sol.x),
        _ => Err(QosInfeasible),
    }
}

/// Minimize total NOMA power subject to QoS; used to initialize a
/// realization and to decide QoS feasibility.
pub fn min_power_for_qos(
    g_sq_ordered: &[f64],
    gamma_ordered: &[f64],
    budgets_ordered: &[f64],
    interference_floor: f64,
) -> Result<Vec<f64>, QosInfeasible> {
    let k = g_sq_ordered.len();
    let p = qos_lp(
        g_sq_ordered,
        gamma_ordered,
        budgets_ordered,
        interference_floor,
        vec![-1.0; k],
    );
    let sol = solve_lp(&p);
    match sol.status {
        LpStatus::Optimal => Ok(sol.x),
        _ => Err(QosInfeasible),
    }
}

/// Largest interference floor `I_A` for which the QoS system stays feasible
/// within the power budgets.
///
/// The componentwise-minimal QoS solution is the SIC cascade
/// `r_pos = gamma_pos (sum_{t>pos} r_t + I_A + N sigma^2)`, which is linear
/// in the floor: `r_pos = a_pos (I_A + N sigma^2)` with
/// `a_pos = gamma_pos (1 + sum_{t>pos} a_t)`. Feasibility therefore reduces
/// to `I_A + N sigma^2 <= min_pos P_pos |g_pos|^2 / a_pos`.
pub fn max_feasible_interference(
    g_sq_ordered: &[f64],
    gamma_ordered: &[f64],
    budgets_ordered: &[f64],
    feed_noise: f64,
) -> f64 {
    let k = g_sq_ordered.len();
    let mut coeffs = vec![0.0; k];
    let mut tail = 0.0;
    for pos in (0..k).rev() {
        coeffs[pos] = gamma_ordered[pos] * (1.0 + tail);
        tail += coeffs[pos];
    }
    let mut cap = f64::INFINITY;
    for pos in 0..k {
        if coeffs[pos] > 0.0 {
            cap = cap.min(budgets_ordered[pos] * g_sq_ordered[pos] / coeffs[pos]);
        }
    }
    cap - feed_noise
}

/// The NOMA power block: optimal powers for the current design, or
/// `QosInfeasible` when the AirComp interference leaves no QoS-feasible
/// allocation.
pub fn noma_power_allocation(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> Result<NomaPowerOutcome, QosInfeasible> {
    let order = &channels.sic_order;
    let k = order.len();
    let g_sq: Vec<f64> = order
        .iter()
        .map(|&j| channels.g_noma[j].norm_sqr())
        .collect();
    let gamma_all = QosCoefficients::uniform(scenario).gamma;
    let gamma: Vec<f64> = order.iter().map(|&j| gamma_all[j]).collect();
    let budgets = vec![scenario.p_max; k];
    let floor = aircomp_interference(design, channels) + scenario.feed_noise();

    let x = max_received_power(&g_sq, &gamma, &budgets, floor)?;
    let mut rho = vec![0.0; k];
    for (pos, &j) in order.iter().enumerate() {
        rho[j] = x[pos];
    }
    let received_power = x.iter().zip(&g_sq).map(|(r, g)| r * g).sum();
    Ok(NomaPowerOutcome {
        rho,
        received_power,
    })
}
