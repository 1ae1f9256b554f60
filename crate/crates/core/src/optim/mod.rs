//! Block subsolvers of the hybrid-rate maximization: NOMA power LP,
//! AirComp power DC/MM, receive-scalar SCA, and antenna-placement PGA,
//! plus the dense LP kernel they share.

pub mod aircomp_power;
pub mod lp;
pub mod noma_power;
pub mod placement;
pub mod receive_scalar;

pub use lp::{solve_lp, LpProblem, LpSolution, LpStatus};

/// Termination state of an iterative subsolver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

/// Iteration record of an ascent method. The objective trace is
/// non-decreasing for every solver in this module.
#[derive(Debug, Clone)]
pub struct SolverReport {
    pub status: SolverStatus,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub final_objective: f64,
}

impl SolverReport {
    pub fn new(status: SolverStatus, trace: Vec<f64>) -> Self {
        let final_objective = trace.last().copied().unwrap_or(f64::NAN);
        SolverReport {
            status,
            iterations: trace.len().saturating_sub(1),
            objective_trace: trace,
            final_objective,
        }
    }
}

/// Per-user QoS SINR targets gamma_j = 2^(R_min,j / B) - 1.
#[derive(Debug, Clone)]
pub struct QosCoefficients {
    pub gamma: Vec<f64>,
}

impl QosCoefficients {
    pub fn new(r_min: &[f64], bandwidth: f64) -> Self {
        QosCoefficients {
            gamma: r_min.iter().map(|r| (r / bandwidth).exp2() - 1.0).collect(),
        }
    }

    /// Uniform targets from the scenario's single r_min.
    pub fn uniform(scenario: &crate::model::Scenario) -> Self {
        QosCoefficients {
            gamma: vec![scenario.qos_sinr_target(); scenario.k_noma],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qos_targets_zero_iff_no_rate_floor() {
        let q = QosCoefficients::new(&[0.0, 0.5e6, 1.0e6], 1.0e6);
        assert_eq!(q.gamma[0], 0.0);
        assert!((q.gamma[1] - (2.0f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((q.gamma[2] - 1.0).abs() < 1e-12);
    }
}
