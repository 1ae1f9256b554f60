//! Pinching-antenna uplink simulator.
//!
//! Models a waveguide-fed pinching-antenna base station serving AirComp
//! aggregation users and NOMA data users on shared spectrum, and maximizes
//! the hybrid computation-communication rate by alternating optimization
//! over transmit powers, the receive combining scalar, and the continuous
//! antenna positions. Includes the fixed-placement, discrete-placement, and
//! full-power benchmark schemes and a reproducible Monte-Carlo experiment
//! harness with CSV output.

pub mod ao;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod optim;

pub use ao::{ao_solve, run_benchmark, AoConfig, AoOutcome, SchemeKind};
pub use metrics::{hybrid_rate, DesignPoint, RateBreakdown};
pub use model::{ChannelState, Placement, Scenario, UserSet};
