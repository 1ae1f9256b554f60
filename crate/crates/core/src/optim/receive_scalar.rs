//! Receive combining scalar optimization.
//!
//! Working in the inverted variable `w~ = 1/w`, the combined products become
//! `w^H g_k p_k = g_k p_k / conj(w~)`, so with `u_k = conj(g_k p_k)` the
//! MSE and second moment take the forms
//!
//! ```text
//! MSE(w~) = ( sum_k |w~ - u_k|^2 + N sigma^2 ) / |w~|^2
//! E/MSE   = ( sum_k |u_k|^2 + N sigma^2 ) / ( sum_k |w~ - u_k|^2 + N sigma^2 )
//! ```
//!
//! Maximizing the computation rate is therefore minimizing the misalignment
//! `sum_k |w~ - u_k|^2`, whose unconstrained minimizer is the centroid of the
//! `u_k`. When the centroid violates the MSE cap, the cap's right-hand side
//! `eps0 |w~|^2` is linearized at the current iterate (SCA); each convex
//! subproblem is a projection onto a disk and solves in closed form. The
//! linearization under-estimates `|w~|^2`, so every SCA iterate is feasible
//! for the original constraint.
//!
//! Whether the cap is reachable at all is decided exactly: the global
//! minimum of `MSE(w~)` has the closed form `K - K^2 |u-bar|^2 / (C + N
//! sigma^2)` attained at `w~ = u-bar (C + N sigma^2) / (K |u-bar|^2)`.

use crate::metrics::DesignPoint;
use crate::model::{ChannelState, Scenario};
use num_complex::Complex64;

/// Outcome of the receive-scalar block.
#[derive(Debug, Clone)]
pub enum ReceiveScalarOutcome {
    /// MSE cap met; `w` maximizes the computation rate subject to it.
    Feasible { w: Complex64 },
    /// No combiner satisfies the cap for these powers and channels. Carries
    /// the global-minimum-MSE combiner so the caller can relax and flag.
    MseInfeasible { w_min_mse: Complex64, min_mse: f64 },
}

impl ReceiveScalarOutcome {
    /// The returned combiner under the relax-and-flag policy.
    pub fn combiner(&self) -> Complex64 {
        match self {
            ReceiveScalarOutcome::Feasible { w } => *w,
            ReceiveScalarOutcome::MseInfeasible { w_min_mse, .. } => *w_min_mse,
        }
    }
}

/// Alignment targets u_k = conj(g_k p_k) of the current design.
pub fn alignment_targets(design: &DesignPoint, channels: &ChannelState) -> Vec<Complex64> {
    (0..channels.g_aircomp.len())
        .map(|k| (channels.g_aircomp[k] * design.precoder(k)).conj())
        .collect()
}

fn centroid(targets: &[Complex64]) -> Complex64 {
    targets.iter().sum::<Complex64>() / targets.len() as f64
}

fn mse_of(wt: Complex64, targets: &[Complex64], feed_noise: f64) -> f64 {
    let misalignment: f64 = targets.iter().map(|&u| (wt - u).norm_sqr()).sum();
    (misalignment + feed_noise) / wt.norm_sqr()
}

/// Global minimizer of `MSE(w~)` and its value.
///
/// When the centroid is (numerically) zero the infimum `K` is approached as
/// `|w~|` grows without bound; the returned point caps the magnitude so the
/// recovered `w = 1/w~` stays representable.
pub fn min_mse_point(targets: &[Complex64], feed_noise: f64) -> (Complex64, f64) {
    let k = targets.len() as f64;
    let c: f64 = targets.iter().map(|u| u.norm_sqr()).sum();
    let bar = centroid(targets);
    let floor = 1e-9 * ((c + feed_noise) / k).sqrt();
    let magnitude = bar.norm().max(floor);
    let direction = if bar.norm() > 0.0 {
        bar / bar.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let wt = direction * (c + feed_noise) / (k * magnitude);
    (wt, mse_of(wt, targets, feed_noise))
}

/// Iteration cap and relative stationarity tolerance of the SCA loop.
const SCA_MAX_ITERS: usize = 200;
const SCA_TOL: f64 = 1e-8;

/// Solve the receive-scalar subproblem for the design's current powers.
///
/// `w_init` seeds the SCA when it is itself cap-feasible; otherwise the SCA
/// starts from the strictly feasible minimum-MSE point.
pub fn receive_scalar_update(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
    w_init: Complex64,
) -> ReceiveScalarOutcome {
    let targets = alignment_targets(design, channels);
    let s = scenario.feed_noise();
    let eps0 = scenario.mse_threshold;
    let k = targets.len() as f64;
    let c: f64 = targets.iter().map(|u| u.norm_sqr()).sum();
    let bar = centroid(&targets);

    // Unconstrained optimum: the centroid.
    if bar.norm_sqr() > 0.0 && mse_of(bar, &targets, s) <= eps0 {
        return ReceiveScalarOutcome::Feasible {
            w: Complex64::new(1.0, 0.0) / bar,
        };
    }

    let (wt_min, min_mse) = min_mse_point(&targets, s);
    if min_mse > eps0 {
        return ReceiveScalarOutcome::MseInfeasible {
            w_min_mse: Complex64::new(1.0, 0.0) / wt_min,
            min_mse,
        };
    }

    // SCA from a feasible start; each subproblem projects the centroid onto
    // the disk induced by linearizing |w~|^2 at the current iterate.
    let mut wt = if w_init.norm_sqr() > 0.0
        && mse_of(Complex64::new(1.0, 0.0) / w_init, &targets, s) <= eps0
    {
        Complex64::new(1.0, 0.0) / w_init
    } else {
        wt_min
    };
    let scale = wt.norm().max(bar.norm());
    for _ in 0..SCA_MAX_ITERS {
        let z0 = bar + wt * (eps0 / k);
        let r_sq = z0.norm_sqr() - (c + s + eps0 * wt.norm_sqr()) / k;
        // Feasible current iterate implies a nonempty disk; tiny negatives
        // are floating-point noise.
        let radius = r_sq.max(0.0).sqrt();
        let next = if (bar - z0).norm() <= radius {
            bar
        } else {
            z0 + (bar - z0) / (bar - z0).norm() * radius
        };
        let delta = (next - wt).norm();
        wt = next;
        if delta <= SCA_TOL * scale {
            break;
        }
    }
    ReceiveScalarOutcome::Feasible {
        w: Complex64::new(1.0, 0.0) / wt,
    }
}
