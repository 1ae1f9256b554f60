//! AirComp transmit-power allocation by difference-of-convex programming.
//!
//! With NOMA powers, the combiner, and the placement fixed, the precoder
//! phases are first aligned so every combined product is real nonnegative:
//! `theta_k = -arg(w^H g_k)`, which is optimal for the MSE term and leaves
//! all power-only terms untouched. In the power variables the hybrid rate
//! splits into two concave pieces,
//!
//! ```text
//! F(rho) = (1-a) B log2( c.rho + I_N + s )  +  a B log2( q.rho + s_w )
//! G(rho) = (1-a) B log2( c.rho + s )        +  a B log2( m(rho) + s_w )
//! ```
//!
//! with `c_k = |g_k|^2`, `q_k = |w^H g_k|^2`, `s = N sigma^2`,
//! `s_w = s |w|^2`, and the misalignment `m(rho) = sum_k (sqrt(q_k rho_k) -
//! 1)^2` standing in for the auxiliary variable `beta` at its active lower
//! bound. Each outer iteration replaces `G` by its tangent at the current
//! point, which over-estimates the concave `G`, so the surrogate minorizes
//! the true objective and is tight at the expansion point: maximizing it can
//! only increase the true hybrid rate.
//!
//! The surrogate is concave and its curvature is wildly anisotropic across
//! the rate and misalignment terms, so the inner solver is cyclic coordinate
//! ascent with an exact 1-D root bisection per power; this is scale-free and
//! handles the box and the interference cap exactly. The cap
//! `c.rho <= I_max` keeps the NOMA QoS constraints satisfiable, so the outer
//! alternating loop never has to claw back feasibility.

use super::{SolverReport, SolverStatus};
use crate::metrics::{noma_received_power, DesignPoint};
use crate::model::{ChannelState, Scenario};

/// Hard caps of the DC loop. The expansion tolerance is relative.
pub const DC_MAX_ITERS: usize = 50;
pub const DC_TOL: f64 = 1e-8;

/// Worst-case MM bookkeeping across the DC iterations (all relative to the
/// objective scale).
#[derive(Debug, Clone, Copy)]
pub struct DcDiagnostics {
    /// Largest |surrogate - true objective| at an expansion point.
    pub max_tangency_error: f64,
    /// Most negative true-objective increment between DC iterates.
    pub min_ascent_slack: f64,
    pub iterations: usize,
}

impl DcDiagnostics {
    fn none() -> Self {
        DcDiagnostics {
            max_tangency_error: 0.0,
            min_ascent_slack: 0.0,
            iterations: 0,
        }
    }

    pub fn merge(&mut self, other: &DcDiagnostics) {
        self.max_tangency_error = self.max_tangency_error.max(other.max_tangency_error);
        self.min_ascent_slack = self.min_ascent_slack.min(other.min_ascent_slack);
        self.iterations += other.iterations;
    }
}

#[derive(Debug, Clone)]
pub struct AircompPowerOutcome {
    /// Optimized powers, original user index order.
    pub rho: Vec<f64>,
    /// Aligned phases theta_k = -arg(w^H g_k).
    pub theta: Vec<f64>,
    /// Active auxiliary value beta = m(rho) at the returned point.
    pub beta: f64,
    pub report: SolverReport,
    pub diagnostics: DcDiagnostics,
}

/// Problem data for one DC solve, in power space.
struct PowerObjective {
    c: Vec<f64>,
    q: Vec<f64>,
    budgets: Vec<f64>,
    s: f64,
    s_w: f64,
    i_noma: f64,
    w_noma: f64, // (1 - alpha) * B
    w_comp: f64, // alpha * B
    /// Cap on c.rho keeping the NOMA QoS slack nonnegative; infinity when no
    /// QoS constraint is active.
    cap: f64,
}

impl PowerObjective {
    fn misalignment(&self, rho: &[f64]) -> f64 {
        self.q
            .iter()
            .zip(rho)
            .map(|(&q, &r)| {
                let t = (q * r).max(0.0).sqrt();
                (t - 1.0) * (t - 1.0)
            })
            .sum()
    }

    fn interference(&self, rho: &[f64]) -> f64 {
        self.c.iter().zip(rho).map(|(c, r)| c * r).sum()
    }

    /// True (unclamped) hybrid objective as a function of the powers.
    fn value(&self, rho: &[f64]) -> f64 {
        let ia = self.interference(rho);
        let qr: f64 = self.q.iter().zip(rho).map(|(q, r)| q * r).sum();
        let m = self.misalignment(rho);
        self.w_noma * ((ia + self.i_noma + self.s).log2() - (ia + self.s).log2())
            + self.w_comp * ((qr + self.s_w).log2() - (m + self.s_w).log2())
    }

    fn feasible(&self, rho: &[f64]) -> bool {
        rho.iter().zip(&self.budgets).all(|(&r, &p)| (0.0..=p).contains(&r))
            && self.interference(rho) <= self.cap * (1.0 + 1e-12)
    }
}

/// Tangent data of G at an expansion point.
struct Surrogate<'a> {
    obj: &'a PowerObjective,
    grad_g: Vec<f64>,
    g_beta: f64,
    constant: f64,
}

impl<'a> Surrogate<'a> {
    fn at(obj: &'a PowerObjective, rho0: &[f64]) -> Self {
        let ln2 = std::f64::consts::LN_2;
        let ia0 = obj.interference(rho0);
        let beta0 = obj.misalignment(rho0);
        let grad_g: Vec<f64> = obj
            .c
            .iter()
            .map(|&c| obj.w_noma / ln2 * c / (ia0 + obj.s))
            .collect();
        let g_beta = obj.w_comp / ln2 / (beta0 + obj.s_w);
        // G(rho0, beta0) minus the linear terms evaluated at rho0/beta0.
        let g0 = obj.w_noma * (ia0 + obj.s).log2() + obj.w_comp * (beta0 + obj.s_w).log2();
        let lin_at0: f64 = grad_g.iter().zip(rho0).map(|(g, r)| g * r).sum();
        let constant = g0 - lin_at0 - g_beta * beta0;
        Surrogate {
            obj,
            grad_g,
            g_beta,
            constant,
        }
    }

    /// Minorant value F(rho) - G_lin(rho).
    fn value(&self, rho: &[f64]) -> f64 {
        let obj = self.obj;
        let ia = obj.interference(rho);
        let qr: f64 = obj.q.iter().zip(rho).map(|(q, r)| q * r).sum();
        let f = obj.w_noma * (ia + obj.i_noma + obj.s).log2() + obj.w_comp * (qr + obj.s_w).log2();
        let lin: f64 = self.grad_g.iter().zip(rho).map(|(g, r)| g * r).sum();
        f - (self.constant + lin + self.g_beta * obj.misalignment(rho))
    }

    /// d(surrogate)/d(rho_k) with the other coordinates fixed.
    fn partial(&self, rho: &[f64], k: usize) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        let obj = self.obj;
        let ia = obj.interference(rho);
        let qr: f64 = obj.q.iter().zip(rho).map(|(q, r)| q * r).sum();
        let mut d = obj.w_noma / ln2 * obj.c[k] / (ia + obj.i_noma + obj.s)
            + obj.w_comp / ln2 * obj.q[k] / (qr + obj.s_w)
            - self.grad_g[k];
        if obj.q[k] > 0.0 {
            // d m / d rho_k = q_k - sqrt(q_k / rho_k); +inf at rho_k = 0.
            let r = rho[k].max(1e-300);
            d -= self.g_beta * (obj.q[k] - (obj.q[k] / r).sqrt());
        }
        d
    }

    /// Exact 1-D maximization over the feasible interval of coordinate k.
    /// The partial derivative is strictly decreasing in rho_k (concavity),
    /// so bisection on its sign finds the interior optimum.
    fn maximize_coordinate(&self, rho: &mut Vec<f64>, k: usize) {
        let obj = self.obj;
        let mut hi = obj.budgets[k];
        if obj.cap.is_finite() && obj.c[k] > 0.0 {
            let others = obj.interference(rho) - obj.c[k] * rho[k];
            hi = hi.min(((obj.cap - others) / obj.c[k]).max(0.0));
        }
        let lo = 0.0;
        if hi <= lo {
            rho[k] = lo;
            return;
        }
        let probe = |r: f64, rho: &mut Vec<f64>| -> f64 {
            let old = rho[k];
            rho[k] = r;
            let d = self.partial(rho, k);
            rho[k] = old;
            d
        };
        if probe(hi, rho) >= 0.0 {
            rho[k] = hi;
            return;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if probe(mid, rho) >= 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        rho[k] = 0.5 * (a + b);
    }

    /// Cyclic coordinate ascent to stationarity of the concave surrogate.
    fn maximize(&self, start: &[f64]) -> Vec<f64> {
        let mut rho = start.to_vec();
        let k = rho.len();
        let scale: f64 = self
            .obj
            .budgets
            .iter()
            .fold(0.0_f64, |m, &p| m.max(p))
            .max(1e-300);
        for _ in 0..200 {
            let mut moved = 0.0_f64;
            for i in 0..k {
                let before = rho[i];
                self.maximize_coordinate(&mut rho, i);
                moved = moved.max((rho[i] - before).abs());
            }
            if moved <= 1e-12 * scale {
                break;
            }
        }
        rho
    }
}

fn build_objective(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> PowerObjective {
    let w_sq = design.w.norm_sqr();
    let c: Vec<f64> = channels.g_aircomp.iter().map(|g| g.norm_sqr()).collect();
    let q: Vec<f64> = c.iter().map(|&c| c * w_sq).collect();
    let s = scenario.feed_noise();

    // Largest AirComp interference that keeps every active QoS constraint
    // satisfiable at the current NOMA powers.
    let gamma = scenario.qos_sinr_target();
    let order = &channels.sic_order;
    let mut cap = f64::INFINITY;
    if gamma > 0.0 {
        for pos in 0..order.len() {
            let j = order[pos];
            let own = design.rho_noma[j] * channels.g_noma[j].norm_sqr();
            let later: f64 = order[pos + 1..]
                .iter()
                .map(|&t| design.rho_noma[t] * channels.g_noma[t].norm_sqr())
                .sum();
            cap = cap.min(own / gamma - later - s);
        }
        // Never tighten below the current point; an already-violated QoS
        // state is the NOMA block's job to repair, not ours to worsen.
        let current: f64 = c
            .iter()
            .zip(&design.rho_aircomp)
            .map(|(c, r)| c * r)
            .sum();
        cap = cap.max(current);
    }

    PowerObjective {
        c,
        q,
        budgets: vec![scenario.p_max; channels.g_aircomp.len()],
        s,
        s_w: s * w_sq,
        i_noma: noma_received_power(design, channels),
        w_noma: (1.0 - scenario.alpha) * scenario.bandwidth,
        w_comp: scenario.alpha * scenario.bandwidth,
        cap,
    }
}

/// One DC run from a feasible start. Returns the final point, its true
/// objective, the per-iteration trace, and MM diagnostics.
fn dc_from(obj: &PowerObjective, start: &[f64]) -> (Vec<f64>, f64, Vec<f64>, DcDiagnostics) {
    let mut rho = start.to_vec();
    let mut value = obj.value(&rho);
    let mut trace = vec![value];
    let mut diag = DcDiagnostics::none();
    for _ in 0..DC_MAX_ITERS {
        let surrogate = Surrogate::at(obj, &rho);
        let scale = value.abs().max(1.0);
        let tangency = (surrogate.value(&rho) - value).abs() / scale;
        diag.max_tangency_error = diag.max_tangency_error.max(tangency);

        let next = surrogate.maximize(&rho);
        let next_value = obj.value(&next);
        diag.min_ascent_slack = diag.min_ascent_slack.min((next_value - value) / scale);
        diag.iterations += 1;
        if next_value <= value {
            // MM guarantees non-decrease up to roundoff; stop on stall.
            break;
        }
        let improved = next_value - value;
        rho = next;
        value = next_value;
        trace.push(value);
        if improved <= DC_TOL * value.abs().max(1.0) {
            break;
        }
    }
    (rho, value, trace, diag)
}

/// Joint rescaling `rho -> c^2 rho`, `w -> w / c` along the alignment
/// ridge. The combined products `w^H g_k p_k` are invariant under this
/// move, so the misalignment is untouched while the noise amplification
/// `N sigma^2 |w|^2` shrinks as `c` grows; the cost is more interference to
/// the NOMA side. Block-coordinate updates cannot travel this ridge (each
/// of the two blocks is separately stationary on it), so the AirComp block
/// finishes with an explicit 1-D search over `c` within the budget and
/// QoS-cap limits.
///
/// Returns the rescaled powers and combiner when some `c != 1` improves the
/// hybrid objective.
pub fn scale_ridge(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> Option<(Vec<f64>, num_complex::Complex64)> {
    let obj = build_objective(design, channels, scenario);
    let rho = &design.rho_aircomp;
    let i_a = obj.interference(rho);
    if i_a <= 0.0 {
        return None;
    }
    let mut c_sq_hi = f64::INFINITY;
    for (r, p) in rho.iter().zip(&obj.budgets) {
        if *r > 0.0 {
            c_sq_hi = c_sq_hi.min(p / r);
        }
    }
    if obj.cap.is_finite() {
        c_sq_hi = c_sq_hi.min(obj.cap / i_a);
    }
    if !c_sq_hi.is_finite() {
        return None;
    }
    let c_sq_lo = 1e-4;
    let w_sq = design.w.norm_sqr();
    let ln2 = std::f64::consts::LN_2;
    // Hybrid objective along the ridge: products fixed, s_w = s |w|^2 / c^2.
    let sum_m_sq: f64 = obj.q.iter().zip(rho).map(|(q, r)| q * r).sum();
    let beta = obj.misalignment(rho);
    let value = |c_sq: f64| -> f64 {
        let s_w = obj.s * w_sq / c_sq;
        let ia = i_a * c_sq;
        obj.w_noma / ln2 * ((ia + obj.i_noma + obj.s).ln() - (ia + obj.s).ln())
            + obj.w_comp / ln2 * ((sum_m_sq + s_w).ln() - (beta + s_w).ln())
    };
    // Coarse log grid, then golden-section refinement around the best cell.
    let mut best = (1.0, value(1.0));
    let grid = 65;
    for i in 0..grid {
        let c_sq = c_sq_lo * (c_sq_hi / c_sq_lo).powf(i as f64 / (grid - 1) as f64);
        let v = value(c_sq);
        if v > best.1 {
            best = (c_sq, v);
        }
    }
    let step = (c_sq_hi / c_sq_lo).powf(1.0 / (grid - 1) as f64);
    let (mut lo, mut hi) = (
        (best.0 / step).max(c_sq_lo),
        (best.0 * step).min(c_sq_hi),
    );
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if value(a) < value(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let c_sq = 0.5 * (lo + hi);
    let improvement = value(c_sq) - value(1.0);
    if !(improvement > 1e-12 * value(1.0).abs().max(1.0)) {
        return None;
    }
    let scaled: Vec<f64> = rho.iter().map(|r| r * c_sq).collect();
    Some((scaled, design.w / c_sq.sqrt()))
}

/// The AirComp power block: aligned phases plus DC-optimized powers.
///
/// Always succeeds; the current powers are a feasible start and the
/// multistart set only ever improves on them.
pub fn aircomp_power_allocation(
    design: &DesignPoint,
    channels: &ChannelState,
    scenario: &Scenario,
) -> AircompPowerOutcome {
    let theta: Vec<f64> = channels
        .g_aircomp
        .iter()
        .map(|g| -(design.w.conj() * g).arg())
        .collect();
    let obj = build_objective(design, channels, scenario);
    let k = obj.c.len();

    // Multistart: the landscape is a difference of concave terms and can
    // hold more than one basin. All starts are cheap at this dimension.
    let mut starts: Vec<Vec<f64>> = vec![design.rho_aircomp.clone(), vec![0.0; k]];
    let aligned: Vec<f64> = (0..k)
        .map(|i| {
            if obj.q[i] > 0.0 {
                (1.0 / obj.q[i]).min(obj.budgets[i])
            } else {
                0.0
            }
        })
        .collect();
    starts.push(aligned);
    starts.push(obj.budgets.clone());

    let mut best: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    let mut diag = DcDiagnostics::none();
    for mut start in starts {
        // Scale a start back inside the interference cap when needed.
        let ia = obj.interference(&start);
        if ia > obj.cap {
            let shrink = obj.cap / ia * (1.0 - 1e-12);
            start.iter_mut().for_each(|r| *r *= shrink.max(0.0));
        }
        if !obj.feasible(&start) {
            continue;
        }
        let (rho, value, trace, d) = dc_from(&obj, &start);
        diag.merge(&d);
        if best.as_ref().map_or(true, |(_, v, _)| value > *v) {
            best = Some((rho, value, trace));
        }
    }
    let (rho, _, trace) =
        best.unwrap_or_else(|| (design.rho_aircomp.clone(), 0.0, vec![obj.value(&design.rho_aircomp)]));
    let beta = obj.misalignment(&rho);
    AircompPowerOutcome {
        rho,
        theta,
        beta,
        report: SolverReport::new(SolverStatus::Optimal, trace),
        diagnostics: diag,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::aircomp_interference;
    use crate::model::{sample_users, ChannelState, Placement};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_setup(
        rng: &mut ChaCha8Rng,
        scenario: &Scenario,
    ) -> (DesignPoint, ChannelState) {
        let users = sample_users(rng, scenario);
        let placement = Placement::uniform(scenario);
        let channels = ChannelState::compute(&users, &placement, scenario);
        // A combiner on the right scale: inverse of a typical |g p|.
        let gbar: f64 = channels.g_aircomp.iter().map(|g| g.norm()).sum::<f64>()
            / scenario.k_aircomp as f64;
        let design = DesignPoint {
            rho_aircomp: vec![0.25 * scenario.p_max; scenario.k_aircomp],
            theta_aircomp: vec![0.0; scenario.k_aircomp],
            rho_noma: vec![0.5 * scenario.p_max; scenario.k_noma],
            w: Complex64::new(3.0 / (gbar * scenario.p_max.sqrt()), 0.0),
            placement,
        };
        (design, channels)
    }

    #[test]
    fn zero_alpha_drives_powers_to_zero() {
        let scenario = Scenario {
            alpha: 0.0,
            r_min: 0.0, // no QoS cap in play
            ..Scenario::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let (design, channels) = random_setup(&mut rng, &scenario);
        let out = aircomp_power_allocation(&design, &channels, &scenario);
        let total: f64 = out.rho.iter().sum();
        assert!(
            total <= 1e-9 * scenario.p_max,
            "alpha = 0 leaves no reason to transmit: sum rho = {total:e}"
        );
    }

    #[test]
    fn single_user_full_weight_aligns_to_unity() {
        // alpha = 1 with a generous budget: the optimum puts the combined
        // product essentially at 1 (exactly: (1 + sqrt(1+4 s_w))/2).
        let scenario = Scenario {
            alpha: 1.0,
            k_aircomp: 1,
            r_min: 0.0,
            ..Scenario::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let (design, channels) = random_setup(&mut rng, &scenario);
        let out = aircomp_power_allocation(&design, &channels, &scenario);
        let a = (design.w.conj() * channels.g_aircomp[0]).norm();
        let t = a * out.rho[0].sqrt();
        assert!(
            a * a * scenario.p_max > 4.0,
            "setup must leave budget headroom (a^2 P = {})",
            a * a * scenario.p_max
        );
        // The exact optimum of log((t^2+s_w)/((t-1)^2+s_w)) sits a noise
        // splinter above one: t* = (1 + sqrt(1 + 4 s_w)) / 2.
        let s_w = scenario.feed_noise() * design.w.norm_sqr();
        let t_star = 0.5 * (1.0 + (1.0 + 4.0 * s_w).sqrt());
        assert!((t - t_star).abs() < 1e-4, "product magnitude {t} vs {t_star}");
        assert!((t - 1.0).abs() < 0.01, "alignment should be near unity: {t}");
    }

    #[test]
    fn phases_cancel_combined_argument() {
        let scenario = Scenario::default();
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let (design, channels) = random_setup(&mut rng, &scenario);
        let out = aircomp_power_allocation(&design, &channels, &scenario);
        for k in 0..scenario.k_aircomp {
            let m = design.w.conj()
                * channels.g_aircomp[k]
                * Complex64::from_polar(1.0, out.theta[k]);
            assert!(m.im.abs() <= 1e-9 * m.norm(), "product not co-phased");
            assert!(m.re >= 0.0);
        }
    }

    #[test]
    fn dc_iterations_ascend_with_tight_tangency() {
        let scenario = Scenario::default();
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for _ in 0..20 {
            let (design, channels) = random_setup(&mut rng, &scenario);
            let out = aircomp_power_allocation(&design, &channels, &scenario);
            assert!(
                out.diagnostics.max_tangency_error <= 1e-10,
                "tangency error {:e}",
                out.diagnostics.max_tangency_error
            );
            assert!(
                out.diagnostics.min_ascent_slack >= -1e-10,
                "MM ascent violated: {:e}",
                out.diagnostics.min_ascent_slack
            );
            for win in out.report.objective_trace.windows(2) {
                assert!(win[1] >= win[0] - 1e-10 * win[0].abs().max(1.0));
            }
            // beta sits on its active bound.
            let obj = build_objective(&design, &channels, &scenario);
            assert!((out.beta - obj.misalignment(&out.rho)).abs() <= 1e-12);
        }
    }

    #[test]
    fn never_returns_worse_than_current_point() {
        let scenario = Scenario::default();
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        for _ in 0..20 {
            let (design, channels) = random_setup(&mut rng, &scenario);
            let obj = build_objective(&design, &channels, &scenario);
            let before = obj.value(&design.rho_aircomp);
            let out = aircomp_power_allocation(&design, &channels, &scenario);
            let after = obj.value(&out.rho);
            assert!(after >= before - 1e-10 * before.abs().max(1.0));
        }
    }

    #[test]
    fn interference_cap_is_respected() {
        // Weak NOMA users close to their QoS floor: the block must not push
        // AirComp interference past the cap.
        let scenario = Scenario {
            r_min: 1.5e6, // demanding target
            ..Scenario::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        for _ in 0..10 {
            let (mut design, channels) = random_setup(&mut rng, &scenario);
            design.rho_aircomp.iter_mut().for_each(|r| *r = 0.0);
            // Put NOMA powers at the QoS-binding minimum for zero I_A.
            let order = &channels.sic_order;
            let g_sq: Vec<f64> = order
                .iter()
                .map(|&j| channels.g_noma[j].norm_sqr())
                .collect();
            let gamma = vec![scenario.qos_sinr_target(); order.len()];
            let Ok(min_rho) = crate::optim::noma_power::min_power_for_qos(
                &g_sq,
                &gamma,
                &vec![scenario.p_max; order.len()],
                scenario.feed_noise(),
            ) else {
                continue;
            };
            // Leave a little slack above the minimum.
            for (pos, &j) in order.iter().enumerate() {
                design.rho_noma[j] = (min_rho[pos] * 1.3).min(scenario.p_max);
            }
            let obj = build_objective(&design, &channels, &scenario);
            if !obj.cap.is_finite() {
                continue;
            }
            let out = aircomp_power_allocation(&design, &channels, &scenario);
            let mut d2 = design.clone();
            d2.rho_aircomp = out.rho.clone();
            let ia = aircomp_interference(&d2, &channels);
            assert!(
                ia <= obj.cap * (1.0 + 1e-9),
                "cap {} exceeded by I_A {}",
                obj.cap,
                ia
            );
        }
    }

    #[test]
    fn two_user_instances_match_grid_oracle() {
        let scenario = Scenario {
            k_aircomp: 2,
            r_min: 0.0, // keep the oracle's feasible set a plain box
            ..Scenario::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for trial in 0..5 {
            let (design, channels) = random_setup(&mut rng, &scenario);
            let obj = build_objective(&design, &channels, &scenario);
            let out = aircomp_power_allocation(&design, &channels, &scenario);
            let solver_value = obj.value(&out.rho);

            let steps = 500;
            let mut grid_best = f64::NEG_INFINITY;
            for i in 0..steps {
                for j in 0..steps {
                    let rho = [
                        obj.budgets[0] * i as f64 / (steps - 1) as f64,
                        obj.budgets[1] * j as f64 / (steps - 1) as f64,
                    ];
                    grid_best = grid_best.max(obj.value(&rho));
                }
            }
            let rel = (grid_best - solver_value) / grid_best.abs().max(1.0);
            assert!(
                rel <= 1e-3,
                "trial {trial}: solver {solver_value} vs grid {grid_best} (rel gap {rel:e})"
            );
        }
    }
}
