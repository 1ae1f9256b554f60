//! Oracle and property suites behind `pinchopt selftest` and the acceptance
//! tests. Every check compares the library against an independent witness:
//! a closed-form identity, a finite-difference stencil, or a brute-force
//! grid search that never calls the solver under test.

use crate::ao::{ao_solve, AoConfig, SchemeKind};
use crate::harness::{csvout, ExperimentSpec};
use crate::metrics::{
    aircomp_mse, aircomp_second_moment, hybrid_rate_value, noma_rates, noma_sum_closed_form,
    DesignPoint,
};
use crate::model::{sample_users, ChannelState, Placement, Scenario, UserSet};
use crate::optim::aircomp_power::aircomp_power_allocation;
use crate::optim::noma_power::max_received_power;
use crate::optim::placement::hybrid_gradient_v;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn random_design(rng: &mut ChaCha8Rng, scenario: &Scenario, users: &UserSet) -> DesignPoint {
    let positions: Vec<f64> = (0..scenario.n_antennas)
        .map(|_| scenario.waveguide_length * rng.gen::<f64>())
        .collect();
    let placement = Placement::new(positions);
    let channels = ChannelState::compute(users, &placement, scenario);
    let gbar: f64 = channels.g_aircomp.iter().map(|g| g.norm()).sum::<f64>()
        / scenario.k_aircomp as f64;
    DesignPoint {
        rho_aircomp: (0..scenario.k_aircomp)
            .map(|_| scenario.p_max * (0.05 + 0.95 * rng.gen::<f64>()))
            .collect(),
        theta_aircomp: (0..scenario.k_aircomp)
            .map(|_| std::f64::consts::TAU * rng.gen::<f64>())
            .collect(),
        rho_noma: (0..scenario.k_noma)
            .map(|_| scenario.p_max * (0.05 + 0.95 * rng.gen::<f64>()))
            .collect(),
        w: Complex64::from_polar(
            (0.3 + rng.gen::<f64>()) / (gbar * scenario.p_max.sqrt() * 0.5),
            std::f64::consts::TAU * rng.gen::<f64>(),
        ),
        placement,
    }
}

/// SIC telescoping: the per-user rate sum equals the single-log closed form
/// to 1e-10 relative on every instance.
pub fn check_telescoping(instances: usize) -> Result<(), String> {
    let scenario = Scenario::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1600);
    let mut worst = 0.0_f64;
    for i in 0..instances {
        let users = sample_users(&mut rng, &scenario);
        let design = random_design(&mut rng, &scenario, &users);
        let channels = ChannelState::compute(&users, &design.placement, &scenario);
        let (_, sum) = noma_rates(&design, &channels, &scenario);
        let closed = noma_sum_closed_form(&design, &channels, &scenario);
        let rel = (sum - closed).abs() / sum.abs().max(closed.abs()).max(1e-300);
        worst = worst.max(rel);
        if rel > 1e-10 {
            return Err(format!("instance {i}: relative error {rel:e} > 1e-10"));
        }
    }
    let _ = worst;
    Ok(())
}

/// Analytic placement gradient vs. central finite differences at 1e-6 m.
pub fn check_gradient_finite_difference(designs: usize) -> Result<(), String> {
    let scenario = Scenario::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1601);
    let step = 1e-6;
    let mut checked = 0;
    while checked < designs {
        let users = sample_users(&mut rng, &scenario);
        let mut design = random_design(&mut rng, &scenario, &users);
        design
            .placement
            .positions
            .iter_mut()
            .for_each(|v| *v = v.clamp(0.5, scenario.waveguide_length - 0.5));
        let channels = ChannelState::compute(&users, &design.placement, &scenario);
        let ratio = aircomp_second_moment(&design, &channels, &scenario)
            / aircomp_mse(&design, &channels, &scenario);
        if (0.999..=1.001).contains(&ratio) {
            continue; // too close to the computation-rate clamp kink
        }
        let analytic = hybrid_gradient_v(&design, &users, &scenario);
        let mut fd = vec![0.0; scenario.n_antennas];
        for (n, f) in fd.iter_mut().enumerate() {
            let eval = |v: f64| {
                let mut d = design.clone();
                d.placement.positions[n] = v;
                let ch = ChannelState::compute(&users, &d.placement, &scenario);
                hybrid_rate_value(&d, &ch, &scenario)
            };
            let v0 = design.placement.positions[n];
            *f = (eval(v0 + step) - eval(v0 - step)) / (2.0 * step);
        }
        let diff: f64 = analytic
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = fd.iter().map(|g| g * g).sum::<f64>().sqrt();
        let rel = diff / norm.max(1e-9);
        if rel > 1e-4 {
            return Err(format!("design {checked}: gradient relative error {rel:e} > 1e-4"));
        }
        checked += 1;
    }
    Ok(())
}

/// Exhaustive grid search over QoS-feasible NOMA powers, independent of the
/// LP kernel.
fn noma_grid_best(
    g_sq: &[f64],
    gamma: &[f64],
    budgets: &[f64],
    floor: f64,
    steps: usize,
) -> Option<f64> {
    let k = g_sq.len();
    let mut idx = vec![0usize; k];
    let mut best: Option<f64> = None;
    loop {
        let rho: Vec<f64> = (0..k)
            .map(|i| budgets[i] * idx[i] as f64 / (steps - 1) as f64)
            .collect();
        let mut feasible = true;
        for pos in 0..k {
            if gamma[pos] == 0.0 {
                continue;
            }
            let later: f64 = (pos + 1..k).map(|q| rho[q] * g_sq[q]).sum();
            if rho[pos] * g_sq[pos] < gamma[pos] * (later + floor) - 1e-18 {
                feasible = false;
                break;
            }
        }
        if feasible {
            let s: f64 = rho.iter().zip(g_sq).map(|(r, g)| r * g).sum();
            best = Some(best.map_or(s, |b: f64| b.max(s)));
        }
        let mut dim = 0;
        loop {
            if dim == k {
                return best;
            }
            idx[dim] += 1;
            if idx[dim] < steps {
                break;
            }
            idx[dim] = 0;
            dim += 1;
        }
    }
}

/// LP subsolver vs. the grid oracle on fat-feasible random instances,
/// K_N in {1, 2, 3}, 200 grid points per dimension.
pub fn check_lp_grid_oracle(instances: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1602);
    let steps = 200;
    for i in 0..instances {
        let k = 1 + i % 3;
        // Anchor a strictly feasible point, then derive QoS targets below
        // its achieved SINRs so the feasible region is fat.
        let mut g_sq: Vec<f64> = (0..k)
            .map(|_| 1e-6 * (0.2 + 1.8 * rng.gen::<f64>()))
            .collect();
        g_sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let budgets: Vec<f64> = (0..k).map(|_| 0.05 + 0.1 * rng.gen::<f64>()).collect();
        let floor = 1e-8 * (0.5 + rng.gen::<f64>());
        let anchor: Vec<f64> = (0..k)
            .map(|i| budgets[i] * (0.3 + 0.5 * rng.gen::<f64>()))
            .collect();
        let gamma: Vec<f64> = (0..k)
            .map(|pos| {
                let later: f64 = (pos + 1..k).map(|q| anchor[q] * g_sq[q]).sum();
                anchor[pos] * g_sq[pos] / (later + floor) * (0.3 + 0.5 * rng.gen::<f64>())
            })
            .collect();

        let lp = max_received_power(&g_sq, &gamma, &budgets, floor)
            .map_err(|_| format!("instance {i}: LP infeasible on a fat instance"))?;
        let s_lp: f64 = lp.iter().zip(&g_sq).map(|(r, g)| r * g).sum();
        let s_grid = noma_grid_best(&g_sq, &gamma, &budgets, floor, steps)
            .ok_or_else(|| format!("instance {i}: grid found no feasible point"))?;
        let resolution: f64 = g_sq
            .iter()
            .zip(&budgets)
            .map(|(g, p)| g * p / (steps - 1) as f64)
            .sum();
        if s_lp < s_grid - 1e-9 * s_grid.abs() {
            return Err(format!(
                "instance {i}: LP objective {s_lp:e} below grid {s_grid:e}"
            ));
        }
        if s_lp - s_grid > resolution {
            return Err(format!(
                "instance {i}: gap {:e} above grid resolution {:e}",
                s_lp - s_grid,
                resolution
            ));
        }
    }
    Ok(())
}

/// DC solver diagnostics: tangency of the surrogate at every expansion
/// point and monotone ascent of the true objective, both at 1e-10.
pub fn check_mm_ascent_tangency(instances: usize) -> Result<(), String> {
    let scenario = Scenario::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1603);
    for i in 0..instances {
        let users = sample_users(&mut rng, &scenario);
        let design = random_design(&mut rng, &scenario, &users);
        let channels = ChannelState::compute(&users, &design.placement, &scenario);
        let out = aircomp_power_allocation(&design, &channels, &scenario);
        if out.diagnostics.max_tangency_error > 1e-10 {
            return Err(format!(
                "instance {i}: tangency error {:e} > 1e-10",
                out.diagnostics.max_tangency_error
            ));
        }
        if out.diagnostics.min_ascent_slack < -1e-10 {
            return Err(format!(
                "instance {i}: MM ascent slack {:e} < -1e-10",
                out.diagnostics.min_ascent_slack
            ));
        }
    }
    Ok(())
}

/// End-to-end micro instance (K_A = K_N = N = 1) against a zooming grid
/// search over (rho_A, rho_N, v, |w~|). The combiner phase is collapsed
/// analytically: both the objective and the MSE cap improve monotonically
/// as the combiner aligns with the single target, so the optimum has zero
/// phase mismatch.
pub fn check_micro_instance_grid() -> Result<(), String> {
    let scenario = Scenario {
        k_aircomp: 1,
        k_noma: 1,
        n_antennas: 1,
        ..Scenario::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let users = sample_users(&mut rng, &scenario);

    let s = scenario.feed_noise();
    let gamma = scenario.qos_sinr_target();
    let b = scenario.bandwidth;
    let alpha = scenario.alpha;
    let eps0 = scenario.mse_threshold;
    let p = scenario.p_max;
    let lx = scenario.waveguide_length;

    // Rate at one grid point; returns None when QoS or the MSE cap fails.
    let eval = |rho_a: f64, rho_n: f64, g_a: Complex64, g_n: Complex64, t: f64| -> Option<f64> {
        let u = g_a.norm() * rho_a.sqrt();
        let mis = (t - u) * (t - u);
        let mse = (mis + s) / (t * t);
        if mse > eps0 {
            return None;
        }
        let sinr = rho_n * g_n.norm_sqr() / (rho_a * g_a.norm_sqr() + s);
        if sinr < gamma {
            return None;
        }
        let ratio = ((u * u + s) / (mis + s)).max(1.0);
        Some(alpha * b * ratio.log2() + (1.0 - alpha) * b * (1.0 + sinr).log2())
    };

    let u_hi = scenario.lambda / (4.0 * std::f64::consts::PI * scenario.height) * p.sqrt();
    let mut ra_range = (0.0, p);
    let mut rn_range = (0.0, p);
    let mut v_range = (0.0, lx);
    let mut t_range = (1e-3 * u_hi, 10.0 * u_hi);
    let mut log_t = true;
    let mut best: Option<(f64, [f64; 4])> = None;

    for _stage in 0..4 {
        let grid = |lo: f64, hi: f64, n: usize, log: bool| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let f = i as f64 / (n - 1) as f64;
                    if log {
                        lo * (hi / lo).powf(f)
                    } else {
                        lo + (hi - lo) * f
                    }
                })
                .collect()
        };
        let ras = grid(ra_range.0, ra_range.1, 21, false);
        let rns = grid(rn_range.0, rn_range.1, 21, false);
        let vs = grid(v_range.0, v_range.1, 41, false);
        let ts = grid(t_range.0, t_range.1, 120, log_t);
        let channels: Vec<(Complex64, Complex64)> = vs
            .iter()
            .map(|&v| {
                let placement = Placement::new(vec![v]);
                (
                    crate::model::equivalent_channel(users.aircomp[0], &placement, &scenario),
                    crate::model::equivalent_channel(users.noma[0], &placement, &scenario),
                )
            })
            .collect();

        let mut stage_best: Option<(f64, [f64; 4])> = None;
        for (vi, &v) in vs.iter().enumerate() {
            let (g_a, g_n) = channels[vi];
            for &ra in &ras {
                for &rn in &rns {
                    for &t in &ts {
                        if let Some(rate) = eval(ra, rn, g_a, g_n, t) {
                            if stage_best.map_or(true, |(r, _)| rate > r) {
                                stage_best = Some((rate, [ra, rn, v, t]));
                            }
                        }
                    }
                }
            }
        }
        let Some((rate, at)) = stage_best else {
            return Err("grid found no feasible point".into());
        };
        if best.map_or(true, |(r, _)| rate > r) {
            best = Some((rate, at));
        }
        // Zoom: 1.5 coarse steps around the incumbent in every dimension.
        let zoom = |range: (f64, f64), center: f64, n: usize, lo_cap: f64, hi_cap: f64| {
            let h = (range.1 - range.0) / (n - 1) as f64;
            ((center - 1.5 * h).max(lo_cap), (center + 1.5 * h).min(hi_cap))
        };
        let t_h = if log_t {
            best.unwrap().1[3] * 0.3
        } else {
            (t_range.1 - t_range.0) / 119.0 * 1.5
        };
        let at = best.unwrap().1;
        ra_range = zoom(ra_range, at[0], 21, 0.0, p);
        rn_range = zoom(rn_range, at[1], 21, 0.0, p);
        v_range = zoom(v_range, at[2], 41, 0.0, lx);
        t_range = ((at[3] - t_h).max(1e-6 * u_hi), at[3] + t_h);
        log_t = false;
    }

    let (grid_rate, _) = best.expect("stages found a feasible point");
    let out = ao_solve(&users, &scenario, &AoConfig::default(), 11)
        .map_err(|e| format!("micro instance did not solve: {e}"))?;
    let rel = (out.breakdown.hybrid - grid_rate) / grid_rate;
    if rel.abs() > 0.01 {
        return Err(format!(
            "solver {:e} vs grid {grid_rate:e}: relative difference {rel:e} beyond 1%",
            out.breakdown.hybrid
        ));
    }
    Ok(())
}

/// A small paired experiment rendered to CSV twice must be byte-identical.
pub fn check_determinism() -> Result<(), String> {
    let scenario = Scenario {
        realizations: 2,
        seed: 7,
        ..Scenario::default()
    };
    let spec = ExperimentSpec::converge(
        scenario,
        vec![SchemeKind::Proposed, SchemeKind::FixedPa],
        2,
    );
    let render = || {
        let result = crate::harness::run_experiment(&spec);
        let mut text = csvout::runs_csv(result.sweep, &result.records);
        text.push_str(&csvout::aggregate_csv(result.sweep, &result.aggregates));
        text.push_str(&csvout::trace_csv(&result.traces));
        text
    };
    let first = render();
    let second = render();
    if first != second {
        return Err("CSV output differs between identical runs".into());
    }
    Ok(())
}

/// Run every check, returning per-check outcomes (used by the CLI and the
/// acceptance suite).
pub fn run_all() -> Vec<CheckOutcome> {
    let checks: Vec<(&'static str, Box<dyn Fn() -> Result<(), String>>)> = vec![
        (
            "telescoping-identity (1000 instances, 1e-10)",
            Box::new(|| check_telescoping(1000)),
        ),
        (
            "placement-gradient-vs-finite-difference (100 designs, 1e-4)",
            Box::new(|| check_gradient_finite_difference(100)),
        ),
        (
            "noma-lp-vs-grid-oracle (100 instances, 200 steps/dim)",
            Box::new(|| check_lp_grid_oracle(100)),
        ),
        (
            "dc-mm-ascent-and-tangency (25 instances, 1e-10)",
            Box::new(|| check_mm_ascent_tangency(25)),
        ),
        (
            "micro-instance-vs-grid-search (1%)",
            Box::new(check_micro_instance_grid),
        ),
        ("csv-determinism", Box::new(check_determinism)),
    ];
    checks
        .into_iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let result = check();
            CheckOutcome {
                name,
                passed: result.is_ok(),
                detail: result.err().unwrap_or_default(),
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}
