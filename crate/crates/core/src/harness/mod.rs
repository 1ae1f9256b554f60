//! Monte-Carlo experiment harness: paired user drops across schemes,
//! parameter sweeps, aggregation, and deterministic CSV export.

pub mod config;
pub mod csvout;
pub mod selftest;

use crate::ao::{run_all_schemes, AoConfig, AoError, SchemeKind};
use crate::model::{sample_users, Scenario, UserSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Swept parameter of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// No sweep; record convergence traces (one point).
    Iterations,
    KAircomp,
    NAntennas,
    Alpha,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Iterations => "iterations",
            SweepVar::KAircomp => "k_aircomp",
            SweepVar::NAntennas => "n_antennas",
            SweepVar::Alpha => "alpha",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iterations" | "iter" => Some(SweepVar::Iterations),
            "ka" | "k_aircomp" => Some(SweepVar::KAircomp),
            "n" | "n_antennas" => Some(SweepVar::NAntennas),
            "alpha" => Some(SweepVar::Alpha),
            _ => None,
        }
    }

    /// Scenario with this variable overridden.
    pub fn apply(self, base: &Scenario, value: f64) -> Scenario {
        let mut s = base.clone();
        match self {
            SweepVar::Iterations => {}
            SweepVar::KAircomp => s.k_aircomp = value.round() as usize,
            SweepVar::NAntennas => s.n_antennas = value.round() as usize,
            SweepVar::Alpha => s.alpha = value,
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub schemes: Vec<SchemeKind>,
    pub realizations: usize,
    pub seed: u64,
    pub ao: AoConfig,
}

impl ExperimentSpec {
    /// Convergence run on the base scenario (the "iterations" sweep).
    pub fn converge(scenario: Scenario, schemes: Vec<SchemeKind>, realizations: usize) -> Self {
        let seed = scenario.seed;
        ExperimentSpec {
            scenario,
            sweep: SweepVar::Iterations,
            values: vec![0.0],
            schemes,
            realizations,
            seed,
            ao: AoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    InitInfeasible,
    SolverError,
}

impl RunStatus {
    pub fn label(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::InitInfeasible => "init_infeasible",
            RunStatus::SolverError => "solver_error",
        }
    }
}

/// One (sweep value, realization, scheme) result row.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub sweep_value: f64,
    pub realization: usize,
    pub scheme: SchemeKind,
    pub status: RunStatus,
    pub hybrid: f64,
    pub computation: f64,
    pub noma_sum: f64,
    pub mse: f64,
    pub iterations: usize,
    pub feasible: bool,
    pub qos_ok: bool,
    pub mse_ok: bool,
    pub power_ok: bool,
    pub mse_relaxed: bool,
    /// Wall time of this run. Reported in the console summary only; CSVs
    /// must stay byte-identical across reruns of the same seed.
    pub wall_seconds: f64,
}

/// Mean hybrid-rate trajectory per outer iteration for one scheme.
#[derive(Debug, Clone)]
pub struct MeanTrace {
    pub scheme: SchemeKind,
    pub hybrid: Vec<f64>,
}

/// Aggregated statistics per (sweep value, scheme) over the paired
/// realizations in which every requested scheme completed.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub sweep_value: f64,
    pub scheme: SchemeKind,
    pub runs: usize,
    pub hybrid_mean: f64,
    pub hybrid_std: f64,
    pub computation_mean: f64,
    pub computation_std: f64,
    pub noma_mean: f64,
    pub noma_std: f64,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub iterations_mean: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub sweep: SweepVar,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub traces: Vec<MeanTrace>,
    pub wall_seconds: f64,
}

/// The user drop of one realization.
///
/// Coordinates come from a fixed pool drawn on the realization's own RNG
/// stream, and the requested user counts take prefixes of that pool. Every
/// scheme sees the identical drop, and sweeps over user or antenna counts
/// compare nested prefixes of the same pool, so sweep trends are paired
/// comparisons rather than draws of fresh populations.
pub fn realization_users(scenario: &Scenario, seed: u64, realization: usize) -> UserSet {
    const POOL: usize = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization as u64);
    let pooled = Scenario {
        k_aircomp: POOL.max(scenario.k_aircomp),
        k_noma: POOL.max(scenario.k_noma),
        ..scenario.clone()
    };
    let mut pool = sample_users(&mut rng, &pooled);
    pool.aircomp.truncate(scenario.k_aircomp);
    pool.noma.truncate(scenario.k_noma);
    pool
}

fn solver_seed(seed: u64, realization: usize) -> u64 {
    // splitmix64; shared across sweep values so multistart randomness is
    // paired along a sweep, and decoupled from the user-drop streams.
    let mut z = seed ^ (realization as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run the full experiment. Deterministic for a fixed spec: realizations
/// execute in parallel but results are merged in index order.
pub fn run_experiment(spec: &ExperimentSpec) -> ExperimentResult {
    let start = Instant::now();
    let tasks: Vec<(usize, usize)> = (0..spec.values.len())
        .flat_map(|v| (0..spec.realizations).map(move |r| (v, r)))
        .collect();

    type TaskOut = (
        usize,
        usize,
        Vec<(SchemeKind, Result<crate::ao::AoOutcome, AoError>)>,
        f64,
    );
    let mut raw: Vec<TaskOut> = tasks
        .par_iter()
        .map(|&(value_idx, realization)| {
            let scenario = spec.sweep.apply(&spec.scenario, spec.values[value_idx]);
            let users = realization_users(&scenario, spec.seed, realization);
            let t0 = Instant::now();
            let outcomes = run_all_schemes(
                &users,
                &scenario,
                &spec.ao,
                &spec.schemes,
                solver_seed(spec.seed, realization),
            );
            (
                value_idx,
                realization,
                outcomes,
                t0.elapsed().as_secs_f64(),
            )
        })
        .collect();
    raw.sort_by_key(|&(v, r, _, _)| (v, r));

    let mut records = Vec::new();
    let mut trace_store: Vec<(SchemeKind, Vec<Vec<f64>>)> = spec
        .schemes
        .iter()
        .map(|&s| (s, Vec::new()))
        .collect();
    for (value_idx, realization, outcomes, wall) in &raw {
        let sweep_value = spec.values[*value_idx];
        let per_run_wall = wall / outcomes.len().max(1) as f64;
        for (scheme, outcome) in outcomes {
            let record = match outcome {
                Ok(out) => {
                    if spec.sweep == SweepVar::Iterations {
                        if let Some((_, store)) =
                            trace_store.iter_mut().find(|(s, _)| s == scheme)
                        {
                            store.push(out.report.objective_trace.clone());
                        }
                    }
                    RunRecord {
                        sweep_value,
                        realization: *realization,
                        scheme: *scheme,
                        status: RunStatus::Ok,
                        hybrid: out.breakdown.hybrid,
                        computation: out.breakdown.computation_rate,
                        noma_sum: out.breakdown.noma_sum,
                        mse: out.breakdown.aircomp_mse,
                        iterations: out.report.iterations,
                        feasible: out.feasibility.feasible,
                        qos_ok: out.feasibility.qos_ok,
                        mse_ok: out.feasibility.mse_ok,
                        power_ok: out.feasibility.power_ok,
                        mse_relaxed: out.flags.mse_relaxed,
                        wall_seconds: per_run_wall,
                    }
                }
                Err(err) => RunRecord {
                    sweep_value,
                    realization: *realization,
                    scheme: *scheme,
                    status: match err {
                        AoError::QosInfeasible | AoError::MseInfeasible => {
                            RunStatus::InitInfeasible
                        }
                        AoError::Monotonicity { .. } => RunStatus::SolverError,
                    },
                    hybrid: f64::NAN,
                    computation: f64::NAN,
                    noma_sum: f64::NAN,
                    mse: f64::NAN,
                    iterations: 0,
                    feasible: false,
                    qos_ok: false,
                    mse_ok: false,
                    power_ok: false,
                    mse_relaxed: false,
                    wall_seconds: per_run_wall,
                },
            };
            records.push(record);
        }
    }

    let aggregates = aggregate(spec, &records);
    let traces = trace_store
        .into_iter()
        .map(|(scheme, runs)| MeanTrace {
            scheme,
            hybrid: mean_trace(&runs),
        })
        .collect();

    ExperimentResult {
        sweep: spec.sweep,
        records,
        aggregates,
        traces,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Average traces of different lengths: shorter runs hold their final value.
fn mean_trace(runs: &[Vec<f64>]) -> Vec<f64> {
    let len = runs.iter().map(Vec::len).max().unwrap_or(0);
    let mut mean = vec![0.0; len];
    if runs.is_empty() {
        return mean;
    }
    for run in runs {
        for (i, slot) in mean.iter_mut().enumerate() {
            *slot += run.get(i).copied().or(run.last().copied()).unwrap_or(0.0);
        }
    }
    mean.iter_mut().for_each(|v| *v /= runs.len() as f64);
    mean
}

fn aggregate(spec: &ExperimentSpec, records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for (value_idx, &sweep_value) in spec.values.iter().enumerate() {
        // Keep comparisons paired: use only realizations where every
        // requested scheme completed.
        let complete: Vec<usize> = (0..spec.realizations)
            .filter(|&r| {
                spec.schemes.iter().all(|&s| {
                    records.iter().any(|rec| {
                        rec.realization == r
                            && rec.scheme == s
                            && rec.status == RunStatus::Ok
                            && (rec.sweep_value == spec.values[value_idx]
                                || rec.sweep_value.is_nan())
                    })
                })
            })
            .collect();
        for &scheme in &spec.schemes {
            let selected: Vec<&RunRecord> = records
                .iter()
                .filter(|rec| {
                    rec.scheme == scheme
                        && rec.status == RunStatus::Ok
                        && rec.sweep_value == sweep_value
                        && complete.contains(&rec.realization)
                })
                .collect();
            let n = selected.len();
            let stat = |f: &dyn Fn(&RunRecord) -> f64| -> (f64, f64) {
                if n == 0 {
                    return (f64::NAN, f64::NAN);
                }
                let mean = selected.iter().map(|r| f(r)).sum::<f64>() / n as f64;
                let var = if n > 1 {
                    selected
                        .iter()
                        .map(|r| {
                            let d = f(r) - mean;
                            d * d
                        })
                        .sum::<f64>()
                        / (n - 1) as f64
                } else {
                    0.0
                };
                (mean, var.sqrt())
            };
            let (hybrid_mean, hybrid_std) = stat(&|r| r.hybrid);
            let (computation_mean, computation_std) = stat(&|r| r.computation);
            let (noma_mean, noma_std) = stat(&|r| r.noma_sum);
            let (mse_mean, mse_std) = stat(&|r| r.mse);
            let (iterations_mean, _) = stat(&|r| r.iterations as f64);
            rows.push(AggregateRow {
                sweep_value,
                scheme,
                runs: n,
                hybrid_mean,
                hybrid_std,
                computation_mean,
                computation_std,
                noma_mean,
                noma_std,
                mse_mean,
                mse_std,
                iterations_mean,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        let scenario = Scenario {
            realizations: 3,
            ..Scenario::default()
        };
        ExperimentSpec {
            seed: scenario.seed,
            scenario,
            sweep: SweepVar::Iterations,
            values: vec![0.0],
            schemes: vec![SchemeKind::Proposed, SchemeKind::FixedPa],
            realizations: 3,
            ao: AoConfig::default(),
        }
    }

    #[test]
    fn records_cover_every_cell() {
        let spec = tiny_spec();
        let result = run_experiment(&spec);
        assert_eq!(result.records.len(), 3 * 2);
        for r in 0..3 {
            for &s in &spec.schemes {
                assert!(result
                    .records
                    .iter()
                    .any(|rec| rec.realization == r && rec.scheme == s));
            }
        }
    }

    #[test]
    fn paired_drops_are_identical_across_schemes() {
        let scenario = Scenario::default();
        let a = realization_users(&scenario, 7, 4);
        let b = realization_users(&scenario, 7, 4);
        assert_eq!(a, b);
        let c = realization_users(&scenario, 7, 5);
        assert_ne!(a, c, "different realizations draw different drops");
    }

    #[test]
    fn aggregates_match_arithmetic_means() {
        let spec = tiny_spec();
        let result = run_experiment(&spec);
        for row in &result.aggregates {
            let values: Vec<f64> = result
                .records
                .iter()
                .filter(|r| r.scheme == row.scheme && r.status == RunStatus::Ok)
                .map(|r| r.hybrid)
                .collect();
            if values.len() == row.runs && row.runs > 0 {
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                assert!(
                    (mean - row.hybrid_mean).abs() <= 1e-12 * mean.abs().max(1.0),
                    "aggregate mean mismatch"
                );
            }
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let spec = tiny_spec();
        let a = run_experiment(&spec);
        let b = run_experiment(&spec);
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.hybrid.to_bits(), rb.hybrid.to_bits());
            assert_eq!(ra.mse.to_bits(), rb.mse.to_bits());
        }
    }

    #[test]
    fn mean_trace_pads_short_runs() {
        let runs = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0]];
        let mean = mean_trace(&runs);
        assert_eq!(mean, vec![1.0, 2.0, 2.5]);
    }
}
