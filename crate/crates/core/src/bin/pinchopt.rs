//! Command-line front end: single solves, convergence traces, parameter
//! sweeps, and the oracle selftest.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 internal solver
//! invariant violation.

use clap::{Args, Parser, Subcommand};
use pinchopt::ao::{run_all_schemes, AoConfig, AoError, SchemeKind};
use pinchopt::harness::config::load_scenario;
use pinchopt::harness::{
    csvout, realization_users, run_experiment, ExperimentSpec, SweepVar,
};
use pinchopt::model::Scenario;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pinchopt",
    about = "Pinching-antenna uplink hybrid-rate optimizer",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario config file (key = value lines); defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated schemes: proposed,fixed_pa,discrete_pas,full_power.
    #[arg(long, default_value = "proposed,fixed_pa,discrete_pas,full_power")]
    schemes: String,
    /// Monte-Carlo realizations (overrides the config; the config default
    /// is the full 200-drop protocol, CI-scale runs usually pass 20).
    #[arg(long)]
    realizations: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one realization and print the rate/constraint breakdown.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Realization index to solve.
        #[arg(long, default_value_t = 0)]
        realization: usize,
    },
    /// Convergence traces of all schemes (mean hybrid rate per iteration).
    Converge {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep one parameter and emit per-run and aggregate CSVs.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Variable to sweep: ka | n | alpha.
        #[arg(long)]
        var: String,
        /// Comma-separated sweep values (defaults per variable).
        #[arg(long)]
        values: Option<String>,
    },
    /// Run the oracle/property suites and report pass/fail per check.
    Selftest,
}

fn scenario_from(common: &CommonArgs) -> Result<Scenario, String> {
    let mut scenario = match &common.config {
        Some(path) => load_scenario(path).map_err(|e| e.to_string())?,
        None => Scenario::default(),
    };
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    if let Some(realizations) = common.realizations {
        scenario.realizations = realizations;
    }
    scenario.validate().map_err(|e| e.to_string())?;
    Ok(scenario)
}

fn schemes_from(common: &CommonArgs) -> Result<Vec<SchemeKind>, String> {
    common
        .schemes
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| SchemeKind::parse(s).ok_or_else(|| format!("unknown scheme `{s}`")))
        .collect()
}

fn configure_threads() {
    if let Ok(value) = std::env::var("PINCHOPT_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn run_solve(common: &CommonArgs, realization: usize) -> Result<(), CliFailure> {
    let scenario = scenario_from(common).map_err(CliFailure::Config)?;
    let schemes = schemes_from(common).map_err(CliFailure::Config)?;
    let users = realization_users(&scenario, scenario.seed, realization);
    let results = run_all_schemes(
        &users,
        &scenario,
        &AoConfig::default(),
        &schemes,
        scenario.seed ^ realization as u64,
    );
    for (scheme, result) in &results {
        println!("== {} ==", scheme.name());
        match result {
            Ok(out) => {
                let b = &out.breakdown;
                println!("  hybrid rate      : {} bit/s", csvout::sig(b.hybrid));
                println!("  computation rate : {} bit/s", csvout::sig(b.computation_rate));
                println!("  noma sum rate    : {} bit/s", csvout::sig(b.noma_sum));
                println!("  aircomp mse      : {}", csvout::sig(b.aircomp_mse));
                println!("  outer iterations : {}", out.report.iterations);
                let f = &out.feasibility;
                println!(
                    "  feasible         : {} (power {}, qos {}, mse {}, placement {})",
                    f.feasible, f.power_ok, f.qos_ok, f.mse_ok, f.placement_ok
                );
                println!("  mse slack        : {}", csvout::sig(f.mse_slack));
                for (j, slack) in f.qos_slack.iter().enumerate() {
                    println!("  qos slack[{j}]     : {} bit/s", csvout::sig(*slack));
                }
                let min_power_slack = f
                    .power_slack_aircomp
                    .iter()
                    .chain(f.power_slack_noma.iter())
                    .fold(f64::INFINITY, |m, &s| m.min(s));
                println!("  min power slack  : {} W", csvout::sig(min_power_slack));
                if out.flags.mse_relaxed {
                    println!("  note: MSE cap unreachable; minimum-MSE combiner used");
                }
            }
            Err(AoError::Monotonicity { .. }) => return Err(CliFailure::Internal),
            Err(e) => println!("  infeasible realization: {e}"),
        }
    }
    Ok(())
}

fn run_converge(common: &CommonArgs) -> Result<(), CliFailure> {
    let scenario = scenario_from(common).map_err(CliFailure::Config)?;
    let schemes = schemes_from(common).map_err(CliFailure::Config)?;
    let realizations = common.realizations.unwrap_or(20).min(scenario.realizations);
    let spec = ExperimentSpec::converge(scenario, schemes, realizations);
    let result = run_experiment(&spec);
    fail_on_solver_error(&result)?;
    let written = csvout::write_experiment(&common.out, &result).map_err(CliFailure::io)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    println!(
        "{} runs in {:.2}s",
        result.records.len(),
        result.wall_seconds
    );
    Ok(())
}

fn run_sweep(common: &CommonArgs, var: &str, values: Option<&str>) -> Result<(), CliFailure> {
    let scenario = scenario_from(common).map_err(CliFailure::Config)?;
    let schemes = schemes_from(common).map_err(CliFailure::Config)?;
    let sweep = SweepVar::parse(var)
        .filter(|s| *s != SweepVar::Iterations)
        .ok_or_else(|| CliFailure::Config(format!("unknown sweep variable `{var}`")))?;
    let values: Vec<f64> = match values {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| CliFailure::Config(format!("bad sweep value `{s}`")))
            })
            .collect::<Result<_, _>>()?,
        None => match sweep {
            SweepVar::KAircomp | SweepVar::NAntennas => vec![2.0, 4.0, 6.0, 8.0],
            SweepVar::Alpha => (0..=10).map(|i| i as f64 / 10.0).collect(),
            SweepVar::Iterations => unreachable!(),
        },
    };
    for &v in &values {
        let probe = sweep.apply(&scenario, v);
        probe
            .validate()
            .map_err(|e| CliFailure::Config(format!("sweep value {v}: {e}")))?;
    }
    let realizations = common.realizations.unwrap_or(20).min(scenario.realizations);
    let seed = scenario.seed;
    let spec = ExperimentSpec {
        scenario,
        sweep,
        values,
        schemes,
        realizations,
        seed,
        ao: AoConfig::default(),
    };
    let result = run_experiment(&spec);
    fail_on_solver_error(&result)?;
    let written = csvout::write_experiment(&common.out, &result).map_err(CliFailure::io)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    println!(
        "{} runs in {:.2}s",
        result.records.len(),
        result.wall_seconds
    );
    Ok(())
}

fn run_selftest() -> Result<(), CliFailure> {
    let outcomes = pinchopt::harness::selftest::run_all();
    let mut all_passed = true;
    for o in &outcomes {
        if o.passed {
            println!("[PASS] {} ({:.2}s)", o.name, o.seconds);
        } else {
            all_passed = false;
            println!("[FAIL] {} ({:.2}s): {}", o.name, o.seconds, o.detail);
        }
    }
    if all_passed {
        Ok(())
    } else {
        Err(CliFailure::Internal)
    }
}

fn fail_on_solver_error(result: &pinchopt::harness::ExperimentResult) -> Result<(), CliFailure> {
    if result
        .records
        .iter()
        .any(|r| r.status == pinchopt::harness::RunStatus::SolverError)
    {
        return Err(CliFailure::Internal);
    }
    Ok(())
}

enum CliFailure {
    Config(String),
    Internal,
}

impl CliFailure {
    fn io(e: std::io::Error) -> Self {
        CliFailure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems (unknown flags, bad values) exit 1; `--help`
            // and `--version` are not errors.
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Solve {
            common,
            realization,
        } => run_solve(common, *realization),
        Command::Converge { common } => run_converge(common),
        Command::Sweep {
            common,
            var,
            values,
        } => run_sweep(common, var, values.as_deref()),
        Command::Selftest => run_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliFailure::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliFailure::Internal) => {
            eprintln!("error: internal solver invariant violation");
            ExitCode::from(2)
        }
    }
}
