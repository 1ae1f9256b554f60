//! CSV emission with a stable schema and 12-significant-digit numbers, so
//! identical (config, seed) pairs reproduce byte-identical files.

use super::{AggregateRow, ExperimentResult, MeanTrace, RunRecord, SweepVar};
use std::io;
use std::path::{Path, PathBuf};

/// 12 significant digits in scientific notation.
pub fn sig(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn runs_csv(sweep: SweepVar, records: &[RunRecord]) -> String {
    let mut out = String::from(
        "sweep_var,sweep_value,realization,scheme,status,hybrid_rate,computation_rate,\
         noma_sum_rate,mse,iterations,feasible,qos_ok,mse_ok,power_ok,mse_relaxed\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            sweep.name(),
            sig(r.sweep_value),
            r.realization,
            r.scheme.name(),
            r.status.label(),
            sig(r.hybrid),
            sig(r.computation),
            sig(r.noma_sum),
            sig(r.mse),
            r.iterations,
            r.feasible,
            r.qos_ok,
            r.mse_ok,
            r.power_ok,
            r.mse_relaxed,
        ));
    }
    out
}

pub fn aggregate_csv(sweep: SweepVar, rows: &[AggregateRow]) -> String {
    let mut out = String::from(
        "sweep_var,sweep_value,scheme,runs,hybrid_mean,hybrid_std,computation_mean,\
         computation_std,noma_mean,noma_std,mse_mean,mse_std,iterations_mean\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            sweep.name(),
            sig(r.sweep_value),
            r.scheme.name(),
            r.runs,
            sig(r.hybrid_mean),
            sig(r.hybrid_std),
            sig(r.computation_mean),
            sig(r.computation_std),
            sig(r.noma_mean),
            sig(r.noma_std),
            sig(r.mse_mean),
            sig(r.mse_std),
            sig(r.iterations_mean),
        ));
    }
    out
}

pub fn trace_csv(traces: &[MeanTrace]) -> String {
    let mut out = String::from("iter,scheme,hybrid_rate\n");
    for trace in traces {
        for (iter, value) in trace.hybrid.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", iter, trace.scheme.name(), sig(*value)));
        }
    }
    out
}

/// Write `runs.csv`, `aggregate.csv`, and (when traces exist) `trace.csv`
/// under `dir`. Returns the written paths.
pub fn write_experiment(dir: &Path, result: &ExperimentResult) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let runs = dir.join("runs.csv");
    std::fs::write(&runs, runs_csv(result.sweep, &result.records))?;
    written.push(runs);
    let agg = dir.join("aggregate.csv");
    std::fs::write(&agg, aggregate_csv(result.sweep, &result.aggregates))?;
    written.push(agg);
    if result.traces.iter().any(|t| !t.hybrid.is_empty()) {
        let trace = dir.join("trace.csv");
        std::fs::write(&trace, trace_csv(&result.traces))?;
        written.push(trace);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_is_twelve_significant_digits() {
        assert_eq!(sig(1.0), "1.00000000000e0");
        assert_eq!(sig(-0.1), "-1.00000000000e-1");
        assert_eq!(sig(123456789.0), "1.23456789000e8");
    }

    #[test]
    fn trace_csv_schema() {
        let traces = vec![MeanTrace {
            scheme: crate::ao::SchemeKind::Proposed,
            hybrid: vec![1.0, 2.0],
        }];
        let text = trace_csv(&traces);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iter,scheme,hybrid_rate"));
        assert_eq!(lines.next(), Some("0,proposed,1.00000000000e0"));
        assert_eq!(lines.next(), Some("1,proposed,2.00000000000e0"));
    }
}
