//! Seeded experiment harness: signals, plans, trials, probes and reports.

mod plan;
mod probe;
mod report;
mod signal;
mod trial;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use plan::{Cell, ExperimentPlan, MethodKind, MethodSpec, Outputs, ParameterRule, Sweep, SweepAxis};
pub use probe::{empirical_probability, Comparison, ProbeEvent, ProbeResult, MIN_PROBE_TRIALS};
pub use report::{emit_report, infer_axis, parse_csv, read_csv, to_csv, to_json, to_plotdata, ReportFormat, CSV_COLUMNS};
pub use signal::{generate_signal, AmplitudeLaw, GeneratedSignal, SignalModel, SignalSpec};
pub use trial::{run_trial, run_trial_detailed, trial_seed, TrialRecord, TrialResult};

use crate::error::{Error, Result};

/// Relative error below which a trial counts as exact recovery.
pub const SUCCESS_TOL: f64 = 1e-4;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "FR_WORKERS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell_index: usize,
    pub method: MethodKind,
    pub m: usize,
    pub s: usize,
    pub sigma: f64,
    pub s_prime: usize,
    pub trials: usize,
    pub converged: usize,
    /// Trials where the solver returned an error.
    pub failed: usize,
    pub mean_error_l2: f64,
    pub median_error_l2: f64,
    /// Fraction with `error_l2 ≤ 1e-4‖f‖₂`; absent when signal norms are unknown.
    pub success_rate: Option<f64>,
    pub mean_bound: Option<f64>,
    pub certified_trials: usize,
    /// Converged certified trials whose error exceeds the bound.
    pub bound_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub records: usize,
    pub bound_violations: usize,
    pub cells: Vec<CellSummary>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[k],
        _ => 0.5 * (v[k - 1] + v[k]),
    }
}

/// Per-cell statistics as a fold over records in `(cell, trial)` order.
/// `signal_norms`, when given, is parallel to `records`.
pub fn aggregate(records: &[TrialRecord], signal_norms: Option<&[f64]>) -> Aggregate {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| (records[i].cell_index, records[i].trial_index));
    let mut cells: Vec<CellSummary> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let cell = records[order[start]].cell_index;
        let end = start + order[start..].iter().take_while(|&&i| records[i].cell_index == cell).count();
        let group: Vec<&TrialRecord> = order[start..end].iter().map(|&i| &records[i]).collect();
        let first = group[0];
        let errors: Vec<f64> = group.iter().map(|r| r.error_l2).filter(|e| e.is_finite()).collect();
        let bounds: Vec<f64> = group.iter().filter_map(|r| r.bound).collect();
        let success_rate = signal_norms.map(|norms| {
            let hits = order[start..end]
                .iter()
                .filter(|&&i| records[i].error_l2 <= SUCCESS_TOL * norms[i])
                .count();
            hits as f64 / group.len() as f64
        });
        let bound_violations = group
            .iter()
            .filter(|r| r.converged && r.bound.is_some_and(|b| r.error_l2 > b))
            .count();
        cells.push(CellSummary {
            cell_index: cell,
            method: first.method,
            m: first.m,
            s: first.s,
            sigma: first.sigma,
            s_prime: first.s_prime,
            trials: group.len(),
            converged: group.iter().filter(|r| r.converged).count(),
            failed: group.len() - errors.len(),
            mean_error_l2: if errors.is_empty() { f64::NAN } else { mean(&errors) },
            median_error_l2: median(&errors),
            success_rate,
            mean_bound: (!bounds.is_empty()).then(|| mean(&bounds)),
            certified_trials: bounds.len(),
            bound_violations,
        });
        start = end;
    }
    Aggregate {
        records: records.len(),
        bound_violations: cells.iter().map(|c| c.bound_violations).sum(),
        cells,
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub results: Vec<TrialResult>,
    pub aggregate: Aggregate,
}

/// Worker count: explicit value, then `FR_WORKERS`, then all cores.
pub fn resolve_workers(explicit: Option<usize>) -> Result<usize> {
    if let Some(w) = explicit {
        return if w == 0 { Err(Error::invalid("worker count must be >= 1")) } else { Ok(w) };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Ok(w),
            _ => Err(Error::invalid(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs every cell and trial. The records depend only on the plan.
pub fn run_experiment(plan: &ExperimentPlan, workers: Option<usize>) -> Result<ExperimentOutput> {
    plan.validate()?;
    let workers = resolve_workers(workers)?;
    let cells = plan.cells();
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..plan.trials_per_cell).map(move |t| (c, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let results: Vec<TrialResult> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, t)| run_trial_detailed(plan, c, t))
            .collect::<Result<_>>()
    })?;
    let records: Vec<TrialRecord> = results.iter().map(|r| r.record.clone()).collect();
    let norms: Vec<f64> = results.iter().map(|r| r.signal_norm).collect();
    let aggregate = aggregate(&records, Some(&norms));
    Ok(ExperimentOutput { records, results, aggregate })
}

/// Writes the outputs named in the plan under `dir`; returns the paths written.
pub fn write_outputs(plan: &ExperimentPlan, output: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let outs = &plan.outputs;
    let axis = outs.plot_axis.or_else(|| plan.varying_axis());
    for (name, format) in [
        (&outs.csv, ReportFormat::Csv),
        (&outs.json, ReportFormat::Json),
        (&outs.plotdata, ReportFormat::Plotdata),
    ] {
        if let Some(name) = name {
            let path = dir.join(name);
            emit_report(&output.records, Some(&output.aggregate), format, &path, axis)?;
            written.push(path);
        }
    }
    if let Some(name) = &outs.aggregate {
        let path = dir.join(name);
        let text = serde_json::to_string_pretty(&output.aggregate)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::plan::tests::SMALL_PLAN;

    #[test]
    fn constant_records_aggregate() {
        let plan = ExperimentPlan::from_json(SMALL_PLAN).unwrap();
        let rec = run_trial(&plan, 0, 0).unwrap();
        let mut records = vec![rec.clone(); 5];
        for (i, r) in records.iter_mut().enumerate() {
            r.trial_index = i;
        }
        let agg = aggregate(&records, None);
        assert_eq!(agg.cells.len(), 1);
        let c = &agg.cells[0];
        assert_eq!(c.mean_error_l2, rec.error_l2);
        assert_eq!(c.median_error_l2, rec.error_l2);
        assert_eq!(c.success_rate, None);
    }

    #[test]
    fn record_count_and_worker_independence() {
        let plan = ExperimentPlan::from_json(SMALL_PLAN).unwrap();
        let one = run_experiment(&plan, Some(1)).unwrap();
        assert_eq!(one.records.len(), plan.cells().len() * plan.trials_per_cell);
        let three = run_experiment(&plan, Some(3)).unwrap();
        assert_eq!(to_csv(&one.records).unwrap(), to_csv(&three.records).unwrap());
        assert!(one.records.iter().all(|r| r.wall_time_ms == 0.0));
        assert!(run_experiment(&plan, Some(0)).is_err());
    }

    #[test]
    fn writes_requested_outputs() {
        let mut plan = ExperimentPlan::from_json(SMALL_PLAN).unwrap();
        plan.outputs.plotdata = Some("errors.dat".into());
        let out = run_experiment(&plan, Some(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let written = write_outputs(&plan, &out, dir.path()).unwrap();
        assert_eq!(written.len(), 4);
        let back = read_csv(dir.path().join("records.csv")).unwrap();
        assert_eq!(to_csv(&back).unwrap(), std::fs::read_to_string(dir.path().join("records.csv")).unwrap());
    }
}
