use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::plan::{Cell, ExperimentPlan, MethodKind, ParameterRule};
use super::signal::generate_signal;
use crate::bounds::{ads_bound, alasso_bound, tail_profile, BoundInputs};
use crate::error::{Error, Result};
use crate::frames::{FrameKind, FrameSpec, TightFrame};
use crate::linalg::{self, DenseMatrix};
use crate::noise::{ads_lambda, alasso_mu, draw_noise, l2_noise_bound};
use crate::rng::hash64;
use crate::sensing::{draw_sensing, drip_exact, SensingSpec};
use crate::solvers::{solve, verify_outcome, Method, RecoveryProblem, SolverConfig, SolverOutcome};

// Stream tags mixed into the trial seed.
const FRAME_STREAM: u64 = 1;
const SENSING_STREAM: u64 = 2;
const SIGNAL_STREAM: u64 = 3;
const NOISE_STREAM: u64 = 4;
const OMEGA_STREAM: u64 = 5;

/// One row of the results table. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub cell_index: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub method: MethodKind,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub s_prime: usize,
    pub sigma: f64,
    pub lambda_or_mu_or_eps: f64,
    /// `‖f̂ − f‖₂`; NaN when the solver failed outright.
    pub error_l2: f64,
    /// `‖ê − e‖₂` for separation methods.
    pub error_e: Option<f64>,
    pub objective: f64,
    /// Error bound, filled only for certified trials.
    pub bound: Option<f64>,
    pub feasibility_margin: f64,
    pub converged: bool,
    pub wall_time_ms: f64,
}

/// A record plus the quantities the aggregate needs but the table omits.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub record: TrialRecord,
    pub signal_norm: f64,
    /// Exact D-RIP constant, when certification was attempted and affordable.
    pub delta: Option<f64>,
    /// Hypotheses of the bound hold for this draw.
    pub certified: bool,
    /// All applicable `verify_outcome` checks passed.
    pub verified: bool,
    /// Solver error message, if the solve failed.
    pub failure: Option<String>,
}

/// `hash64([master_seed, cell_index, trial_index])`.
pub fn trial_seed(master_seed: u64, cell_index: usize, trial_index: usize) -> u64 {
    hash64(&[master_seed, cell_index as u64, trial_index as u64])
}

pub fn run_trial(plan: &ExperimentPlan, cell_index: usize, trial_index: usize) -> Result<TrialRecord> {
    Ok(run_trial_detailed(plan, cell_index, trial_index)?.record)
}

pub fn run_trial_detailed(plan: &ExperimentPlan, cell_index: usize, trial_index: usize) -> Result<TrialResult> {
    let cells = plan.cells();
    let cell = cells
        .get(cell_index)
        .ok_or_else(|| Error::invalid(format!("cell index {cell_index} out of range (plan has {})", cells.len())))?;
    if trial_index >= plan.trials_per_cell {
        return Err(Error::invalid(format!(
            "trial index {trial_index} out of range (plan has {} per cell)",
            plan.trials_per_cell
        )));
    }
    execute(plan, cell, trial_index)
}

/// Frames without randomness or with square shape follow the measurement count.
fn omega_for(spec: Option<&FrameSpec>, m: usize, seed: u64) -> Result<TightFrame> {
    match spec {
        None => TightFrame::build(FrameKind::Identity, m, m, 0),
        Some(s) if matches!(s.kind, FrameKind::Identity | FrameKind::RandomOnb) => {
            TightFrame::build(s.kind, m, m, seed)
        }
        Some(s) => s.build(seed),
    }
}

fn resolve_parameter(cell: &Cell, d_eff: usize, m: usize) -> Result<f64> {
    match cell.method.parameter {
        ParameterRule::Explicit { value } => Ok(value),
        ParameterRule::PaperFormula => match cell.method.method {
            MethodKind::Ads | MethodKind::Sads => ads_lambda(cell.sigma, d_eff),
            MethodKind::Alasso | MethodKind::Salasso => alasso_mu(cell.sigma, d_eff),
            MethodKind::Abp | MethodKind::Sabp => Ok(l2_noise_bound(cell.sigma, m)?.0),
        },
    }
}

fn method_for(kind: MethodKind, value: f64) -> Method {
    match kind {
        MethodKind::Abp | MethodKind::Sabp => Method::Abp { epsilon: value },
        MethodKind::Ads | MethodKind::Sads => Method::Ads { lambda: value },
        MethodKind::Alasso | MethodKind::Salasso => Method::Alasso { mu: value },
    }
}

struct Certification {
    delta: Option<f64>,
    bound: Option<f64>,
}

/// Exact `δ₃ₛ`, the `δ` threshold and the realized noise event, then the bound.
fn certify(
    kind: MethodKind,
    a: &DenseMatrix,
    frame: &TightFrame,
    s: usize,
    param: f64,
    noise: &[f64],
    coefficients: &[f64],
) -> Result<Certification> {
    let order = (3 * s).min(frame.d());
    let Ok(report) = drip_exact(a, frame, order) else {
        return Ok(Certification { delta: None, bound: None });
    };
    let delta = report.delta;
    let correlation = linalg::norm_inf(&frame.analysis(&a.matvec_transpose(noise)?)?);
    let (limit, noise_cap) = match kind {
        MethodKind::Ads => (0.5, param),
        MethodKind::Alasso => (0.25, param / 2.0),
        _ => return Ok(Certification { delta: Some(delta), bound: None }),
    };
    if !(delta < limit && correlation <= noise_cap) {
        return Ok(Certification { delta: Some(delta), bound: None });
    }
    let inputs = BoundInputs::new(delta, param, tail_profile(coefficients, s)).with_norm11(frame.norm_11());
    let report = match kind {
        MethodKind::Ads => ads_bound(&inputs)?,
        _ => alasso_bound(&inputs)?,
    };
    Ok(Certification { delta: Some(delta), bound: Some(report.bound) })
}

fn execute(plan: &ExperimentPlan, cell: &Cell, trial_index: usize) -> Result<TrialResult> {
    let seed = trial_seed(plan.master_seed, cell.index, trial_index);
    let frame = plan.frame.build(hash64(&[seed, FRAME_STREAM]))?;
    let (n, d) = (frame.n(), frame.d());
    let sensing_spec = SensingSpec {
        m: cell.m,
        n,
        seed: hash64(&[seed, SENSING_STREAM, plan.sensing.seed]),
        ..plan.sensing.clone()
    };
    let a = draw_sensing(&sensing_spec)?;
    let m = a.rows();
    let signal = generate_signal(&plan.signal.with_sparsity(cell.s), &frame, hash64(&[seed, SIGNAL_STREAM]))?;

    let noise_spec = plan.noise.with_sigma(cell.sigma).with_s_prime(cell.s_prime);
    let separation = cell.method.method.separation().is_some();
    let needs_omega = separation || noise_spec.s_prime() > 0 || noise_spec.omega_spec().is_some();
    let omega = if needs_omega {
        Some(omega_for(noise_spec.omega_spec(), m, hash64(&[seed, OMEGA_STREAM]))?)
    } else {
        None
    };
    let noise = draw_noise(&noise_spec, m, omega.as_ref(), hash64(&[seed, NOISE_STREAM]))?;
    let total_noise = noise.total();
    let y = linalg::add(&a.matvec(&signal.f)?, &total_noise);

    let d_eff = if separation { d + omega.as_ref().map_or(m, |o| o.d()) } else { d };
    let param = resolve_parameter(cell, d_eff, m)?;
    let method = method_for(cell.method.method, param);
    let mut problem = RecoveryProblem::new(a.clone(), frame.clone(), y, method)?;
    if separation {
        let omega = omega.clone().expect("separation methods always build Omega");
        problem = problem.with_separation(omega, cell.s_prime)?;
    }

    let config: &SolverConfig = &plan.solver;
    let start = Instant::now();
    let solved = solve(&problem, config);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let wall_time_ms = if plan.outputs.record_wall_time { elapsed_ms } else { 0.0 };

    let mut record = TrialRecord {
        cell_index: cell.index,
        trial_index,
        seed,
        method: cell.method.method,
        m,
        n,
        d,
        s: cell.s,
        s_prime: cell.s_prime,
        sigma: cell.sigma,
        lambda_or_mu_or_eps: param,
        error_l2: f64::NAN,
        error_e: None,
        objective: f64::NAN,
        bound: None,
        feasibility_margin: f64::NAN,
        converged: false,
        wall_time_ms,
    };
    let mut result = TrialResult {
        record: record.clone(),
        signal_norm: linalg::norm2(&signal.f),
        delta: None,
        certified: false,
        verified: false,
        failure: None,
    };
    let outcome: SolverOutcome = match solved {
        Ok(o) => o,
        Err(e) => {
            result.failure = Some(e.to_string());
            return Ok(result);
        }
    };

    record.error_l2 = linalg::norm2(&linalg::sub(&outcome.f_hat, &signal.f));
    if separation {
        let e_hat = outcome.e_hat.as_deref().unwrap_or(&[]);
        record.error_e = Some(linalg::norm2(&linalg::sub(e_hat, &noise.e)));
    }
    record.objective = outcome.objective;
    record.feasibility_margin = outcome.feasibility_margin;
    record.converged = outcome.converged;

    if cell.method.certify && !separation {
        let cert = certify(cell.method.method, &a, &frame, cell.s, param, &total_noise, &signal.coefficients)?;
        result.delta = cert.delta;
        result.certified = cert.bound.is_some();
        record.bound = cert.bound;
    }

    let reference: Vec<f64> = if separation {
        let mut u = signal.f.clone();
        u.extend_from_slice(&noise.e);
        u
    } else {
        signal.f.clone()
    };
    result.verified = verify_outcome(&problem, &outcome, Some(&reference), None, config)
        .map(|r| r.all_pass())
        .unwrap_or(false);
    result.record = record;
    Ok(result)
}
