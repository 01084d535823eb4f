//! Post-hoc diagnostics for recovered signals.

use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::recover::{Method, RecoveryProblem, SolverOutcome};
use crate::error::{Error, Result};
use crate::linalg::{self, check_len};

const STATIONARITY_ITERS: usize = 500;

/// `lhs ≤ rhs` up to a relative tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    fn new(lhs: f64, rhs: f64, tol: f64) -> Self {
        Inequality { lhs, rhs, holds: lhs <= rhs + tol * (1.0 + rhs.abs()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub method: String,
    /// Recomputed method margin (see [`RecoveryProblem::feasibility_margin`]).
    pub feasibility_margin: f64,
    /// ADS/ABP: constraint met to `10·tol_primal` relative.
    /// ALASSO: `‖DᵀAᵀ(Af̂ − y)‖∞ ≤ μ‖DᵀD‖₁,₁(1 + 10·tol_primal)`.
    pub feasible: bool,
    /// Whether the reference signal satisfies the hypothesis its cone
    /// inequality needs (`≤ λ`, `≤ ε`, or `≤ μ/2` for ALASSO).
    pub reference_feasible: Option<bool>,
    /// ADS/ABP: `‖D_{Tᶜ}ᵀh‖₁ ≤ 2‖D_{Tᶜ}ᵀf‖₁ + ‖D_Tᵀh‖₁`.
    /// ALASSO: `‖D_{Tᶜ}ᵀh‖₁ ≤ 3‖D_Tᵀh‖₁ + 4‖D_{Tᶜ}ᵀf‖₁`.
    pub cone: Option<Inequality>,
    /// ADS/ABP: `‖Dᵀf̂‖₁ ≤ ‖Dᵀf‖₁ + tol` when `f` is feasible.
    pub objective_witness: Option<Inequality>,
    /// ALASSO: `‖Dᵀf̂‖₁ ≤ ½‖Dᵀh‖₁ + ‖Dᵀf‖₁` when `‖DᵀAᵀz‖∞ ≤ μ/2`.
    pub triangle: Option<Inequality>,
    /// ALASSO: `min_v ‖Aᵀ(Af̂ − y) + μDv‖₂` over admissible subgradients.
    pub stationarity_residual: Option<f64>,
}

impl VerificationReport {
    /// Every applicable check passed. Checks whose hypothesis fails are skipped.
    pub fn all_pass(&self) -> bool {
        let hyp = self.reference_feasible.unwrap_or(false);
        self.feasible
            && (!hyp || self.cone.map_or(true, |c| c.holds))
            && self.objective_witness.map_or(true, |c| c.holds)
            && self.triangle.map_or(true, |c| c.holds)
    }
}

/// Indices of the `s` largest magnitudes, ties broken by lower index.
pub fn top_support(x: &[f64], s: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    idx.truncate(s);
    idx.sort_unstable();
    idx
}

fn split_l1(v: &[f64], support: &[usize]) -> (f64, f64) {
    let mut on = 0.0;
    let total = linalg::norm1(v);
    for &j in support {
        on += v[j].abs();
    }
    (on, (total - on).max(0.0))
}

/// Checks a solver outcome against the optimality and cone conditions.
///
/// `support` defaults to the top-`s` coefficients of `Dᵀf_true`, with `s`
/// the number of nonzero coefficients (relative threshold 1e-12).
/// Separation problems are checked on the augmented variable `u = [f; e]`,
/// so `f_true` must then be the stacked `[f; e]`.
pub fn verify_outcome(
    problem: &RecoveryProblem,
    outcome: &SolverOutcome,
    f_true: Option<&[f64]>,
    support: Option<&[usize]>,
    config: &SolverConfig,
) -> Result<VerificationReport> {
    let (problem, u_hat) = if problem.separation.is_some() {
        let mut u = outcome.f_hat.clone();
        u.extend(outcome.e_hat.as_deref().unwrap_or(&[]));
        (problem.augmented()?, u)
    } else {
        (problem.clone(), outcome.f_hat.clone())
    };
    let tol = config.tol_primal;
    let margin = problem.feasibility_margin(&u_hat)?;
    let param = problem.method.parameter();
    let feasible = match problem.method {
        Method::Ads { .. } | Method::Abp { .. } => margin >= -10.0 * tol * (1.0 + param),
        Method::Alasso { mu } => {
            let cap = mu * problem.frame.norm_11();
            cap - margin <= cap * (1.0 + 10.0 * tol) + 10.0 * tol
        }
    };
    let mut report = VerificationReport {
        method: problem.method.name().to_string(),
        feasibility_margin: margin,
        feasible,
        reference_feasible: None,
        cone: None,
        objective_witness: None,
        triangle: None,
        stationarity_residual: None,
    };

    if let Method::Alasso { mu } = problem.method {
        report.stationarity_residual = Some(stationarity_residual(&problem, &u_hat, mu, tol)?);
    }

    let Some(f) = f_true else {
        return Ok(report);
    };
    check_len("reference signal", u_hat.len(), f.len())?;
    let coeffs_f = problem.frame.analysis(f)?;
    let support: Vec<usize> = match support {
        Some(t) => {
            if let Some(&bad) = t.iter().find(|&&j| j >= coeffs_f.len()) {
                return Err(Error::invalid(format!("support index {bad} out of range")));
            }
            t.to_vec()
        }
        None => {
            let floor = 1e-12 * linalg::norm_inf(&coeffs_f);
            let s = coeffs_f.iter().filter(|v| v.abs() > floor).count();
            top_support(&coeffs_f, s)
        }
    };
    let h = linalg::sub(&u_hat, f);
    let coeffs_h = problem.frame.analysis(&h)?;
    let (h_on, h_off) = split_l1(&coeffs_h, &support);
    let (_, f_off) = split_l1(&coeffs_f, &support);
    let l1_hat = linalg::norm1(&problem.frame.analysis(&u_hat)?);
    let l1_f = linalg::norm1(&coeffs_f);
    let cone_tol = config.tol_gap.max(10.0 * tol);

    match problem.method {
        Method::Ads { lambda } => {
            let ok = linalg::norm_inf(&problem.correlation(f)?) <= lambda;
            report.reference_feasible = Some(ok);
            report.cone = Some(Inequality::new(h_off, 2.0 * f_off + h_on, cone_tol));
            if ok {
                report.objective_witness = Some(Inequality::new(l1_hat, l1_f, cone_tol));
            }
        }
        Method::Abp { epsilon } => {
            let r = linalg::sub(&problem.sensing.forward(f)?, &problem.y);
            let ok = linalg::norm2(&r) <= epsilon;
            report.reference_feasible = Some(ok);
            report.cone = Some(Inequality::new(h_off, 2.0 * f_off + h_on, cone_tol));
            if ok {
                report.objective_witness = Some(Inequality::new(l1_hat, l1_f, cone_tol));
            }
        }
        Method::Alasso { mu } => {
            let ok = linalg::norm_inf(&problem.correlation(f)?) <= mu / 2.0;
            report.reference_feasible = Some(ok);
            report.cone = Some(Inequality::new(h_off, 3.0 * h_on + 4.0 * f_off, cone_tol));
            if ok {
                let half = 0.5 * linalg::norm1(&coeffs_h);
                report.triangle = Some(Inequality::new(l1_hat, half + l1_f, cone_tol));
            }
        }
    }
    Ok(report)
}

/// `min ‖g + μDv‖₂` over `|vᵢ| ≤ 1`, with `vᵢ = sign(cᵢ)` fixed on active
/// coefficients `c = Dᵀf̂`, by projected gradient.
fn stationarity_residual(problem: &RecoveryProblem, f_hat: &[f64], mu: f64, tol: f64) -> Result<f64> {
    let resid = linalg::sub(&problem.sensing.forward(f_hat)?, &problem.y);
    let g = problem.sensing.adjoint_apply(&resid)?;
    if mu == 0.0 {
        return Ok(linalg::norm2(&g));
    }
    let coeffs = problem.frame.analysis(f_hat)?;
    let active_floor = 10.0 * tol;
    let fixed: Vec<Option<f64>> = coeffs
        .iter()
        .map(|&c| (c.abs() > active_floor).then(|| c.signum()))
        .collect();
    let project = |v: &mut [f64]| {
        for (vi, fi) in v.iter_mut().zip(&fixed) {
            *vi = match fi {
                Some(s) => *s,
                None => vi.clamp(-1.0, 1.0),
            };
        }
    };
    // Since DDᵀ = I, v = −Dᵀg/μ makes the residual vanish when admissible.
    let mut v = linalg::scale(&problem.frame.analysis(&g)?, -1.0 / mu);
    project(&mut v);
    let residual = |v: &[f64]| -> Result<Vec<f64>> {
        let dv = problem.frame.synthesis(v)?;
        Ok(g.iter().zip(&dv).map(|(a, b)| a + mu * b).collect())
    };
    let mut best = linalg::norm2(&residual(&v)?);
    // ‖μD‖² ≤ μ² for a tight frame.
    let step = 1.0 / (mu * mu);
    for _ in 0..STATIONARITY_ITERS {
        let r = residual(&v)?;
        let grad = linalg::scale(&problem.frame.analysis(&r)?, mu);
        for (vi, gi) in v.iter_mut().zip(&grad) {
            *vi -= step * gi;
        }
        project(&mut v);
        best = best.min(linalg::norm2(&residual(&v)?));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{FrameKind, TightFrame};
    use crate::linalg::DenseMatrix;
    use crate::solvers::recover::{solve_ads, solve_alasso, Engine};

    fn scalar_problem(method: Method) -> RecoveryProblem {
        let one = TightFrame::build(FrameKind::Identity, 1, 1, 0).unwrap();
        RecoveryProblem::new(DenseMatrix::identity(1), one, vec![3.0], method).unwrap()
    }

    fn outcome(f: Vec<f64>) -> SolverOutcome {
        SolverOutcome {
            f_hat: f,
            e_hat: None,
            iterations: 0,
            objective: 0.0,
            duality_gap: 0.0,
            feasibility_margin: 0.0,
            converged: true,
            primal_residual: 0.0,
            dual_residual: 0.0,
            engine: Engine::Admm,
        }
    }

    #[test]
    fn scalar_alasso_stationarity_is_zero() {
        let p = scalar_problem(Method::Alasso { mu: 1.0 });
        let r = verify_outcome(&p, &outcome(vec![2.0]), None, None, &SolverConfig::default()).unwrap();
        assert!(r.stationarity_residual.unwrap() < 1e-15);
        assert!(r.feasible);
        let solved = solve_alasso(&p, &SolverConfig::default()).unwrap();
        let r = verify_outcome(&p, &solved, None, None, &SolverConfig::default()).unwrap();
        assert!(r.stationarity_residual.unwrap() < 1e-7);
    }

    #[test]
    fn exact_solution_passes_with_zero_h() {
        let p = scalar_problem(Method::Ads { lambda: 0.0 });
        let r = verify_outcome(&p, &outcome(vec![3.0]), Some(&[3.0]), None, &SolverConfig::default()).unwrap();
        let cone = r.cone.unwrap();
        assert_eq!(cone.lhs, 0.0);
        assert!(cone.holds && r.all_pass());
    }

    #[test]
    fn ads_margin_is_definitional() {
        let p = scalar_problem(Method::Ads { lambda: 0.5 });
        let out = solve_ads(&p, &SolverConfig::default()).unwrap();
        let r = verify_outcome(&p, &out, None, None, &SolverConfig::default()).unwrap();
        let direct = 0.5 - (out.f_hat[0] - 3.0).abs();
        assert!((r.feasibility_margin - direct).abs() < 1e-15);
        assert!((out.feasibility_margin - direct).abs() < 1e-15);
    }

    #[test]
    fn top_support_ties() {
        assert_eq!(top_support(&[1.0, -3.0, 3.0, 0.5], 2), vec![1, 2]);
        assert_eq!(top_support(&[1.0, 1.0, 1.0], 1), vec![0]);
    }
}
