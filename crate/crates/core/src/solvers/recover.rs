use serde::{Deserialize, Serialize};

use super::admm::admm_lasso;
use super::config::SolverConfig;
use super::pdhg::{pdhg_solve, Block, PdhgOutput, Term};
use super::prox::BallKind;
use crate::error::{Error, Result};
use crate::frames::TightFrame;
use crate::linalg::{self, check_len, DenseMatrix, LinOp};

/// The convex program and its parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// `min ‖Dᵀf‖₁` s.t. `‖Af − y‖₂ ≤ ε`.
    Abp { epsilon: f64 },
    /// `min ‖Dᵀf‖₁` s.t. `‖DᵀAᵀ(Af − y)‖∞ ≤ λ`.
    Ads { lambda: f64 },
    /// `min ½‖Af − y‖₂² + μ‖Dᵀf‖₁`.
    Alasso { mu: f64 },
}

impl Method {
    pub fn parameter(&self) -> f64 {
        match *self {
            Method::Abp { epsilon } => epsilon,
            Method::Ads { lambda } => lambda,
            Method::Alasso { mu } => mu,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Abp { .. } => "abp",
            Method::Ads { .. } => "ads",
            Method::Alasso { .. } => "alasso",
        }
    }
}

/// Sparse-noise model: `y = Af + z + e` with `Ωᵀe` sparse.
#[derive(Clone, Debug)]
pub struct Separation {
    pub omega: TightFrame,
    pub s_prime: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationVariant {
    Sabp,
    Sads,
    Salasso,
}

impl SeparationVariant {
    pub fn matches(&self, method: &Method) -> bool {
        matches!(
            (self, method),
            (SeparationVariant::Sabp, Method::Abp { .. })
                | (SeparationVariant::Sads, Method::Ads { .. })
                | (SeparationVariant::Salasso, Method::Alasso { .. })
        )
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryProblem {
    /// `A`, of size `m × n`.
    pub sensing: LinOp,
    /// `D`, of size `n × d`.
    pub frame: TightFrame,
    pub y: Vec<f64>,
    pub method: Method,
    pub separation: Option<Separation>,
}

impl RecoveryProblem {
    pub fn new(sensing: impl Into<LinOp>, frame: TightFrame, y: Vec<f64>, method: Method) -> Result<Self> {
        let sensing = sensing.into();
        check_len("measurements vs sensing rows", sensing.output_dim(), y.len())?;
        check_len("sensing columns vs frame rows", frame.n(), sensing.input_dim())?;
        linalg::ensure_finite(&y)?;
        let p = method.parameter();
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::invalid(format!("{} parameter must be finite and >= 0, got {p}", method.name())));
        }
        Ok(RecoveryProblem { sensing, frame, y, method, separation: None })
    }

    pub fn with_separation(mut self, omega: TightFrame, s_prime: usize) -> Result<Self> {
        check_len("Omega rows vs measurements", self.y.len(), omega.n())?;
        if s_prime > omega.d() {
            return Err(Error::invalid(format!("s' = {s_prime} exceeds the {} columns of Omega", omega.d())));
        }
        self.separation = Some(Separation { omega, s_prime });
        Ok(self)
    }

    /// `Φ = [A, I]` and `W = blockdiag(D, Ω)` as a plain problem over `u = [f; e]`.
    pub fn augmented(&self) -> Result<RecoveryProblem> {
        let sep = self
            .separation
            .as_ref()
            .ok_or_else(|| Error::invalid("problem has no separation data"))?;
        let m = self.y.len();
        let phi = LinOp::hconcat(vec![self.sensing.clone(), LinOp::identity(m)])?;
        let w = self.frame.block_diag(&sep.omega)?;
        RecoveryProblem::new(phi, w, self.y.clone(), self.method)
    }

    fn dense_sensing(&self) -> DenseMatrix {
        self.sensing.to_dense()
    }

    fn require_plain(&self, expected: &str) -> Result<()> {
        if self.separation.is_some() {
            return Err(Error::invalid(format!(
                "problem carries separation data; use solve_separation instead of {expected}"
            )));
        }
        Ok(())
    }

    /// `Aᵀ(Af − y)` mapped by `Dᵀ`.
    pub fn correlation(&self, f: &[f64]) -> Result<Vec<f64>> {
        let resid = linalg::sub(&self.sensing.forward(f)?, &self.y);
        self.frame.analysis(&self.sensing.adjoint_apply(&resid)?)
    }

    /// Method objective at `f`.
    pub fn objective(&self, f: &[f64]) -> Result<f64> {
        let l1 = linalg::norm1(&self.frame.analysis(f)?);
        Ok(match self.method {
            Method::Abp { .. } | Method::Ads { .. } => l1,
            Method::Alasso { mu } => {
                let r = linalg::sub(&self.sensing.forward(f)?, &self.y);
                0.5 * linalg::dot(&r, &r) + mu * l1
            }
        })
    }

    /// Signed slack of the method's constraint at `f` (negative means violated).
    ///
    /// ALASSO has no constraint; its margin is `μ‖DᵀD‖₁,₁ − ‖DᵀAᵀ(Af − y)‖∞`,
    /// which is nonnegative at every minimizer.
    pub fn feasibility_margin(&self, f: &[f64]) -> Result<f64> {
        Ok(match self.method {
            Method::Ads { lambda } => lambda - linalg::norm_inf(&self.correlation(f)?),
            Method::Abp { epsilon } => {
                epsilon - linalg::norm2(&linalg::sub(&self.sensing.forward(f)?, &self.y))
            }
            Method::Alasso { mu } => mu * self.frame.norm_11() - linalg::norm_inf(&self.correlation(f)?),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Pdhg,
    Admm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub f_hat: Vec<f64>,
    /// Sparse-noise estimate for separation problems.
    pub e_hat: Option<Vec<f64>>,
    pub iterations: usize,
    pub objective: f64,
    /// Relative duality gap at the returned iterate.
    pub duality_gap: f64,
    pub feasibility_margin: f64,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub engine: Engine,
}

fn from_pdhg(problem: &RecoveryProblem, out: PdhgOutput) -> Result<SolverOutcome> {
    Ok(SolverOutcome {
        objective: problem.objective(&out.x)?,
        feasibility_margin: problem.feasibility_margin(&out.x)?,
        f_hat: out.x,
        e_hat: None,
        iterations: out.iterations,
        duality_gap: out.gap_rel,
        converged: out.converged,
        primal_residual: out.primal_residual.max(out.violation),
        dual_residual: out.dual_residual,
        engine: Engine::Pdhg,
    })
}

fn analysis_block(frame: &TightFrame, weight: f64) -> Block {
    Block {
        op: LinOp::from(frame.matrix().transpose()),
        term: Term::L1 { weight },
    }
}

/// Analysis Dantzig selector by PDHG over `K = [Dᵀ; DᵀAᵀA]`.
pub fn solve_ads(problem: &RecoveryProblem, config: &SolverConfig) -> Result<SolverOutcome> {
    problem.require_plain("solve_ads")?;
    let Method::Ads { lambda } = problem.method else {
        return Err(Error::invalid(format!("solve_ads needs method ads, got {}", problem.method.name())));
    };
    let a = problem.dense_sensing();
    let dt = problem.frame.matrix().transpose();
    let correlation = dt.matmul(&a.gram())?;
    let center = dt.matvec(&a.matvec_transpose(&problem.y)?)?;
    let blocks = [
        analysis_block(&problem.frame, 1.0),
        Block {
            op: LinOp::from(correlation),
            term: Term::Ball { kind: BallKind::Linf, center, radius: lambda },
        },
    ];
    from_pdhg(problem, pdhg_solve(&blocks, config)?)
}

/// Analysis basis pursuit by PDHG over `K = [Dᵀ; A]`.
pub fn solve_abp(problem: &RecoveryProblem, config: &SolverConfig) -> Result<SolverOutcome> {
    problem.require_plain("solve_abp")?;
    let Method::Abp { epsilon } = problem.method else {
        return Err(Error::invalid(format!("solve_abp needs method abp, got {}", problem.method.name())));
    };
    let blocks = [
        analysis_block(&problem.frame, 1.0),
        Block {
            op: LinOp::from(problem.dense_sensing()),
            term: Term::Ball { kind: BallKind::L2, center: problem.y.clone(), radius: epsilon },
        },
    ];
    from_pdhg(problem, pdhg_solve(&blocks, config)?)
}

/// Analysis LASSO by ADMM with the cached `AᵀA + ρI` factorization.
pub fn solve_alasso(problem: &RecoveryProblem, config: &SolverConfig) -> Result<SolverOutcome> {
    problem.require_plain("solve_alasso")?;
    let Method::Alasso { mu } = problem.method else {
        return Err(Error::invalid(format!("solve_alasso needs method alasso, got {}", problem.method.name())));
    };
    let a = problem.dense_sensing();
    let out = admm_lasso(&a, problem.frame.matrix(), &problem.y, mu, config)?;
    Ok(SolverOutcome {
        objective: out.objective,
        feasibility_margin: problem.feasibility_margin(&out.f)?,
        f_hat: out.f,
        e_hat: None,
        iterations: out.iterations,
        duality_gap: out.gap_rel,
        converged: out.converged,
        primal_residual: out.primal_residual,
        dual_residual: out.dual_residual,
        engine: Engine::Admm,
    })
}

/// Analysis LASSO by PDHG over `K = [Dᵀ; A]`, for cross-checking the ADMM engine.
pub fn solve_alasso_pdhg(problem: &RecoveryProblem, config: &SolverConfig) -> Result<SolverOutcome> {
    problem.require_plain("solve_alasso_pdhg")?;
    let Method::Alasso { mu } = problem.method else {
        return Err(Error::invalid(format!("solve_alasso_pdhg needs method alasso, got {}", problem.method.name())));
    };
    let blocks = [
        analysis_block(&problem.frame, mu),
        Block {
            op: LinOp::from(problem.dense_sensing()),
            term: Term::SquaredL2 { center: problem.y.clone(), weight: 1.0 },
        },
    ];
    from_pdhg(problem, pdhg_solve(&blocks, config)?)
}

/// Joint recovery of `f` and sparse noise `e` through `Φ = [A, I]`, `W = blockdiag(D, Ω)`.
pub fn solve_separation(
    problem: &RecoveryProblem,
    variant: SeparationVariant,
    config: &SolverConfig,
) -> Result<SolverOutcome> {
    if !variant.matches(&problem.method) {
        return Err(Error::invalid(format!(
            "variant {variant:?} does not match method {}",
            problem.method.name()
        )));
    }
    let augmented = problem.augmented()?;
    let mut out = match variant {
        SeparationVariant::Sabp => solve_abp(&augmented, config)?,
        SeparationVariant::Sads => solve_ads(&augmented, config)?,
        SeparationVariant::Salasso => solve_alasso(&augmented, config)?,
    };
    let n = problem.frame.n();
    let e = out.f_hat.split_off(n);
    out.e_hat = Some(e);
    Ok(out)
}

/// Dispatches on the method and the presence of separation data.
pub fn solve(problem: &RecoveryProblem, config: &SolverConfig) -> Result<SolverOutcome> {
    if problem.separation.is_some() {
        let variant = match problem.method {
            Method::Abp { .. } => SeparationVariant::Sabp,
            Method::Ads { .. } => SeparationVariant::Sads,
            Method::Alasso { .. } => SeparationVariant::Salasso,
        };
        return solve_separation(problem, variant, config);
    }
    match problem.method {
        Method::Abp { .. } => solve_abp(problem, config),
        Method::Ads { .. } => solve_ads(problem, config),
        Method::Alasso { .. } => solve_alasso(problem, config),
    }
}
