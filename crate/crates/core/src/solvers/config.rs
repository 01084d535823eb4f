use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primal-dual step sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `τ = σ = 0.99 / (1.01·‖K‖)` with `‖K‖` from power iteration.
    Auto,
    Fixed { tau: f64, sigma: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub tol_gap: f64,
    pub pdhg_steps: StepRule,
    /// Rescale each operator block to unit norm before iterating.
    pub pdhg_block_scaling: bool,
    /// Adaptive restarts of PDHG to the averaged iterate.
    pub pdhg_restarts: bool,
    /// Rebalance `σ/τ` at restarts, keeping `τσ` fixed.
    pub pdhg_primal_weight: bool,
    pub admm_rho: f64,
    /// Residual balancing: every 10 iterations, double or halve `ρ` when one
    /// ADMM residual exceeds ten times the other.
    pub admm_adaptive_rho: bool,
    pub norm_k_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 20_000,
            tol_primal: 1e-9,
            tol_dual: 1e-9,
            tol_gap: 1e-8,
            pdhg_steps: StepRule::Auto,
            pdhg_block_scaling: true,
            pdhg_restarts: true,
            pdhg_primal_weight: true,
            admm_rho: 1.0,
            admm_adaptive_rho: true,
            norm_k_iters: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be >= 1"));
        }
        for (name, v) in [
            ("tol_primal", self.tol_primal),
            ("tol_dual", self.tol_dual),
            ("tol_gap", self.tol_gap),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.admm_rho > 0.0 && self.admm_rho.is_finite()) {
            return Err(Error::invalid(format!("admm_rho must be > 0, got {}", self.admm_rho)));
        }
        if self.norm_k_iters == 0 {
            return Err(Error::invalid("norm_k_iters must be >= 1"));
        }
        if let StepRule::Fixed { tau, sigma } = self.pdhg_steps {
            if !(tau > 0.0 && sigma > 0.0 && tau.is_finite() && sigma.is_finite()) {
                return Err(Error::invalid(format!("step sizes must be positive, got tau = {tau}, sigma = {sigma}")));
            }
        }
        Ok(())
    }

    /// Same config with all three tolerances set to `tol`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol_primal = tol;
        self.tol_dual = tol;
        self.tol_gap = tol;
        self
    }
}
