//! Proximal maps, the PDHG and ADMM engines, and the recovery front-ends.

mod admm;
mod config;
mod pdhg;
mod prox;
mod recover;
mod verify;

pub use admm::{admm_lasso, AdmmOutput};
pub use config::{SolverConfig, StepRule};
pub use pdhg::{pdhg_solve, Block, PdhgOutput, Term};
pub use prox::{ball_violation, project_ball, prox_l1, BallKind};
pub use recover::{
    solve, solve_abp, solve_ads, solve_alasso, solve_alasso_pdhg, solve_separation, Engine, Method,
    RecoveryProblem, Separation, SeparationVariant, SolverOutcome,
};
pub use verify::{top_support, verify_outcome, Inequality, VerificationReport};
