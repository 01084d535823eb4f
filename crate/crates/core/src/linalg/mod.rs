//! Dense linear algebra kernels and the linear-operator abstraction.

mod cholesky;
mod eig;
mod linop;
mod matrix;
pub mod mtx;

pub use cholesky::{cholesky_solve, Cholesky};
pub use eig::{generalized_sym_eig, sym_eig, SymEig, DEFAULT_NULL_TOL, SYMMETRY_TOL};
pub use linop::{adjoint_mismatch, power_iteration_norm, ApplyMode, LinOp};
pub use matrix::{
    add, axpy, count_nonzero, dot, ensure_finite, norm1, norm2, norm_inf, scale, sub, DenseMatrix,
};
pub(crate) use matrix::check_len;
