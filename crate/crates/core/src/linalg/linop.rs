use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::matrix::{check_len, dot, norm2, DenseMatrix};
use crate::error::Result;
use crate::rng;

/// Which map to apply: `L` or `Lᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplyMode {
    Forward,
    Adjoint,
}

/// A real linear operator with forward and adjoint application.
///
/// Operators are cheap to clone; dense storage is shared.
#[derive(Clone, Debug)]
pub enum LinOp {
    Dense(Arc<DenseMatrix>),
    /// `scale · I` on `dim`-vectors.
    ScaledIdentity { dim: usize, scale: f64 },
    /// `outer ∘ inner`.
    Compose(Box<LinOp>, Box<LinOp>),
    /// `[L₁, L₂, …]`: input split into consecutive chunks, outputs summed.
    HConcat(Vec<LinOp>),
    /// `blockdiag(L₁, L₂, …)`.
    BlockDiag(Vec<LinOp>),
    /// `Lᵀ`.
    Adjoint(Box<LinOp>),
}

impl From<DenseMatrix> for LinOp {
    fn from(m: DenseMatrix) -> Self {
        LinOp::Dense(Arc::new(m))
    }
}

impl From<Arc<DenseMatrix>> for LinOp {
    fn from(m: Arc<DenseMatrix>) -> Self {
        LinOp::Dense(m)
    }
}

impl LinOp {
    pub fn identity(dim: usize) -> Self {
        LinOp::ScaledIdentity { dim, scale: 1.0 }
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        LinOp::ScaledIdentity { dim, scale }
    }

    /// `outer ∘ inner`; the inner output must feed the outer input.
    pub fn compose(outer: LinOp, inner: LinOp) -> Result<Self> {
        check_len("LinOp::compose", outer.input_dim(), inner.output_dim())?;
        Ok(LinOp::Compose(Box::new(outer), Box::new(inner)))
    }

    /// Composes a chain applied right to left: `ops[0] ∘ ops[1] ∘ … ∘ ops[k]`.
    pub fn chain(ops: Vec<LinOp>) -> Result<Self> {
        let mut iter = ops.into_iter().rev();
        let mut acc = iter
            .next()
            .ok_or_else(|| crate::Error::invalid("LinOp::chain needs at least one operator"))?;
        for outer in iter {
            acc = LinOp::compose(outer, acc)?;
        }
        Ok(acc)
    }

    pub fn hconcat(ops: Vec<LinOp>) -> Result<Self> {
        let rows = ops
            .first()
            .ok_or_else(|| crate::Error::invalid("LinOp::hconcat needs at least one block"))?
            .output_dim();
        for op in &ops {
            check_len("LinOp::hconcat block rows", rows, op.output_dim())?;
        }
        Ok(LinOp::HConcat(ops))
    }

    /// Stacks blocks vertically, built as the adjoint of the horizontal
    /// concatenation of adjoints.
    pub fn vstack(ops: Vec<LinOp>) -> Result<Self> {
        let adjoints = ops.into_iter().map(LinOp::adjoint).collect();
        Ok(LinOp::hconcat(adjoints)?.adjoint())
    }

    pub fn block_diag(ops: Vec<LinOp>) -> Result<Self> {
        if ops.is_empty() {
            return Err(crate::Error::invalid("LinOp::block_diag needs at least one block"));
        }
        Ok(LinOp::BlockDiag(ops))
    }

    pub fn adjoint(self) -> Self {
        match self {
            LinOp::Adjoint(inner) => *inner,
            LinOp::ScaledIdentity { .. } => self,
            other => LinOp::Adjoint(Box::new(other)),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            LinOp::Dense(m) => m.cols(),
            LinOp::ScaledIdentity { dim, .. } => *dim,
            LinOp::Compose(_, inner) => inner.input_dim(),
            LinOp::HConcat(ops) | LinOp::BlockDiag(ops) => ops.iter().map(LinOp::input_dim).sum(),
            LinOp::Adjoint(inner) => inner.output_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            LinOp::Dense(m) => m.rows(),
            LinOp::ScaledIdentity { dim, .. } => *dim,
            LinOp::Compose(outer, _) => outer.output_dim(),
            LinOp::HConcat(ops) => ops[0].output_dim(),
            LinOp::BlockDiag(ops) => ops.iter().map(LinOp::output_dim).sum(),
            LinOp::Adjoint(inner) => inner.input_dim(),
        }
    }

    pub fn apply(&self, v: &[f64], mode: ApplyMode) -> Result<Vec<f64>> {
        let expected = match mode {
            ApplyMode::Forward => self.input_dim(),
            ApplyMode::Adjoint => self.output_dim(),
        };
        check_len("LinOp::apply input", expected, v.len())?;
        Ok(match mode {
            ApplyMode::Forward => self.fwd(v),
            ApplyMode::Adjoint => self.adj(v),
        })
    }

    pub fn forward(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.apply(v, ApplyMode::Forward)
    }

    pub fn adjoint_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.apply(v, ApplyMode::Adjoint)
    }

    /// Forward application without the dimension check. Callers guarantee `v.len() == input_dim()`.
    pub(crate) fn fwd(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.input_dim());
        match self {
            LinOp::Dense(m) => m.matvec_unchecked(v),
            LinOp::ScaledIdentity { scale, .. } => v.iter().map(|x| scale * x).collect(),
            LinOp::Compose(outer, inner) => outer.fwd(&inner.fwd(v)),
            LinOp::HConcat(ops) => {
                let mut out = vec![0.0; ops[0].output_dim()];
                let mut offset = 0;
                for op in ops {
                    let k = op.input_dim();
                    let part = op.fwd(&v[offset..offset + k]);
                    for (o, p) in out.iter_mut().zip(part) {
                        *o += p;
                    }
                    offset += k;
                }
                out
            }
            LinOp::BlockDiag(ops) => {
                let mut out = Vec::with_capacity(self.output_dim());
                let mut offset = 0;
                for op in ops {
                    let k = op.input_dim();
                    out.extend(op.fwd(&v[offset..offset + k]));
                    offset += k;
                }
                out
            }
            LinOp::Adjoint(inner) => inner.adj(v),
        }
    }

    /// Adjoint application without the dimension check.
    pub(crate) fn adj(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.output_dim());
        match self {
            LinOp::Dense(m) => m.matvec_transpose_unchecked(w),
            LinOp::ScaledIdentity { scale, .. } => w.iter().map(|x| scale * x).collect(),
            LinOp::Compose(outer, inner) => inner.adj(&outer.adj(w)),
            LinOp::HConcat(ops) => {
                let mut out = Vec::with_capacity(self.input_dim());
                for op in ops {
                    out.extend(op.adj(w));
                }
                out
            }
            LinOp::BlockDiag(ops) => {
                let mut out = Vec::with_capacity(self.input_dim());
                let mut offset = 0;
                for op in ops {
                    let k = op.output_dim();
                    out.extend(op.adj(&w[offset..offset + k]));
                    offset += k;
                }
                out
            }
            LinOp::Adjoint(inner) => inner.fwd(w),
        }
    }

    /// Materializes the operator column by column.
    pub fn to_dense(&self) -> DenseMatrix {
        if let LinOp::Dense(m) = self {
            return (**m).clone();
        }
        let (rows, cols) = (self.output_dim(), self.input_dim());
        let mut out = DenseMatrix::zeros(rows, cols);
        let mut e = vec![0.0; cols];
        for j in 0..cols {
            e[j] = 1.0;
            let col = self.fwd(&e);
            for (i, v) in col.into_iter().enumerate() {
                out.set(i, j, v);
            }
            e[j] = 0.0;
        }
        out
    }
}

/// Largest singular value estimated by power iteration on `LᵀL` from a seeded start.
///
/// The sequence of estimates is nondecreasing in `iters` for a fixed start;
/// a zero operator yields 0.
pub fn power_iteration_norm(op: &LinOp, iters: usize, seed: u64) -> Result<f64> {
    if iters == 0 {
        return Err(crate::Error::invalid("power iteration needs iters >= 1"));
    }
    let n = op.input_dim();
    if n == 0 || op.output_dim() == 0 {
        return Ok(0.0);
    }
    let mut x = rng::unit_vector(&mut rng::rng_from_seed(seed), n);
    let mut best: f64 = 0.0;
    for _ in 0..iters {
        let y = op.adj(&op.fwd(&x));
        let growth = norm2(&y);
        if growth == 0.0 || !growth.is_finite() {
            break;
        }
        best = best.max(growth);
        x = y.into_iter().map(|v| v / growth).collect();
    }
    Ok(best.sqrt())
}

/// `|⟨Lx, w⟩ − ⟨x, Lᵀw⟩|` relative to `‖Lx‖‖w‖ + ‖x‖‖Lᵀw‖`.
pub fn adjoint_mismatch(op: &LinOp, x: &[f64], w: &[f64]) -> Result<f64> {
    let lx = op.forward(x)?;
    let ltw = op.adjoint_apply(w)?;
    let lhs = dot(&lx, w);
    let rhs = dot(x, &ltw);
    let scale = norm2(&lx) * norm2(w) + norm2(x) * norm2(&ltw);
    Ok(if scale == 0.0 {
        (lhs - rhs).abs()
    } else {
        (lhs - rhs).abs() / scale
    })
}
