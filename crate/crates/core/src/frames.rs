//! Tight frames `D` (n×d, `DDᵀ = I`) and their analysis/synthesis maps.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, mtx, sym_eig, DenseMatrix, LinOp};
use crate::rng::{gaussian_vec, rng_from_seed, substream, SeededRng};

/// Maximum admissible `‖DDᵀ − I‖_F`.
pub const TIGHTNESS_TOL: f64 = 1e-10;

const PARSEVAL_EIG_FLOOR: f64 = 1e-12;
const PARSEVAL_MAX_REDRAWS: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Identity,
    RandomOnb,
    UnionOfOnb,
    RandomParseval,
    FromFile,
    /// Block-diagonal combination of two frames.
    BlockDiagonal,
}

impl FrameKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "identity" => Ok(FrameKind::Identity),
            "random_onb" => Ok(FrameKind::RandomOnb),
            "union_of_onb" => Ok(FrameKind::UnionOfOnb),
            "random_parseval" => Ok(FrameKind::RandomParseval),
            "from_file" => Ok(FrameKind::FromFile),
            other => Err(Error::invalid(format!(
                "unknown frame kind {other:?}; expected identity, random_onb, union_of_onb, random_parseval or from_file"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameDirection {
    /// `f ↦ Dᵀf`.
    Analysis,
    /// `x ↦ Dx`.
    Synthesis,
}

/// A validated tight frame.
#[derive(Clone, Debug)]
pub struct TightFrame {
    matrix: Arc<DenseMatrix>,
    kind: FrameKind,
    residual: f64,
}

/// `‖DDᵀ − I_n‖_F`.
pub fn verify_tight(d: &DenseMatrix) -> f64 {
    let gram = d.outer_gram();
    let n = gram.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            acc += (gram.get(i, j) - target).powi(2);
        }
    }
    acc.sqrt()
}

impl TightFrame {
    /// Builds a frame of the given kind. `FromFile` must go through [`TightFrame::from_file`].
    pub fn build(kind: FrameKind, n: usize, d: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("frame needs n >= 1"));
        }
        if d < n {
            return Err(Error::invalid(format!("frame needs d >= n, got n = {n}, d = {d}")));
        }
        let matrix = match kind {
            FrameKind::Identity => {
                require_square(kind, n, d)?;
                DenseMatrix::identity(n)
            }
            FrameKind::RandomOnb => {
                require_square(kind, n, d)?;
                random_orthogonal(&mut rng_from_seed(seed), n)
            }
            FrameKind::UnionOfOnb => {
                if d % n != 0 || d / n < 2 {
                    return Err(Error::invalid(format!(
                        "union_of_onb needs d = k·n with k >= 2, got n = {n}, d = {d}"
                    )));
                }
                let k = d / n;
                let mut rng = rng_from_seed(seed);
                let scale = 1.0 / (k as f64).sqrt();
                let mut acc = random_orthogonal(&mut rng, n).scaled(scale);
                for _ in 1..k {
                    acc = acc.hconcat(&random_orthogonal(&mut rng, n).scaled(scale))?;
                }
                acc
            }
            FrameKind::RandomParseval => random_parseval(n, d, seed)?,
            FrameKind::FromFile => {
                return Err(Error::invalid("from_file frames are loaded with TightFrame::from_file"))
            }
            FrameKind::BlockDiagonal => {
                return Err(Error::invalid("block-diagonal frames are built with TightFrame::block_diag"))
            }
        };
        Self::with_kind(matrix, kind)
    }

    /// Validates an arbitrary matrix as a tight frame.
    pub fn from_matrix(matrix: DenseMatrix) -> Result<Self> {
        Self::with_kind(matrix, FrameKind::FromFile)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_matrix(mtx::read_matrix(path)?)
    }

    fn with_kind(matrix: DenseMatrix, kind: FrameKind) -> Result<Self> {
        if matrix.cols() < matrix.rows() || matrix.rows() == 0 {
            return Err(Error::invalid(format!(
                "frame needs d >= n >= 1, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let residual = verify_tight(&matrix);
        if !(residual <= TIGHTNESS_TOL) {
            return Err(Error::NotTight { residual, tol: TIGHTNESS_TOL });
        }
        Ok(TightFrame { matrix: Arc::new(matrix), kind, residual })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let comment = format!("tight frame ({:?}), residual {:e}", self.kind, self.residual);
        mtx::write_matrix(path, &self.matrix, Some(&comment))
    }

    /// Ambient dimension `n`.
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of frame vectors `d`.
    pub fn d(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// True when `d = n`, so `D` is orthogonal and `DᵀD = I` as well.
    pub fn is_orthonormal(&self) -> bool {
        self.n() == self.d()
    }

    /// The synthesis operator `D` as a [`LinOp`].
    pub fn synthesis_op(&self) -> LinOp {
        LinOp::Dense(Arc::clone(&self.matrix))
    }

    /// The analysis operator `Dᵀ` as a [`LinOp`].
    pub fn analysis_op(&self) -> LinOp {
        self.synthesis_op().adjoint()
    }

    pub fn apply(&self, v: &[f64], direction: FrameDirection) -> Result<Vec<f64>> {
        match direction {
            FrameDirection::Analysis => self.matrix.matvec_transpose(v),
            FrameDirection::Synthesis => self.matrix.matvec(v),
        }
    }

    pub fn analysis(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.apply(f, FrameDirection::Analysis)
    }

    pub fn synthesis(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply(x, FrameDirection::Synthesis)
    }

    /// `‖DᵀD‖₁,₁`, the maximum absolute column sum of `DᵀD`.
    pub fn norm_11(&self) -> f64 {
        let g = self.matrix.gram();
        (0..g.cols())
            .map(|j| (0..g.rows()).map(|i| g.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `W = blockdiag(D, Ω)`.
    pub fn block_diag(&self, other: &TightFrame) -> Result<TightFrame> {
        Self::with_kind(self.matrix.block_diag(&other.matrix), FrameKind::BlockDiagonal)
    }
}

fn require_square(kind: FrameKind, n: usize, d: usize) -> Result<()> {
    if n != d {
        return Err(Error::invalid(format!("{kind:?} frame needs d = n, got n = {n}, d = {d}")));
    }
    Ok(())
}

/// Haar-distributed orthogonal matrix: Gram–Schmidt (with one
/// reorthogonalization pass) on the columns of a Gaussian matrix.
pub(crate) fn random_orthogonal(rng: &mut SeededRng, n: usize) -> DenseMatrix {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut ok = true;
        for _ in 0..n {
            let mut v = gaussian_vec(rng, n, 1.0);
            let original = linalg::norm2(&v);
            for _ in 0..2 {
                for q in &cols {
                    let c = linalg::dot(q, &v);
                    linalg::axpy(-c, q, &mut v);
                }
            }
            let norm = linalg::norm2(&v);
            if norm <= 1e-8 * original {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
        if ok {
            return DenseMatrix::from_columns(n, &cols);
        }
    }
}

/// `(GGᵀ)^{-1/2} G` for Gaussian `G`, redrawn while `GGᵀ` is near singular.
fn random_parseval(n: usize, d: usize, seed: u64) -> Result<DenseMatrix> {
    for attempt in 0..PARSEVAL_MAX_REDRAWS {
        let mut rng = if attempt == 0 {
            rng_from_seed(seed)
        } else {
            substream(seed, attempt)
        };
        let g = DenseMatrix::new(n, d, gaussian_vec(&mut rng, n * d, 1.0))?;
        let eig = sym_eig(&g.outer_gram())?;
        if eig.min() <= PARSEVAL_EIG_FLOOR * eig.max() {
            continue;
        }
        let v = &eig.vectors;
        let inv_sqrt = DenseMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v.get(i, k) * v.get(j, k) / eig.values[k].sqrt())
                .sum()
        });
        return inv_sqrt.matmul(&g);
    }
    Err(Error::invalid("random_parseval: Gaussian draws kept degenerating"))
}

/// Serializable description of a frame inside experiment plans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub kind: FrameKind,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl FrameSpec {
    pub fn build(&self, seed: u64) -> Result<TightFrame> {
        match self.kind {
            FrameKind::FromFile => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::invalid("from_file frame spec needs a path"))?;
                TightFrame::from_file(path)
            }
            kind => TightFrame::build(kind, self.n, self.d, seed),
        }
    }
}
