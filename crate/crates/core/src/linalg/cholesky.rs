use super::eig::SYMMETRY_TOL;
use super::matrix::{check_len, DenseMatrix};
use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `G = L Lᵀ`, reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    /// Row-major lower triangle; the upper part is zero.
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(g: &DenseMatrix) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::DimensionMismatch {
                context: "cholesky square input",
                expected: g.rows(),
                got: g.cols(),
            });
        }
        g.ensure_symmetric(SYMMETRY_TOL)?;
        let n = g.rows();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = g.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: j, value: diag });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut acc = g.get(i, j);
                for k in 0..j {
                    acc -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = acc / ljj;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("cholesky solve rhs", self.n, b.len())?;
        Ok(self.solve_unchecked(b))
    }

    pub(crate) fn solve_unchecked(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let l = &self.l;
        let mut x = b.to_vec();
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            let acc: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - acc) / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in (i + 1)..n {
                acc -= l[k * n + i] * x[k];
            }
            x[i] = acc / l[i * n + i];
        }
        x
    }
}

/// One-shot `G x = b` for symmetric positive definite `G`.
pub fn cholesky_solve(g: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Cholesky::factor(g)?.solve(b)
}
