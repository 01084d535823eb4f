use super::matrix::{check_len, DenseMatrix};
use crate::error::{Error, Result};

/// Symmetry tolerance (relative) for eigen inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default relative null-space tolerance for [`generalized_sym_eig`].
pub const DEFAULT_NULL_TOL: f64 = 1e-10;

const SWEEP_THRESHOLD: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `S = V diag(values) Vᵀ`.
#[derive(Clone, Debug)]
pub struct SymEig {
    /// Sorted in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, ordered like `values`.
    pub vectors: DenseMatrix,
}

impl SymEig {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Cyclic Jacobi eigensolver for small symmetric matrices.
///
/// Sweeps stop once the off-diagonal Frobenius mass drops below
/// `1e-14 · ‖S‖_F`.
pub fn sym_eig(s: &DenseMatrix) -> Result<SymEig> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            context: "sym_eig square input",
            expected: s.rows(),
            got: s.cols(),
        });
    }
    s.ensure_symmetric(SYMMETRY_TOL)?;
    let n = s.rows();
    let mut a = s.clone();
    a.mirror_upper();
    let mut v = DenseMatrix::identity(n);
    let scale = s.frobenius_norm();
    if n == 0 {
        return Ok(SymEig { values: vec![], vectors: v });
    }
    let target = SWEEP_THRESHOLD * scale;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(SymEig { values, vectors })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a.get(i, j).powi(2);
            }
        }
    }
    acc.sqrt()
}

/// Applies the Jacobi rotation zeroing `a[p][q]`, accumulating into `v`.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let apq = a.get(p, q);
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        a.set(k, p, new_p);
        a.set(p, k, new_p);
        a.set(k, q, new_q);
        a.set(q, k, new_q);
    }
    a.set(p, p, c * c * app - 2.0 * s * c * apq + s * s * aqq);
    a.set(q, q, s * s * app + 2.0 * s * c * apq + c * c * aqq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

/// Eigenvalues of the pencil `(Sa, Sb)` restricted to `range(Sb)`, descending.
///
/// `Sb` is whitened through its own eigendecomposition; directions whose
/// eigenvalue is at most `null_tol · λ_max(Sb)` are discarded. A numerically
/// zero `Sb` yields an empty result.
pub fn generalized_sym_eig(sa: &DenseMatrix, sb: &DenseMatrix, null_tol: f64) -> Result<Vec<f64>> {
    check_len("generalized_sym_eig rows", sa.rows(), sb.rows())?;
    check_len("generalized_sym_eig cols", sa.cols(), sb.cols())?;
    sa.ensure_symmetric(SYMMETRY_TOL)?;
    let eb = sym_eig(sb)?;
    let top = eb.max();
    let floor = eb.min();
    if floor < -null_tol * top.max(1.0) {
        return Err(Error::NotPositiveSemidefinite { value: floor });
    }
    if top <= 0.0 {
        return Ok(Vec::new());
    }
    let keep: Vec<usize> = (0..eb.values.len())
        .filter(|&i| eb.values[i] > null_tol * top)
        .collect();
    if keep.is_empty() {
        return Ok(Vec::new());
    }
    let n = sa.rows();
    let r = keep.len();
    // Columns of Z are eigenvectors scaled by 1/√λ.
    let z = DenseMatrix::from_fn(n, r, |i, j| {
        let k = keep[j];
        eb.vectors.get(i, k) / eb.values[k].sqrt()
    });
    let zt = z.transpose();
    let mut whitened = zt.matmul(&sa.matmul(&z)?)?;
    whitened.mirror_upper();
    Ok(sym_eig(&whitened)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vec, rng_from_seed};

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut r = rng_from_seed(seed);
        let m = DenseMatrix::new(n, n, gaussian_vec(&mut r, n * n, 1.0)).unwrap();
        DenseMatrix::from_fn(n, n, |i, j| m.get(i, j) + m.get(j, i))
    }

    fn reconstruct(e: &SymEig) -> DenseMatrix {
        let n = e.values.len();
        let scaled = DenseMatrix::from_fn(n, n, |i, j| e.vectors.get(i, j) * e.values[j]);
        scaled.matmul(&e.vectors.transpose()).unwrap()
    }

    #[test]
    fn diagonal_sorted_descending() {
        let e = sym_eig(&DenseMatrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        let s = DenseMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let e = sym_eig(&s).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_orthogonality() {
        for seed in 0..10 {
            let s = random_symmetric(5, seed);
            let e = sym_eig(&s).unwrap();
            let resid = reconstruct(&e).sub(&s).unwrap().frobenius_norm();
            assert!(resid <= 1e-9 * s.frobenius_norm(), "seed {seed}: {resid:e}");
            let vtv = e.vectors.gram();
            let orth = vtv.sub(&DenseMatrix::identity(5)).unwrap().frobenius_norm();
            assert!(orth <= 1e-9);
        }
    }

    #[test]
    fn eigenvalue_sum_matches_trace() {
        for seed in 0..10 {
            let s = random_symmetric(12, 100 + seed);
            let trace: f64 = (0..12).map(|i| s.get(i, i)).sum();
            let sum: f64 = sym_eig(&s).unwrap().values.iter().sum();
            assert!((sum - trace).abs() <= 1e-9 * trace.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_nonsymmetric() {
        let s = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&s), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn generalized_identity_weight_reduces_to_sym_eig() {
        let sa = random_symmetric(4, 9);
        let g = generalized_sym_eig(&sa, &DenseMatrix::identity(4), DEFAULT_NULL_TOL).unwrap();
        let e = sym_eig(&sa).unwrap().values;
        for (x, y) in g.iter().zip(&e) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_per_coordinate_ratio() {
        let g = generalized_sym_eig(
            &DenseMatrix::diag(&[2.0, 8.0]),
            &DenseMatrix::diag(&[1.0, 4.0]),
            DEFAULT_NULL_TOL,
        )
        .unwrap();
        assert_eq!(g.len(), 2);
        for v in g {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_drops_null_direction() {
        let g = generalized_sym_eig(
            &DenseMatrix::diag(&[5.0, 6.0]),
            &DenseMatrix::diag(&[2.0, 0.0]),
            DEFAULT_NULL_TOL,
        )
        .unwrap();
        assert_eq!(g.len(), 1);
        assert!((g[0] - 2.5).abs() < 1e-12);
        let empty = generalized_sym_eig(
            &DenseMatrix::identity(2),
            &DenseMatrix::zeros(2, 2),
            DEFAULT_NULL_TOL,
        )
        .unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn generalized_rejects_indefinite_weight() {
        let r = generalized_sym_eig(
            &DenseMatrix::identity(2),
            &DenseMatrix::diag(&[1.0, -0.5]),
            DEFAULT_NULL_TOL,
        );
        assert!(matches!(r, Err(Error::NotPositiveSemidefinite { .. })));
    }
}
