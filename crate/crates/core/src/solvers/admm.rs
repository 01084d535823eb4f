//! ADMM for `min_f ½‖Af − y‖₂² + μ‖Dᵀf‖₁` with a tight frame `D`.
//!
//! Splitting `x = Dᵀf` makes the `f`-update `(AᵀA + ρDDᵀ) f = Aᵀy + ρD(x − w)`;
//! since `DDᵀ = I` the system matrix is the fixed `AᵀA + ρI`, factored once.

use super::config::SolverConfig;
use super::prox::soft;
use crate::error::Result;
use crate::linalg::{self, check_len, Cholesky, DenseMatrix};

#[derive(Clone, Debug)]
pub struct AdmmOutput {
    pub f: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub gap_rel: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
}

/// Objective, best dual value along the ray through `ν = Af − y`, and
/// `‖DᵀAᵀν‖∞`.
///
/// `θν` is dual feasible whenever some `v` with `Dv = Aᵀν` has
/// `θ‖v‖∞ ≤ μ`. Any `v = DᵀAᵀν + (I − DᵀD)r` qualifies; `multiplier`, an
/// estimate of the optimal `−v`, supplies `r` so that redundant frames get
/// a tight certificate.
pub(crate) fn lasso_gap(
    a: &DenseMatrix,
    d: &DenseMatrix,
    y: &[f64],
    mu: f64,
    f: &[f64],
    multiplier: Option<&[f64]>,
) -> (f64, f64, f64) {
    let nu = linalg::sub(&a.matvec_unchecked(f), y);
    let coeffs = d.matvec_transpose_unchecked(f);
    let primal = 0.5 * linalg::dot(&nu, &nu) + mu * linalg::norm1(&coeffs);
    let corr = d.matvec_transpose_unchecked(&a.matvec_transpose_unchecked(&nu));
    let g = linalg::norm_inf(&corr);
    let v_norm = match multiplier {
        Some(q) => {
            let range = d.matvec_transpose_unchecked(&d.matvec_unchecked(q));
            let v: Vec<f64> = corr.iter().zip(q).zip(&range).map(|((c, qi), ri)| c - (qi - ri)).collect();
            linalg::norm_inf(&v).min(g)
        }
        None => g,
    };
    let theta_max = if v_norm > 0.0 { mu / v_norm } else { f64::INFINITY };
    let aa = linalg::dot(&nu, &nu);
    let bb = linalg::dot(&nu, y);
    let theta = if aa > 0.0 { (-bb / aa).clamp(0.0, theta_max) } else { 0.0 };
    let dual = -0.5 * theta * theta * aa - theta * bb;
    (primal, dual, g)
}

const RHO_PERIOD: usize = 10;
const RHO_RATIO: f64 = 10.0;
const RHO_MIN: f64 = 1e-8;
const RHO_MAX: f64 = 1e8;

pub fn admm_lasso(a: &DenseMatrix, d: &DenseMatrix, y: &[f64], mu: f64, config: &SolverConfig) -> Result<AdmmOutput> {
    config.validate()?;
    check_len("admm measurements", a.rows(), y.len())?;
    check_len("admm frame rows vs sensing columns", a.cols(), d.rows())?;
    let mut rho = config.admm_rho;
    let n = a.cols();
    let big_d = d.cols();
    let gram_a = a.gram();
    let factor = |rho: f64| {
        let mut system = gram_a.clone();
        for i in 0..n {
            system.set(i, i, system.get(i, i) + rho);
        }
        Cholesky::factor(&system)
    };
    let mut chol = factor(rho)?;
    let aty = a.matvec_transpose_unchecked(y);

    let mut x = vec![0.0; big_d];
    let mut w = vec![0.0; big_d];
    let mut f = vec![0.0; n];
    let mut out = AdmmOutput {
        f: Vec::new(),
        iterations: 0,
        objective: 0.0,
        gap_rel: f64::INFINITY,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        converged: false,
    };
    // Optimal points satisfy ‖DᵀAᵀ(Af − y)‖∞ ≤ μ‖DᵀD‖₁,₁; convergence also
    // requires this to relative accuracy tol_primal.
    let gram = d.gram();
    let norm11 = (0..big_d)
        .map(|j| (0..big_d).map(|i| gram.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let corr_floor = 1e-12 * (1.0 + linalg::norm_inf(&d.matvec_transpose_unchecked(&aty)));
    let corr_cap = mu * norm11 * (1.0 + config.tol_primal) + corr_floor;
    for it in 1..=config.max_iter {
        let xw = linalg::sub(&x, &w);
        let mut rhs = d.matvec_unchecked(&xw);
        for (r, b) in rhs.iter_mut().zip(&aty) {
            *r = b + rho * *r;
        }
        f = chol.solve_unchecked(&rhs);
        let dtf = d.matvec_transpose_unchecked(&f);
        let x_old = std::mem::take(&mut x);
        x = dtf.iter().zip(&w).map(|(c, u)| soft(c + u, mu / rho)).collect();
        for i in 0..big_d {
            w[i] += dtf[i] - x[i];
        }

        let primal_gap = linalg::norm2(&linalg::sub(&dtf, &x));
        let primal_res = primal_gap / (1.0 + linalg::norm2(&dtf).max(linalg::norm2(&x)));
        let dual_gap = rho * linalg::norm2(&d.matvec_unchecked(&linalg::sub(&x, &x_old)));
        let dual_res = dual_gap / (1.0 + rho * linalg::norm2(&d.matvec_unchecked(&w)));
        out.iterations = it;
        out.primal_residual = primal_res;
        out.dual_residual = dual_res;
        if primal_res <= config.tol_primal && dual_res <= config.tol_dual {
            let q: Vec<f64> = w.iter().map(|v| rho * v).collect();
            let (p, dv, corr) = lasso_gap(a, d, y, mu, &f, Some(&q));
            out.objective = p;
            out.gap_rel = (p - dv).abs() / (1.0 + p.abs() + dv.abs());
            if out.gap_rel <= config.tol_gap && corr <= corr_cap {
                out.converged = true;
                break;
            }
        }
        if config.admm_adaptive_rho && it % RHO_PERIOD == 0 {
            // The scaled multiplier w = q/ρ is rescaled with ρ.
            let scale = if primal_gap > RHO_RATIO * dual_gap && rho < RHO_MAX {
                2.0
            } else if dual_gap > RHO_RATIO * primal_gap && rho > RHO_MIN {
                0.5
            } else {
                1.0
            };
            if scale != 1.0 {
                rho *= scale;
                w.iter_mut().for_each(|v| *v /= scale);
                chol = factor(rho)?;
            }
        }
    }
    if !out.converged {
        let q: Vec<f64> = w.iter().map(|v| rho * v).collect();
        let (p, dv, _) = lasso_gap(a, d, y, mu, &f, Some(&q));
        out.objective = p;
        out.gap_rel = (p - dv).abs() / (1.0 + p.abs() + dv.abs());
    }
    out.f = f;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_soft_threshold() {
        let one = DenseMatrix::identity(1);
        let out = admm_lasso(&one, &one, &[3.0], 1.0, &SolverConfig::default()).unwrap();
        assert!(out.converged);
        assert!((out.f[0] - 2.0).abs() < 1e-8);
        assert!((out.objective - 2.5).abs() < 1e-8);
    }

    #[test]
    fn gap_is_zero_at_known_optimum() {
        let one = DenseMatrix::identity(1);
        let (p, d, _) = lasso_gap(&one, &one, &[3.0], 1.0, &[2.0], None);
        assert!((p - d).abs() < 1e-15);
    }

    #[test]
    fn redundant_frame_reaches_certified_optimum() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let d = DenseMatrix::from_fn(3, 6, |i, j| if j % 3 == i { h } else { 0.0 });
        let a = DenseMatrix::from_rows(&[&[1.0, 0.5, -0.3], &[0.2, -1.0, 0.7]]).unwrap();
        let out = admm_lasso(&a, &d, &[1.0, -2.0], 0.1, &SolverConfig::default()).unwrap();
        assert!(out.converged, "{out:?}");
        assert!(out.gap_rel <= 1e-8);
    }

    #[test]
    fn adaptive_rho_handles_tiny_mu() {
        let a = DenseMatrix::from_fn(4, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * i as f64);
        let d = DenseMatrix::identity(6);
        let y = [1.0, -0.5, 2.0, 0.25];
        let fixed = SolverConfig { admm_adaptive_rho: false, max_iter: 5000, ..SolverConfig::default() };
        assert!(!admm_lasso(&a, &d, &y, 1e-6, &fixed).unwrap().converged);
        let out = admm_lasso(&a, &d, &y, 1e-6, &SolverConfig::default()).unwrap();
        assert!(out.converged, "{out:?}");
    }
}
