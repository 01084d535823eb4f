//! Primal-dual hybrid gradient for `min_x Σ_b F_b(K_b x)`.

use super::config::{SolverConfig, StepRule};
use super::prox::{ball_violation, soft, BallKind};
use crate::error::{Error, Result};
use crate::linalg::{self, check_len, power_iteration_norm, DenseMatrix, LinOp};

const NORM_SEED: u64 = 0x5EED_0F_4B;
const NORM_INFLATION: f64 = 1.01;
const STEP_SAFETY: f64 = 0.99;

// Adaptive restarts to the running average.
const RESTART_CHECK: usize = 64;
const RESTART_SUFFICIENT: f64 = 0.2;
const RESTART_NECESSARY: f64 = 0.8;
const RESTART_ARTIFICIAL: f64 = 0.36;

/// One summand `F_b` applied to `K_b x`.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    /// `weight · ‖u‖₁`.
    L1 { weight: f64 },
    /// Indicator of `{u : ‖u − center‖ ≤ radius}`.
    Ball { kind: BallKind, center: Vec<f64>, radius: f64 },
    /// `(weight / 2) · ‖u − center‖₂²`.
    SquaredL2 { center: Vec<f64>, weight: f64 },
}

impl Term {
    fn center(&self) -> Option<&[f64]> {
        match self {
            Term::L1 { .. } => None,
            Term::Ball { center, .. } | Term::SquaredL2 { center, .. } => Some(center),
        }
    }

    /// Equivalent term for the operator scaled by `1/s`.
    fn rescaled(&self, s: f64) -> Term {
        match self {
            Term::L1 { weight } => Term::L1 { weight: weight * s },
            Term::Ball { kind, center, radius } => Term::Ball {
                kind: *kind,
                center: linalg::scale(center, 1.0 / s),
                radius: radius / s,
            },
            Term::SquaredL2 { center, weight } => Term::SquaredL2 {
                center: linalg::scale(center, 1.0 / s),
                weight: weight * s * s,
            },
        }
    }

    /// Finite part of `F(u)`; indicators contribute 0.
    fn value(&self, u: &[f64]) -> f64 {
        match self {
            Term::L1 { weight } => weight * linalg::norm1(u),
            Term::Ball { .. } => 0.0,
            Term::SquaredL2 { center, weight } => {
                0.5 * weight * u.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
            }
        }
    }

    /// `F*(p)` for a `p` produced by [`Term::prox_conj`].
    fn conj_value(&self, p: &[f64]) -> f64 {
        match self {
            Term::L1 { .. } => 0.0,
            Term::Ball { kind, center, radius } => {
                let dual_norm = match kind {
                    BallKind::L2 => linalg::norm2(p),
                    BallKind::Linf => linalg::norm1(p),
                };
                linalg::dot(p, center) + radius * dual_norm
            }
            Term::SquaredL2 { center, weight } => {
                linalg::dot(p, p) / (2.0 * weight) + linalg::dot(p, center)
            }
        }
    }

    /// `prox_{σF*}(v)` via the Moreau identity, written in place.
    fn prox_conj(&self, v: &mut [f64], sigma: f64) {
        match self {
            Term::L1 { weight } => {
                for x in v.iter_mut() {
                    *x = x.clamp(-weight, *weight);
                }
            }
            Term::Ball { kind, center, radius } => {
                for (x, c) in v.iter_mut().zip(center) {
                    *x -= sigma * c;
                }
                let t = sigma * radius;
                match kind {
                    BallKind::Linf => {
                        for x in v.iter_mut() {
                            *x = soft(*x, t);
                        }
                    }
                    BallKind::L2 => {
                        let norm = linalg::norm2(v);
                        let factor = if norm > t { 1.0 - t / norm } else { 0.0 };
                        for x in v.iter_mut() {
                            *x *= factor;
                        }
                    }
                }
            }
            Term::SquaredL2 { center, weight } => {
                let denom = 1.0 + sigma / weight;
                for (x, c) in v.iter_mut().zip(center) {
                    *x = (*x - sigma * c) / denom;
                }
            }
        }
    }

    fn violation(&self, u: &[f64]) -> Option<(f64, f64)> {
        match self {
            Term::Ball { kind, center, radius } => Some((ball_violation(u, *kind, center, *radius), *radius)),
            _ => None,
        }
    }
}

/// `F_b(K_b x)` with its operator.
#[derive(Clone, Debug)]
pub struct Block {
    pub op: LinOp,
    pub term: Term,
}

/// Result of [`pdhg_solve`].
#[derive(Clone, Debug)]
pub struct PdhgOutput {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `Σ_b F_b(K_b x)` without indicator terms.
    pub objective: f64,
    /// Relative duality gap `|P + ΣF*|/(1 + |P| + |ΣF*|)`.
    pub gap_rel: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Largest ball violation relative to `1 + radius`, in original units.
    pub violation: f64,
    pub converged: bool,
    pub tau: f64,
    pub sigma: f64,
    pub norm_k: f64,
}

struct Layout {
    /// Row offsets of each block inside the stacked operator.
    offsets: Vec<usize>,
    /// Multiplier turning scaled-block quantities back into original units.
    scales: Vec<f64>,
    terms: Vec<Term>,
}

impl Layout {
    fn range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b + 1]
    }
}

/// Stacks the (optionally unit-normalized) blocks into one dense matrix.
fn assemble(blocks: &[Block], config: &SolverConfig) -> Result<(DenseMatrix, Layout)> {
    let n = blocks
        .first()
        .ok_or_else(|| Error::invalid("pdhg needs at least one block"))?
        .op
        .input_dim();
    let mut offsets = vec![0];
    let mut scales = Vec::with_capacity(blocks.len());
    let mut terms = Vec::with_capacity(blocks.len());
    let mut data = Vec::new();
    for (b, block) in blocks.iter().enumerate() {
        check_len("pdhg block input dim", n, block.op.input_dim())?;
        let rows = block.op.output_dim();
        if let Some(c) = block.term.center() {
            check_len("pdhg block center", rows, c.len())?;
        }
        let dense = block.op.to_dense();
        let s = if config.pdhg_block_scaling {
            power_iteration_norm(&block.op, config.norm_k_iters, NORM_SEED ^ b as u64)?
        } else {
            1.0
        };
        let s = if s > 0.0 { s } else { 1.0 };
        data.extend(dense.as_slice().iter().map(|v| v / s));
        terms.push(block.term.rescaled(s));
        scales.push(s);
        offsets.push(offsets[b] + rows);
    }
    let rows = *offsets.last().unwrap();
    Ok((DenseMatrix::from_raw(rows, n, data), Layout { offsets, scales, terms }))
}

/// `K_bᵀ p_b` for the rows of block `b`.
fn partial_transpose(k: &DenseMatrix, rows: std::ops::Range<usize>, p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; k.cols()];
    for i in rows {
        let pi = p[i];
        if pi != 0.0 {
            linalg::axpy(pi, k.row(i), &mut out);
        }
    }
    out
}

/// Scaled-units optimality error: ball violations, `‖Kᵀp‖` and the gap.
fn kkt_error(layout: &Layout, kx: &[f64], p: &[f64], ktp: &[f64]) -> f64 {
    let mut acc = linalg::dot(ktp, ktp);
    let mut gap = 0.0;
    for (b, term) in layout.terms.iter().enumerate() {
        let r = layout.range(b);
        gap += term.value(&kx[r.clone()]) + term.conj_value(&p[r.clone()]);
        if let Some((viol, _)) = term.violation(&kx[r]) {
            acc += viol * viol;
        }
    }
    (acc + gap * gap).sqrt()
}

/// Running sums since the last restart.
struct Average {
    count: f64,
    x: Vec<f64>,
    kx: Vec<f64>,
    p: Vec<f64>,
    ktp: Vec<f64>,
}

impl Average {
    fn new(n: usize, rows: usize) -> Self {
        Average { count: 0.0, x: vec![0.0; n], kx: vec![0.0; rows], p: vec![0.0; rows], ktp: vec![0.0; n] }
    }

    fn add(&mut self, x: &[f64], kx: &[f64], p: &[f64], ktp: &[f64]) {
        self.count += 1.0;
        for (dst, src) in [(&mut self.x, x), (&mut self.kx, kx), (&mut self.p, p), (&mut self.ktp, ktp)] {
            linalg::axpy(1.0, src, dst);
        }
    }

    fn mean(&self) -> [Vec<f64>; 4] {
        let c = 1.0 / self.count;
        [
            linalg::scale(&self.x, c),
            linalg::scale(&self.kx, c),
            linalg::scale(&self.p, c),
            linalg::scale(&self.ktp, c),
        ]
    }

    fn reset(&mut self) {
        self.count = 0.0;
        for v in [&mut self.x, &mut self.kx, &mut self.p, &mut self.ktp] {
            v.iter_mut().for_each(|e| *e = 0.0);
        }
    }
}

/// Solves `min_x Σ_b F_b(K_b x)` by Chambolle–Pock iterations with `θ = 1`.
///
/// Iterates start at zero. With `pdhg_restarts`, every 64 iterations the
/// better of the current and averaged iterates (by optimality error) becomes
/// the restart point once it has cut the error enough.
/// Converged means the relative primal residual,
/// dual residual, ball violations and duality gap all meet the tolerances.
pub fn pdhg_solve(blocks: &[Block], config: &SolverConfig) -> Result<PdhgOutput> {
    config.validate()?;
    let (k, layout) = assemble(blocks, config)?;
    let (rows, n) = k.shape();
    let k_op = LinOp::from(k);
    let norm_k = power_iteration_norm(&k_op, config.norm_k_iters, NORM_SEED)?;
    let LinOp::Dense(k) = k_op else { unreachable!() };
    let bound = NORM_INFLATION * norm_k;
    let (mut tau, mut sigma) = match config.pdhg_steps {
        StepRule::Auto => {
            let step = if bound > 0.0 { STEP_SAFETY / bound } else { 1.0 };
            (step, step)
        }
        StepRule::Fixed { tau, sigma } => {
            if tau * sigma * bound * bound > 1.0 {
                return Err(Error::invalid(format!(
                    "step sizes violate tau*sigma*|K|^2 <= 1: tau = {tau}, sigma = {sigma}, |K| ~ {bound:.6}"
                )));
            }
            (tau, sigma)
        }
    };

    let nb = layout.terms.len();
    let mut x = vec![0.0; n];
    let mut kx = vec![0.0; rows];
    let mut p = vec![0.0; rows];
    let mut ktp = vec![0.0; n];
    let mut avg = Average::new(n, rows);
    let mut last_restart_kkt = kkt_error(&layout, &kx, &p, &ktp);
    let mut prev_candidate_kkt = f64::INFINITY;
    let mut since_restart = 0usize;
    let step = (tau * sigma).sqrt();
    let mut weight = (sigma / tau).sqrt();
    let mut anchor_x = x.clone();
    let mut anchor_p = p.clone();
    let mut out = PdhgOutput {
        x: Vec::new(),
        iterations: 0,
        objective: 0.0,
        gap_rel: f64::INFINITY,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        violation: f64::INFINITY,
        converged: false,
        tau,
        sigma,
        norm_k,
    };

    for it in 1..=config.max_iter {
        let x_new: Vec<f64> = x.iter().zip(&ktp).map(|(a, g)| a - tau * g).collect();
        let kx_new = k.matvec_unchecked(&x_new);
        let mut p_new: Vec<f64> = p
            .iter()
            .zip(kx_new.iter().zip(&kx))
            .map(|(pi, (a, b))| pi + sigma * (2.0 * a - b))
            .collect();
        for b in 0..nb {
            layout.terms[b].prox_conj(&mut p_new[layout.range(b)], sigma);
        }
        let mut ktp_new = vec![0.0; n];
        let mut block_dual_norms = 0.0;
        for b in 0..nb {
            let part = partial_transpose(&k, layout.range(b), &p_new);
            block_dual_norms += linalg::norm2(&part);
            for (t, v) in ktp_new.iter_mut().zip(part) {
                *t += v;
            }
        }

        let mut rp = 0.0;
        for i in 0..rows {
            let r = (p[i] - p_new[i]) / sigma + (kx_new[i] - kx[i]);
            rp += r * r;
        }
        x = x_new;
        kx = kx_new;
        p = p_new;
        ktp = ktp_new;

        let primal_res = rp.sqrt() / (1.0 + linalg::norm2(&kx));
        let mut objective = 0.0;
        let mut conj = 0.0;
        let mut violation: f64 = 0.0;
        for b in 0..nb {
            let r = layout.range(b);
            let term = &layout.terms[b];
            objective += term.value(&kx[r.clone()]);
            conj += term.conj_value(&p[r.clone()]);
            if let Some((viol, radius)) = term.violation(&kx[r.clone()]) {
                let s = layout.scales[b];
                violation = violation.max(s * viol / (1.0 + s * radius));
            }
        }
        let dual_res = linalg::norm2(&ktp) / (1.0 + block_dual_norms);
        let gap = objective + conj;
        let gap_rel = gap.abs() / (1.0 + objective.abs() + conj.abs());

        out.iterations = it;
        out.objective = objective;
        out.gap_rel = gap_rel;
        out.primal_residual = primal_res;
        out.dual_residual = dual_res;
        out.violation = violation;
        if primal_res <= config.tol_primal
            && violation <= config.tol_primal
            && dual_res <= config.tol_dual
            && gap_rel <= config.tol_gap
        {
            out.converged = true;
            break;
        }

        if config.pdhg_restarts {
            avg.add(&x, &kx, &p, &ktp);
            since_restart += 1;
            if since_restart % RESTART_CHECK == 0 {
                let mean = avg.mean();
                let kkt_cur = kkt_error(&layout, &kx, &p, &ktp);
                let kkt_avg = kkt_error(&layout, &mean[1], &mean[2], &mean[3]);
                let use_avg = kkt_avg < kkt_cur;
                let candidate = kkt_avg.min(kkt_cur);
                let restart = candidate <= RESTART_SUFFICIENT * last_restart_kkt
                    || (candidate <= RESTART_NECESSARY * last_restart_kkt && candidate > prev_candidate_kkt)
                    || since_restart as f64 >= RESTART_ARTIFICIAL * it as f64;
                prev_candidate_kkt = candidate;
                if restart {
                    if use_avg {
                        let [ax, akx, ap, aktp] = mean;
                        x = ax;
                        kx = akx;
                        p = ap;
                        ktp = aktp;
                    }
                    if config.pdhg_primal_weight {
                        let dx = linalg::norm2(&linalg::sub(&x, &anchor_x));
                        let dp = linalg::norm2(&linalg::sub(&p, &anchor_p));
                        if dx > 1e-10 && dp > 1e-10 {
                            weight = (0.5 * (dp / dx).ln() + 0.5 * weight.ln()).exp();
                            tau = step / weight;
                            sigma = step * weight;
                        }
                        anchor_x = x.clone();
                        anchor_p = p.clone();
                    }
                    avg.reset();
                    since_restart = 0;
                    last_restart_kkt = candidate;
                    prev_candidate_kkt = f64::INFINITY;
                }
            }
        }
    }
    out.x = x;
    out.tau = tau;
    out.sigma = sigma;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_fixed_point_is_data() {
        let y = vec![1.0, -2.0, 0.5];
        let blocks = [Block {
            op: LinOp::identity(3),
            term: Term::SquaredL2 { center: y.clone(), weight: 1.0 },
        }];
        let out = pdhg_solve(&blocks, &SolverConfig::default()).unwrap();
        assert!(out.converged);
        for (a, b) in out.x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn scalar_lasso_soft_threshold() {
        let blocks = [
            Block { op: LinOp::identity(1), term: Term::L1 { weight: 1.0 } },
            Block { op: LinOp::identity(1), term: Term::SquaredL2 { center: vec![3.0], weight: 1.0 } },
        ];
        let out = pdhg_solve(&blocks, &SolverConfig::default()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 2.0).abs() < 1e-7, "{}", out.x[0]);
    }

    #[test]
    fn deterministic_iteration_count() {
        let blocks = [
            Block { op: LinOp::identity(2), term: Term::L1 { weight: 0.3 } },
            Block {
                op: LinOp::from(DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.5, -1.0]]).unwrap()),
                term: Term::Ball { kind: BallKind::L2, center: vec![1.0, 1.0], radius: 0.1 },
            },
        ];
        let a = pdhg_solve(&blocks, &SolverConfig::default()).unwrap();
        let b = pdhg_solve(&blocks, &SolverConfig::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn rejects_oversized_steps() {
        let blocks = [Block { op: LinOp::scaled_identity(2, 3.0), term: Term::L1 { weight: 1.0 } }];
        let config = SolverConfig {
            pdhg_steps: StepRule::Fixed { tau: 1.0, sigma: 1.0 },
            pdhg_block_scaling: false,
            ..SolverConfig::default()
        };
        assert!(pdhg_solve(&blocks, &config).is_err());
    }
}
