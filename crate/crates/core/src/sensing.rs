//! Random measurement ensembles and D-RIP constants.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::TightFrame;
use crate::linalg::{self, check_len, generalized_sym_eig, mtx, DenseMatrix, LinOp, DEFAULT_NULL_TOL};
use crate::rng::{gaussian_vec, rademacher, random_subset, rng_from_seed, substream, unit_vector, SeededRng};

/// Largest number of supports [`drip_exact`] will enumerate.
pub const EXACT_SUPPORT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingKind {
    Gaussian,
    Bernoulli,
    FromFile,
}

impl SensingKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(SensingKind::Gaussian),
            "bernoulli" => Ok(SensingKind::Bernoulli),
            "from_file" => Ok(SensingKind::FromFile),
            other => Err(Error::invalid(format!(
                "unknown sensing kind {other:?}; expected gaussian, bernoulli or from_file"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingSpec {
    pub kind: SensingKind,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl SensingSpec {
    pub fn new(kind: SensingKind, m: usize, n: usize, seed: u64) -> Self {
        SensingSpec { kind, m, n, seed, path: None }
    }
}

/// Draws `A`: Gaussian entries are N(0, 1/m), Bernoulli entries ±1/√m.
pub fn draw_sensing(spec: &SensingSpec) -> Result<DenseMatrix> {
    if spec.kind == SensingKind::FromFile {
        let path = spec
            .path
            .as_ref()
            .ok_or_else(|| Error::invalid("from_file sensing spec needs a path"))?;
        return mtx::read_matrix(path);
    }
    if spec.m == 0 || spec.n == 0 {
        return Err(Error::invalid(format!(
            "sensing matrix needs m, n >= 1, got m = {}, n = {}",
            spec.m, spec.n
        )));
    }
    let mut rng = rng_from_seed(spec.seed);
    Ok(draw_random(&mut rng, spec.kind, spec.m, spec.n))
}

pub(crate) fn draw_random(rng: &mut SeededRng, kind: SensingKind, m: usize, n: usize) -> DenseMatrix {
    let scale = 1.0 / (m as f64).sqrt();
    let data = match kind {
        SensingKind::Bernoulli => (0..m * n).map(|_| scale * rademacher(rng)).collect(),
        _ => gaussian_vec(rng, m * n, scale),
    };
    DenseMatrix::from_raw(m, n, data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DRipMode {
    Exact,
    MonteCarlo,
}

/// A D-RIP constant: exact (a certificate) or a Monte Carlo lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DRipReport {
    pub s: usize,
    pub mode: DRipMode,
    pub delta: f64,
    pub supports_examined: u64,
    pub is_certificate: bool,
    /// Support attaining `delta` (lowest index among ties).
    #[serde(skip)]
    pub worst_support: Option<Vec<usize>>,
}

/// `C(d, s)` in floating point.
pub fn binomial(d: usize, s: usize) -> f64 {
    if s > d {
        return 0.0;
    }
    let s = s.min(d - s);
    (0..s).fold(1.0, |acc, i| acc * (d - i) as f64 / (i + 1) as f64)
}

/// Grams shared by all supports: `(AD)ᵀ(AD)` and `DᵀD`.
struct SupportGrams {
    ad_gram: DenseMatrix,
    d_gram: DenseMatrix,
}

impl SupportGrams {
    fn new(a: &DenseMatrix, frame: &TightFrame) -> Result<Self> {
        check_len("sensing columns vs frame rows", frame.n(), a.cols())?;
        let ad = a.matmul(frame.matrix())?;
        Ok(SupportGrams { ad_gram: ad.gram(), d_gram: frame.matrix().gram() })
    }

    fn delta(&self, support: &[usize]) -> Result<f64> {
        let sa = self.ad_gram.principal_submatrix(support);
        let sb = self.d_gram.principal_submatrix(support);
        let eig = generalized_sym_eig(&sa, &sb, DEFAULT_NULL_TOL)?;
        Ok(match (eig.first(), eig.last()) {
            (Some(&hi), Some(&lo)) => (hi - 1.0).max(1.0 - lo),
            _ => 0.0,
        })
    }
}

/// `δ_T = max(λ_max − 1, 1 − λ_min)` for the pencil `(D_TᵀAᵀAD_T, D_TᵀD_T)`
/// restricted to `range(D_TᵀD_T)`; 0 when `D_T` vanishes.
pub fn support_delta(a: &DenseMatrix, frame: &TightFrame, support: &[usize]) -> Result<f64> {
    if let Some(&bad) = support.iter().find(|&&j| j >= frame.d()) {
        return Err(Error::invalid(format!("support index {bad} out of range 0..{}", frame.d())));
    }
    SupportGrams::new(a, frame)?.delta(support)
}

fn all_supports(d: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..s).collect();
    loop {
        out.push(current.clone());
        // Advance to the next combination in lexicographic order.
        let mut i = s;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < d - s + i {
                current[i] += 1;
                for j in (i + 1)..s {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Exact `δ_s` by enumerating every support of size `s`.
pub fn drip_exact(a: &DenseMatrix, frame: &TightFrame, s: usize) -> Result<DRipReport> {
    let d = frame.d();
    if s == 0 || s > d {
        return Err(Error::invalid(format!("D-RIP order must satisfy 1 <= s <= d = {d}, got {s}")));
    }
    let count = binomial(d, s);
    if count > EXACT_SUPPORT_BUDGET as f64 {
        return Err(Error::BudgetExceeded { supports: count, budget: EXACT_SUPPORT_BUDGET });
    }
    let grams = SupportGrams::new(a, frame)?;
    let supports = all_supports(d, s);
    let deltas: Vec<f64> = supports
        .par_iter()
        .map(|t| grams.delta(t))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &v) in deltas.iter().enumerate() {
        if v > deltas[best] {
            best = i;
        }
    }
    Ok(DRipReport {
        s,
        mode: DRipMode::Exact,
        delta: deltas[best],
        supports_examined: supports.len() as u64,
        is_certificate: true,
        worst_support: Some(supports[best].clone()),
    })
}

/// Lower bound on `δ_s` from random supports and random coefficient directions.
///
/// Trial `t` draws from its own stream, so a run with more trials examines a
/// superset of the draws of a shorter run.
pub fn drip_monte_carlo(
    a: &DenseMatrix,
    frame: &TightFrame,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<DRipReport> {
    let d = frame.d();
    if s == 0 || s > d {
        return Err(Error::invalid(format!("D-RIP order must satisfy 1 <= s <= d = {d}, got {s}")));
    }
    if trials == 0 {
        return Err(Error::invalid("Monte Carlo D-RIP needs trials >= 1"));
    }
    check_len("sensing columns vs frame rows", frame.n(), a.cols())?;
    let ad = a.matmul(frame.matrix())?;
    let dm = frame.matrix();
    let observed: Vec<(f64, Vec<usize>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t);
            let support = random_subset(&mut rng, d, s);
            let coeffs = gaussian_vec(&mut rng, s, 1.0);
            let mut v = vec![0.0; d];
            for (&j, &c) in support.iter().zip(&coeffs) {
                v[j] = c;
            }
            let dv = linalg::norm2(&dm.matvec_unchecked(&v)).powi(2);
            let adv = linalg::norm2(&ad.matvec_unchecked(&v)).powi(2);
            let delta = if dv > DEFAULT_NULL_TOL * linalg::norm2(&v).powi(2) {
                (adv / dv - 1.0).abs()
            } else {
                0.0
            };
            (delta, support)
        })
        .collect();
    let mut best = 0;
    for (i, (v, _)) in observed.iter().enumerate() {
        if *v > observed[best].0 {
            best = i;
        }
    }
    Ok(DRipReport {
        s,
        mode: DRipMode::MonteCarlo,
        delta: observed[best].0,
        supports_examined: trials as u64,
        is_certificate: false,
        worst_support: Some(observed[best].1.clone()),
    })
}

/// Operator family for [`concentration_probe`].
#[derive(Clone, Debug)]
pub enum ProbeEnsemble {
    /// The same operator in every trial.
    Fixed(LinOp),
    /// Fresh `m×n` Gaussian `A` (entries N(0, 1/m)) per trial.
    Gaussian { m: usize, n: usize },
    /// Fresh `m×n` Bernoulli `A` (entries ±1/√m) per trial.
    Bernoulli { m: usize, n: usize },
    /// `Φ = [A, I]` with fresh Gaussian `A` per trial.
    GaussianWithIdentity { m: usize, n: usize },
}

/// Fraction of trials with `|‖Φv‖₂² − ‖v‖₂²| ≥ 2δ‖v‖₂²` for a random unit `v`.
pub fn concentration_probe(ensemble: &ProbeEnsemble, delta: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("concentration probe needs delta in (0, 1), got {delta}")));
    }
    if trials < 100 {
        return Err(Error::invalid(format!("concentration probe needs trials >= 100, got {trials}")));
    }
    let violations: usize = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t);
            let energy = match ensemble {
                ProbeEnsemble::Fixed(op) => {
                    let v = unit_vector(&mut rng, op.input_dim());
                    linalg::norm2(&op.fwd(&v)).powi(2)
                }
                ProbeEnsemble::Gaussian { m, n } | ProbeEnsemble::Bernoulli { m, n } => {
                    let kind = match ensemble {
                        ProbeEnsemble::Bernoulli { .. } => SensingKind::Bernoulli,
                        _ => SensingKind::Gaussian,
                    };
                    let a = draw_random(&mut rng, kind, *m, *n);
                    let v = unit_vector(&mut rng, *n);
                    linalg::norm2(&a.matvec_unchecked(&v)).powi(2)
                }
                ProbeEnsemble::GaussianWithIdentity { m, n } => {
                    let a = draw_random(&mut rng, SensingKind::Gaussian, *m, *n);
                    let v = unit_vector(&mut rng, m + n);
                    let mut out = a.matvec_unchecked(&v[..*n]);
                    for (o, e) in out.iter_mut().zip(&v[*n..]) {
                        *o += e;
                    }
                    linalg::norm2(&out).powi(2)
                }
            };
            usize::from((energy - 1.0).abs() >= 2.0 * delta)
        })
        .sum();
    Ok(violations as f64 / trials as f64)
}

/// Smallest integer `m ≥ 1` with `m ≥ C·δ⁻²·k·ln(ratio)`, where `k` is the
/// total sparsity and `ratio` the dimension-to-sparsity ratio.
pub fn sample_size_from_ratio(total_sparsity: usize, ratio: f64, delta: f64, c: f64) -> Result<usize> {
    if total_sparsity == 0 {
        return Err(Error::invalid("sample size needs s + s' >= 1"));
    }
    if !(ratio > 1.0) {
        return Err(Error::invalid(format!("sample size needs (d + M)/(s + s') > 1, got {ratio}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("sample size needs delta in (0, 1], got {delta}")));
    }
    if !(c > 0.0) {
        return Err(Error::invalid(format!("sample size needs C > 0, got {c}")));
    }
    let raw = c / (delta * delta) * total_sparsity as f64 * ratio.ln();
    // Absorb rounding noise so that exact integers are not bumped up.
    let m = (raw * (1.0 - 1e-12)).ceil();
    Ok((m as usize).max(1))
}

/// `m_min` for recovering `s`-sparse signals in `d` frame coefficients
/// under `s'`-sparse noise in `M` coefficients.
pub fn sample_size_advisor(s: usize, s_prime: usize, d: usize, big_m: usize, delta: f64, c: f64) -> Result<usize> {
    let k = s + s_prime;
    if k == 0 {
        return Err(Error::invalid("sample size needs s + s' >= 1"));
    }
    sample_size_from_ratio(k, (d + big_m) as f64 / k as f64, delta, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{random_orthogonal, FrameKind};
    use crate::linalg::sym_eig;

    fn identity_frame(n: usize) -> TightFrame {
        TightFrame::build(FrameKind::Identity, n, n, 0).unwrap()
    }

    #[test]
    fn gaussian_is_repeatable() {
        let spec = SensingSpec::new(SensingKind::Gaussian, 10, 20, 1);
        let a = draw_sensing(&spec).unwrap();
        let b = draw_sensing(&spec).unwrap();
        assert_eq!(a.shape(), (10, 20));
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn bernoulli_support() {
        let a = draw_sensing(&SensingSpec::new(SensingKind::Bernoulli, 9, 7, 3)).unwrap();
        let v = 1.0 / 3.0;
        assert!(a.as_slice().iter().all(|&x| x == v || x == -v));
    }

    #[test]
    fn gaussian_column_norms_concentrate() {
        let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, 200, 50, 5)).unwrap();
        let mean = (0..50).map(|j| linalg::norm2(&a.column(j)).powi(2)).sum::<f64>() / 50.0;
        assert!((0.8..=1.2).contains(&mean), "{mean}");
    }

    #[test]
    fn isometry_has_zero_delta() {
        let q = random_orthogonal(&mut rng_from_seed(4), 5);
        let f = identity_frame(5);
        for s in 1..=3 {
            let r = drip_exact(&q, &f, s).unwrap();
            assert!(r.delta < 1e-12);
            assert!(r.is_certificate);
            let mc = drip_monte_carlo(&q, &f, s, 50, 1).unwrap();
            assert!(mc.delta < 1e-12 && !mc.is_certificate);
        }
    }

    #[test]
    fn diagonal_order_one() {
        let a = DenseMatrix::diag(&[1.1, 0.9]);
        let r = drip_exact(&a, &identity_frame(2), 1).unwrap();
        assert!((r.delta - 0.21).abs() < 1e-12);
        assert_eq!(r.supports_examined, 2);
    }

    #[test]
    fn exact_is_monotone_in_order() {
        let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, 6, 8, 9)).unwrap();
        let f = identity_frame(8);
        let mut prev = 0.0;
        for s in 1..=5 {
            let r = drip_exact(&a, &f, s).unwrap();
            assert!(r.delta >= prev - 1e-12);
            prev = r.delta;
        }
    }

    #[test]
    fn exact_matches_classical_rip_oracle() {
        for seed in 0..5 {
            let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, 7, 9, seed)).unwrap();
            let r = drip_exact(&a, &identity_frame(9), 2).unwrap();
            let mut oracle: f64 = 0.0;
            for t in all_supports(9, 2) {
                let ev = sym_eig(&a.select_columns(&t).gram()).unwrap();
                oracle = oracle.max((ev.max() - 1.0).max(1.0 - ev.min()));
            }
            assert!((r.delta - oracle).abs() <= 1e-10);
        }
    }

    #[test]
    fn worst_support_recomputes() {
        let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, 5, 6, 2)).unwrap();
        let f = TightFrame::build(FrameKind::UnionOfOnb, 3, 6, 1).unwrap();
        let a = a.select_columns(&[0, 1, 2]);
        let r = drip_exact(&a, &f, 2).unwrap();
        let again = support_delta(&a, &f, r.worst_support.as_ref().unwrap()).unwrap();
        assert!((again - r.delta).abs() <= 1e-10);
    }

    #[test]
    fn monte_carlo_is_a_lower_bound_and_nested() {
        let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, 5, 7, 3)).unwrap();
        let f = identity_frame(7);
        let exact = drip_exact(&a, &f, 2).unwrap().delta;
        for seed in 0..5 {
            let short = drip_monte_carlo(&a, &f, 2, 100, seed).unwrap().delta;
            let long = drip_monte_carlo(&a, &f, 2, 1000, seed).unwrap().delta;
            assert!(short <= long);
            assert!(long <= exact + 1e-12);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let a = DenseMatrix::identity(60);
        let err = drip_exact(&a, &identity_frame(60), 6).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
        assert!(err.to_string().contains("Monte Carlo"));
    }

    #[test]
    fn report_json_fields() {
        let r = drip_exact(&DenseMatrix::identity(3), &identity_frame(3), 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["delta", "is_certificate", "mode", "s", "supports_examined"]);
        assert_eq!(v["mode"], "exact");
    }

    #[test]
    fn probe_orthonormal_and_reproducible() {
        let q = LinOp::from(random_orthogonal(&mut rng_from_seed(1), 6));
        for delta in [0.01, 0.3, 0.9] {
            assert_eq!(concentration_probe(&ProbeEnsemble::Fixed(q.clone()), delta, 200, 2).unwrap(), 0.0);
        }
        let e = ProbeEnsemble::GaussianWithIdentity { m: 20, n: 30 };
        let a = concentration_probe(&e, 0.2, 300, 9).unwrap();
        let b = concentration_probe(&e, 0.2, 300, 9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn advisor_examples() {
        assert_eq!(sample_size_from_ratio(1, std::f64::consts::E, 1.0, 1.0).unwrap(), 1);
        let base = sample_size_advisor(3, 2, 200, 50, 0.5, 2.0).unwrap();
        let half = sample_size_advisor(3, 2, 200, 50, 0.25, 2.0).unwrap();
        assert!(half >= 4 * base - 4 && half <= 4 * base);
        let double_c = sample_size_advisor(3, 2, 200, 50, 0.5, 4.0).unwrap();
        assert!(double_c >= 2 * base - 1 && double_c <= 2 * base);
    }
}
