//! Closed-form error bounds, thresholds and minimax quantities.
//!
//! Calculators are pure and report the raw bound even when it is vacuous.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, DenseMatrix};
use crate::solvers::SeparationVariant;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Inputs shared by the per-`k` bound calculators.
///
/// `tails[k - 1]` holds `‖D*f − (D*f)_[k]‖₁` for `k = 1..=s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub delta: f64,
    pub s: usize,
    #[serde(default)]
    pub s_prime: usize,
    /// `λ`, `μ` or `ε`, depending on the calculator.
    pub param: f64,
    #[serde(default = "one")]
    pub norm11: f64,
    pub tails: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

impl BoundInputs {
    pub fn new(delta: f64, param: f64, tails: Vec<f64>) -> Self {
        BoundInputs { delta, s: tails.len(), s_prime: 0, param, norm11: 1.0, tails }
    }

    pub fn with_s_prime(mut self, s_prime: usize) -> Self {
        self.s_prime = s_prime;
        self
    }

    pub fn with_norm11(mut self, norm11: f64) -> Self {
        self.norm11 = norm11;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::invalid("sparsity s must be >= 1"));
        }
        if self.tails.len() != self.s {
            return Err(Error::invalid(format!(
                "expected {} tail values (one per k = 1..s), got {}",
                self.s,
                self.tails.len()
            )));
        }
        for (name, v) in [("delta", self.delta), ("parameter", self.param), ("norm11", self.norm11)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (k, w) in self.tails.windows(2).enumerate() {
            if w[1] > w[0] * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::invalid(format!("tails must be nonincreasing in k (k = {} -> {})", k + 1, k + 2)));
            }
        }
        if let Some(t) = self.tails.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::invalid(format!("tails must be finite and >= 0, got {t}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `per_k[k - 1]` is the bound evaluated at `k`.
    pub per_k: Vec<f64>,
    pub k_star: usize,
    pub bound: f64,
    pub constants_used: BTreeMap<String, f64>,
}

impl BoundReport {
    fn from_per_k(per_k: Vec<f64>, constants: &[(&str, f64)]) -> Self {
        let (mut k_star, mut bound) = (1, f64::INFINITY);
        for (i, &v) in per_k.iter().enumerate() {
            if v < bound {
                bound = v;
                k_star = i + 1;
            }
        }
        let constants_used = constants.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        BoundReport { per_k, k_star, bound, constants_used }
    }
}

/// `‖x − x_[k]‖₁`: the sum of all but the `k` largest magnitudes.
pub fn l1_tail(x: &[f64], k: usize) -> f64 {
    if k >= x.len() {
        return 0.0;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    // Smallest first, for accuracy.
    mags[k..].iter().rev().sum()
}

/// `[l1_tail(x, 1), …, l1_tail(x, s)]` in one sort.
pub fn tail_profile(x: &[f64], s: usize) -> Vec<f64> {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut suffix = vec![0.0; mags.len() + 1];
    for i in (0..mags.len()).rev() {
        suffix[i] = suffix[i + 1] + mags[i];
    }
    (1..=s).map(|k| suffix[k.min(mags.len())]).collect()
}

fn require_delta(delta: f64, limit: f64, what: &str) -> Result<()> {
    if delta >= limit {
        return Err(Error::HypothesisViolated(format!(
            "{what} bound requires a D-RIP constant below {limit}, got {delta}"
        )));
    }
    Ok(())
}

/// ADS error bound, with a single `δ = δ₃ₛ` for every `k`:
/// `4√(2k)λ/(1 − 2δ) + 2·tail_k/((1 − 2δ)√k)`.
pub fn ads_bound(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    require_delta(inputs.delta, 0.5, "ADS")?;
    Ok(ads_like(inputs, 0))
}

fn ads_like(inputs: &BoundInputs, shift: usize) -> BoundReport {
    let denom = 1.0 - 2.0 * inputs.delta;
    let c0 = 4.0 * SQRT2 / denom;
    let c1 = 2.0 / denom;
    let per_k = (1..=inputs.s)
        .map(|k| {
            let r = ((k + shift) as f64).sqrt();
            c0 * r * inputs.param + c1 * inputs.tails[k - 1] / r
        })
        .collect();
    BoundReport::from_per_k(per_k, &[("C0", c0), ("C1", c1), ("delta", inputs.delta)])
}

/// ALASSO error bound with `c₀ = ½ + ‖D*D‖₁,₁`:
/// `2√2(1 + 2‖D*D‖₁,₁)√k·μ/(1 − 4δ) + 4·tail_k/((1 − 4δ)√k)`.
pub fn alasso_bound(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    require_delta(inputs.delta, 0.25, "ALASSO")?;
    Ok(alasso_like(inputs, 0))
}

fn alasso_like(inputs: &BoundInputs, shift: usize) -> BoundReport {
    let denom = 1.0 - 4.0 * inputs.delta;
    let c0 = 2.0 * SQRT2 * (1.0 + 2.0 * inputs.norm11) / denom;
    let c1 = 4.0 / denom;
    let per_k = (1..=inputs.s)
        .map(|k| {
            let r = ((k + shift) as f64).sqrt();
            c0 * r * inputs.param + c1 * inputs.tails[k - 1] / r
        })
        .collect();
    BoundReport::from_per_k(
        per_k,
        &[("C0", c0), ("C1", c1), ("delta", inputs.delta), ("norm11", inputs.norm11)],
    )
}

/// ABP bound `C2·tail_s/√s + C3·ε` with caller-supplied constants.
pub fn abp_bound(tail_s: f64, s: usize, epsilon: f64, c2: f64, c3: f64) -> Result<f64> {
    if s == 0 {
        return Err(Error::invalid("sparsity s must be >= 1"));
    }
    Ok(c2 * tail_s / (s as f64).sqrt() + c3 * epsilon)
}

/// Separation-variant bounds: the base formulas with `√k → √(k + s′)`.
///
/// `sabp` evaluates `C4·ε + C5·tail_s/√(s + s′)` and needs `abp_constants`
/// `(C4, C5)`; its report has a single entry at `k = s`.
pub fn separation_bound(
    variant: SeparationVariant,
    inputs: &BoundInputs,
    abp_constants: Option<(f64, f64)>,
) -> Result<BoundReport> {
    inputs.validate()?;
    match variant {
        SeparationVariant::Sads => {
            require_delta(inputs.delta, 0.5, "SADS")?;
            Ok(ads_like(inputs, inputs.s_prime))
        }
        SeparationVariant::Salasso => {
            require_delta(inputs.delta, 0.25, "SALASSO")?;
            Ok(alasso_like(inputs, inputs.s_prime))
        }
        SeparationVariant::Sabp => {
            let (c4, c5) = abp_constants
                .ok_or_else(|| Error::invalid("sabp bound needs caller constants C4 and C5"))?;
            let tail = inputs.tails[inputs.s - 1];
            let value = c4 * inputs.param + c5 * tail / ((inputs.s + inputs.s_prime) as f64).sqrt();
            let mut report = BoundReport::from_per_k(vec![value], &[("C4", c4), ("C5", c5)]);
            report.k_star = inputs.s;
            Ok(report)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimaxMode {
    Expectation,
    HighProbability,
}

/// Minimax lower bound over `s`-sparse signals.
///
/// Expectation: `sσ²/(1 + δ)`. High probability: `sσ²/(2(1 + δ))`, holding
/// with probability at least `1 − e^{−s/16}` (returned as the floor).
/// Only meaningful when the sparse class lies in the analysis range, which
/// holds for orthonormal `D`.
pub fn minimax_lower(s: usize, sigma: f64, delta_s: f64, mode: MinimaxMode) -> Result<(f64, Option<f64>)> {
    if !(delta_s >= 0.0 && delta_s.is_finite()) {
        return Err(Error::invalid(format!("delta must be finite and >= 0, got {delta_s}")));
    }
    let base = s as f64 * sigma * sigma / (1.0 + delta_s);
    Ok(match mode {
        MinimaxMode::Expectation => (base, None),
        MinimaxMode::HighProbability => (base / 2.0, Some(1.0 - (-(s as f64) / 16.0).exp())),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum MinimaxRisk {
    Finite(f64),
    Unbounded,
}

impl MinimaxRisk {
    pub fn value(&self) -> f64 {
        match self {
            MinimaxRisk::Finite(v) => *v,
            MinimaxRisk::Unbounded => f64::INFINITY,
        }
    }
}

/// `σ²·trace((Φ*Φ)⁻¹)`, or unbounded when an eigenvalue of `Φ*Φ` falls
/// below `1e-12` times the largest.
pub fn minimax_trace(phi: &DenseMatrix, sigma: f64) -> Result<MinimaxRisk> {
    let eig = sym_eig(&phi.gram())?;
    let max = eig.max();
    if max <= 0.0 || eig.values.iter().any(|&l| l < 1e-12 * max) {
        return Ok(MinimaxRisk::Unbounded);
    }
    let trace: f64 = eig.values.iter().map(|l| 1.0 / l).sum();
    Ok(MinimaxRisk::Finite(sigma * sigma * trace))
}

/// `min_k C0(σ²k ln d + R²k^{1−2/p})` over `k = 1..=s`.
pub fn power_law_risk(r: f64, p: f64, sigma: f64, d: usize, s: usize, c0: f64) -> Result<BoundReport> {
    if d < 2 {
        return Err(Error::invalid(format!("d must be >= 2, got {d}")));
    }
    power_law_risk_ln(r, p, sigma, (d as f64).ln(), s, c0)
}

/// [`power_law_risk`] with `ln d` supplied directly.
pub fn power_law_risk_ln(r: f64, p: f64, sigma: f64, ln_d: f64, s: usize, c0: f64) -> Result<BoundReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("power-law exponent p must lie in (0, 1], got {p}")));
    }
    if s == 0 {
        return Err(Error::invalid("sparsity s must be >= 1"));
    }
    let per_k = (1..=s)
        .map(|k| {
            let k = k as f64;
            c0 * (sigma * sigma * k * ln_d + r * r * k.powf(1.0 - 2.0 / p))
        })
        .collect();
    Ok(BoundReport::from_per_k(per_k, &[("C0", c0), ("ln_d", ln_d)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn l1_tail_examples() {
        assert_eq!(l1_tail(&[3.0, 2.0, 1.0], 1), 3.0);
        assert_eq!(l1_tail(&[0.0, -4.0, 0.0], 1), 0.0);
        assert_eq!(l1_tail(&[1.0, 2.0], 5), 0.0);
        assert_eq!(tail_profile(&[3.0, -2.0, 1.0], 3), vec![3.0, 1.0, 0.0]);
    }

    #[test]
    fn ads_examples() {
        let r = ads_bound(&BoundInputs::new(0.0, 1.0, vec![0.0])).unwrap();
        assert!(close(r.bound, 4.0 * SQRT2));
        assert!((r.bound - 5.65685).abs() < 1e-5);

        let r = ads_bound(&BoundInputs::new(0.0, 1.0, vec![2.0, 0.0])).unwrap();
        assert!(close(r.per_k[0], 4.0 * SQRT2 + 4.0));
        assert!(close(r.per_k[1], 8.0));
        assert_eq!(r.k_star, 2);
        assert!(close(r.bound, 8.0));

        let err = ads_bound(&BoundInputs::new(0.5, 1.0, vec![0.0])).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolated(_)));
    }

    #[test]
    fn alasso_examples() {
        let r = alasso_bound(&BoundInputs::new(0.0, 1.0, vec![0.0])).unwrap();
        assert!(close(r.bound, 6.0 * SQRT2));
        assert!((r.bound - 8.48528).abs() < 1e-5);
        assert!(matches!(
            alasso_bound(&BoundInputs::new(0.25, 1.0, vec![0.0])),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn abp_examples() {
        assert_eq!(abp_bound(0.0, 3, 0.7, 5.0, 2.0).unwrap(), 1.4);
        assert_eq!(abp_bound(2.0, 4, 0.0, 3.0, 9.0).unwrap(), 3.0);
        assert_eq!(abp_bound(2.0, 4, 0.5, 1.0, 1.0).unwrap(), 1.5);
    }

    #[test]
    fn separation_examples() {
        let base = BoundInputs::new(0.1, 0.3, vec![1.0, 0.4]).with_norm11(1.7);
        assert_eq!(
            separation_bound(SeparationVariant::Sads, &base, None).unwrap(),
            ads_bound(&base).unwrap()
        );
        assert_eq!(
            separation_bound(SeparationVariant::Salasso, &base, None).unwrap(),
            alasso_bound(&base).unwrap()
        );
        let sads = BoundInputs::new(0.0, 1.0, vec![0.0]).with_s_prime(3);
        let r = separation_bound(SeparationVariant::Sads, &sads, None).unwrap();
        assert!(close(r.bound, 8.0 * SQRT2));
        assert!((r.bound - 11.3137).abs() < 1e-4);
        let sabp = BoundInputs::new(0.0, 1.0, vec![0.0]).with_s_prime(2);
        let r = separation_bound(SeparationVariant::Sabp, &sabp, Some((1.0, 1.0))).unwrap();
        assert_eq!(r.bound, 1.0);
        assert!(separation_bound(SeparationVariant::Sabp, &sabp, None).is_err());
    }

    #[test]
    fn minimax_examples() {
        assert_eq!(minimax_lower(5, 0.3, 0.0, MinimaxMode::Expectation).unwrap().0, 5.0 * 0.09);
        let (v, floor) = minimax_lower(4, 1.0, 0.2, MinimaxMode::Expectation).unwrap();
        assert!(close(v, 10.0 / 3.0) && floor.is_none());
        let (h, floor) = minimax_lower(4, 1.0, 0.2, MinimaxMode::HighProbability).unwrap();
        assert!(close(h, v / 2.0));
        assert!(close(floor.unwrap(), 1.0 - (-0.25f64).exp()));

        assert_eq!(minimax_trace(&DenseMatrix::identity(3), 2.0).unwrap(), MinimaxRisk::Finite(12.0));
        let mut cols = DenseMatrix::identity(3);
        cols.set(1, 1, 0.0);
        assert_eq!(minimax_trace(&cols, 1.0).unwrap(), MinimaxRisk::Unbounded);
    }

    #[test]
    fn power_law_examples() {
        let r = power_law_risk(0.0, 0.5, 1.0, 100, 4, 2.0).unwrap();
        assert_eq!(r.k_star, 1);
        assert!(close(r.bound, 2.0 * 100f64.ln()));

        let r = power_law_risk(3.0, 1.0, 0.0, 50, 6, 1.0).unwrap();
        assert_eq!(r.k_star, 6);
        assert!(close(r.bound, 9.0 / 6.0));

        let r = power_law_risk_ln(2.0, 1.0, 1.0, 1.0, 3, 1.0).unwrap();
        assert!(close(r.per_k[0], 5.0) && close(r.per_k[1], 4.0) && close(r.per_k[2], 3.0 + 4.0 / 3.0));
        assert_eq!(r.k_star, 2);
        assert!(close(r.bound, 4.0));

        assert!(power_law_risk(1.0, 1.5, 1.0, 10, 2, 1.0).is_err());
        assert!(power_law_risk(1.0, 0.0, 1.0, 10, 2, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_tails() {
        assert!(ads_bound(&BoundInputs::new(0.1, 1.0, vec![0.0, 1.0])).is_err());
        let mut i = BoundInputs::new(0.1, 1.0, vec![1.0]);
        i.s = 2;
        assert!(ads_bound(&i).is_err());
    }

    // Second, loop-free evaluation of the same formulas.
    fn ads_oracle(delta: f64, lambda: f64, tails: &[f64], sp: usize) -> Vec<f64> {
        tails
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let kk = (i + 1 + sp) as f64;
                (4.0 * (2.0 * kk).sqrt() * lambda + 2.0 * t / kk.sqrt()) / (1.0 - 2.0 * delta)
            })
            .collect()
    }

    fn alasso_oracle(delta: f64, mu: f64, n11: f64, tails: &[f64], sp: usize) -> Vec<f64> {
        tails
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let kk = (i + 1 + sp) as f64;
                let c0 = 0.5 + n11;
                (4.0 * (2.0 * kk).sqrt() * c0 * mu + 4.0 * t / kk.sqrt()) / (1.0 - 4.0 * delta)
            })
            .collect()
    }

    fn sorted_tail_oracle(x: &[f64], k: usize) -> f64 {
        let mut v: Vec<f64> = x.iter().map(|a| a.abs()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let keep = k.min(v.len());
        v[..v.len() - keep].iter().sum()
    }

    proptest! {
        #[test]
        fn l1_tail_matches_sort_oracle(x in proptest::collection::vec(-10.0f64..10.0, 0..20), k in 0usize..25) {
            let a = l1_tail(&x, k);
            let b = sorted_tail_oracle(&x, k);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
            if k >= 1 {
                let prof = tail_profile(&x, k);
                prop_assert!((prof[k - 1] - b).abs() <= 1e-12 * (1.0 + b));
            }
        }

        #[test]
        fn per_k_matches_duplicate_formulas(
            coeffs in proptest::collection::vec(-5.0f64..5.0, 1..12),
            s in 1usize..8,
            sp in 0usize..4,
            delta in 0.0f64..0.24,
            param in 0.0f64..3.0,
            n11 in 1.0f64..4.0,
        ) {
            let tails = tail_profile(&coeffs, s);
            let inputs = BoundInputs::new(delta, param, tails.clone()).with_norm11(n11).with_s_prime(sp);
            let ads = separation_bound(SeparationVariant::Sads, &inputs, None).unwrap();
            let al = separation_bound(SeparationVariant::Salasso, &inputs, None).unwrap();
            for (a, b) in ads.per_k.iter().zip(ads_oracle(delta, param, &tails, sp)) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b));
            }
            for (a, b) in al.per_k.iter().zip(alasso_oracle(delta, param, n11, &tails, sp)) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b));
            }
            prop_assert!(ads.bound >= 0.0 && al.bound >= 0.0);
            prop_assert_eq!(ads.bound, ads.per_k[ads.k_star - 1]);
            prop_assert!(ads.per_k.iter().all(|v| *v >= ads.bound));
        }
    }
}
