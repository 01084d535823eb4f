//! Noise generators and closed-form noise thresholds.
//!
//! `log` is the natural logarithm everywhere.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{FrameSpec, TightFrame};
use crate::linalg::{self, check_len};
use crate::rng::{gaussian_vec, rademacher, random_subset, rng_from_seed, unit_vector};

/// Noise model for `y = Af + z + e`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// `z ~ N(0, σ²I)`.
    Gaussian { sigma: f64 },
    /// `z` uniform in the ℓ₂ ball of radius `epsilon`.
    Bounded { epsilon: f64 },
    /// `e` sparse in `Ω` (identity when absent).
    Sparse {
        s_prime: usize,
        amplitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega: Option<FrameSpec>,
    },
    /// Gaussian `z` plus sparse `e`.
    Composite {
        sigma: f64,
        s_prime: usize,
        amplitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega: Option<FrameSpec>,
    },
}

impl NoiseSpec {
    pub fn sigma(&self) -> f64 {
        match self {
            NoiseSpec::Gaussian { sigma } | NoiseSpec::Composite { sigma, .. } => *sigma,
            _ => 0.0,
        }
    }

    pub fn s_prime(&self) -> usize {
        match self {
            NoiseSpec::Sparse { s_prime, .. } | NoiseSpec::Composite { s_prime, .. } => *s_prime,
            _ => 0,
        }
    }

    pub fn omega_spec(&self) -> Option<&FrameSpec> {
        match self {
            NoiseSpec::Sparse { omega, .. } | NoiseSpec::Composite { omega, .. } => omega.as_ref(),
            _ => None,
        }
    }

    /// Copy with `sigma` replaced (no-op for models without a Gaussian part).
    pub fn with_sigma(&self, value: f64) -> Self {
        let mut out = self.clone();
        if let NoiseSpec::Gaussian { sigma } | NoiseSpec::Composite { sigma, .. } = &mut out {
            *sigma = value;
        }
        out
    }

    /// Copy with `s_prime` replaced (no-op for models without a sparse part).
    pub fn with_s_prime(&self, value: usize) -> Self {
        let mut out = self.clone();
        if let NoiseSpec::Sparse { s_prime, .. } | NoiseSpec::Composite { s_prime, .. } = &mut out {
            *s_prime = value;
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let (sigma, epsilon, amplitude) = match self {
            NoiseSpec::Gaussian { sigma } => (*sigma, 0.0, 0.0),
            NoiseSpec::Bounded { epsilon } => (0.0, *epsilon, 0.0),
            NoiseSpec::Sparse { amplitude, .. } => (0.0, 0.0, *amplitude),
            NoiseSpec::Composite { sigma, amplitude, .. } => (*sigma, 0.0, *amplitude),
        };
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        if !amplitude.is_finite() {
            return Err(Error::invalid("sparse noise amplitude must be finite"));
        }
        Ok(())
    }
}

/// One noise realization.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseDraw {
    /// Dense part `z`.
    pub z: Vec<f64>,
    /// Sparse part `e` (zeros when the model has none).
    pub e: Vec<f64>,
    /// `‖Ωᵀe‖₀` actually achieved, when the model has a sparse part.
    pub analysis_sparsity: Option<usize>,
    /// Set when a redundant `Ω` forced the synthesis construction.
    pub warning: Option<String>,
}

impl NoiseDraw {
    /// `z + e`.
    pub fn total(&self) -> Vec<f64> {
        linalg::add(&self.z, &self.e)
    }
}

/// Draws `(z, e)` of length `m`. `omega` defaults to `I_m` for sparse models.
pub fn draw_noise(spec: &NoiseSpec, m: usize, omega: Option<&TightFrame>, seed: u64) -> Result<NoiseDraw> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut draw = NoiseDraw {
        z: vec![0.0; m],
        e: vec![0.0; m],
        analysis_sparsity: None,
        warning: None,
    };
    match spec {
        NoiseSpec::Gaussian { sigma } => draw.z = gaussian_vec(&mut rng, m, *sigma),
        NoiseSpec::Bounded { epsilon } => {
            if m > 0 && *epsilon > 0.0 {
                let u: f64 = rng.random();
                let radius = epsilon * u.powf(1.0 / m as f64);
                draw.z = linalg::scale(&unit_vector(&mut rng, m), radius);
            }
        }
        NoiseSpec::Sparse { s_prime, amplitude, .. } => {
            sparse_part(&mut draw, &mut rng, m, *s_prime, *amplitude, omega)?;
        }
        NoiseSpec::Composite { sigma, s_prime, amplitude, .. } => {
            draw.z = gaussian_vec(&mut rng, m, *sigma);
            sparse_part(&mut draw, &mut rng, m, *s_prime, *amplitude, omega)?;
        }
    }
    Ok(draw)
}

fn sparse_part(
    draw: &mut NoiseDraw,
    rng: &mut crate::rng::SeededRng,
    m: usize,
    s_prime: usize,
    amplitude: f64,
    omega: Option<&TightFrame>,
) -> Result<()> {
    let identity;
    let omega = match omega {
        Some(o) => o,
        None => {
            identity = TightFrame::build(crate::frames::FrameKind::Identity, m.max(1), m.max(1), 0)?;
            &identity
        }
    };
    check_len("sparse noise frame rows vs measurements", m, omega.n())?;
    let big_m = omega.d();
    if s_prime > big_m {
        return Err(Error::invalid(format!("s' = {s_prime} exceeds the {big_m} columns of Omega")));
    }
    let positions = random_subset(rng, big_m, s_prime);
    let mut x = vec![0.0; big_m];
    for &j in &positions {
        x[j] = amplitude * rademacher(rng);
    }
    draw.e = omega.synthesis(&x)?;
    let coeffs = omega.analysis(&draw.e)?;
    let achieved = linalg::count_nonzero(&coeffs, 1e-12 * amplitude.abs().max(f64::MIN_POSITIVE));
    draw.analysis_sparsity = Some(achieved);
    if !omega.is_orthonormal() {
        draw.warning = Some(format!(
            "redundant Omega: sparse noise built by synthesis with {s_prime} atoms; achieved analysis sparsity {achieved}"
        ));
    }
    Ok(())
}

fn check_sigma_d(sigma: f64, d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid(format!("threshold needs d >= 2 so that log d > 0, got d = {d}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    Ok(())
}

/// Dantzig selector threshold `λ = 2σ√(2 ln d)`.
pub fn ads_lambda(sigma: f64, d: usize) -> Result<f64> {
    check_sigma_d(sigma, d)?;
    Ok(2.0 * sigma * (2.0 * (d as f64).ln()).sqrt())
}

/// LASSO weight `μ = 4σ√(2 ln d)`.
pub fn alasso_mu(sigma: f64, d: usize) -> Result<f64> {
    check_sigma_d(sigma, d)?;
    Ok(4.0 * sigma * (2.0 * (d as f64).ln()).sqrt())
}

/// Gaussian tail threshold `σ√(2(1+α)(1+δ₁) ln d)` with its probability floor
/// `1 − 1/(d^α √((1+α)π ln d))`.
///
/// `delta1 = 1` is accepted as the formal limit `(1 + δ₁) ≤ 2`.
pub fn lemma1_threshold(sigma: f64, d: usize, alpha: f64, delta1: f64) -> Result<(f64, f64)> {
    check_sigma_d(sigma, d)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
    }
    if !(0.0..=1.0).contains(&delta1) {
        return Err(Error::invalid(format!("delta1 must lie in [0, 1], got {delta1}")));
    }
    let ln_d = (d as f64).ln();
    let threshold = sigma * (2.0 * (1.0 + alpha) * (1.0 + delta1) * ln_d).sqrt();
    let floor = 1.0 - 1.0 / ((d as f64).powf(alpha) * ((1.0 + alpha) * PI * ln_d).sqrt());
    Ok((threshold, floor))
}

/// High-probability ℓ₂ bound `σ√(m + 2√(m ln m))` for Gaussian noise, with floor `1 − 1/m`.
pub fn l2_noise_bound(sigma: f64, m: usize) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::invalid("l2 noise bound needs m >= 1"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    let mf = m as f64;
    let bound = sigma * (mf + 2.0 * (mf * mf.ln()).sqrt()).sqrt();
    Ok((bound, 1.0 - 1.0 / mf))
}

/// Recommended parameters for Gaussian noise of level `sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub sigma: f64,
    pub d: usize,
    pub m: usize,
    pub lambda_ads: f64,
    pub mu_alasso: f64,
    pub epsilon_l2: f64,
    pub lambda_probability_floor: f64,
    pub mu_probability_floor: f64,
    pub epsilon_probability_floor: f64,
}

impl ThresholdReport {
    pub fn new(sigma: f64, d: usize, m: usize) -> Result<Self> {
        let lambda_ads = ads_lambda(sigma, d)?;
        let mu_alasso = alasso_mu(sigma, d)?;
        let (_, floor) = lemma1_threshold(sigma, d, 1.0, 1.0)?;
        let (epsilon_l2, eps_floor) = l2_noise_bound(sigma, m)?;
        Ok(ThresholdReport {
            sigma,
            d,
            m,
            lambda_ads,
            mu_alasso,
            epsilon_l2,
            lambda_probability_floor: floor,
            mu_probability_floor: floor,
            epsilon_probability_floor: eps_floor,
        })
    }
}
