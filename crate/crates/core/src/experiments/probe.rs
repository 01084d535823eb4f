use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{FrameKind, TightFrame};
use crate::linalg;
use crate::noise::{l2_noise_bound, lemma1_threshold};
use crate::rng::{gaussian_vec, hash64, substream};
use crate::sensing::{concentration_probe, draw_sensing, drip_exact, ProbeEnsemble, SensingKind, SensingSpec};

pub const MIN_PROBE_TRIALS: usize = 1000;

fn default_alpha() -> f64 {
    1.0
}

fn default_frame() -> FrameKind {
    FrameKind::RandomOnb
}

/// Random events whose probability has a closed-form floor or cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ProbeEvent {
    /// `‖D*A*z‖∞ ≤ σ√(2(1+α)(1+δ₁) ln d)` for a fixed Gaussian `A` and frame
    /// `D`, with `δ₁` computed exactly.
    Lemma1 {
        sigma: f64,
        m: usize,
        n: usize,
        d: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_frame")]
        frame: FrameKind,
    },
    /// `‖z‖₂ ≤ σ√(m + 2√(m ln m))`.
    Gn { sigma: f64, m: usize },
    /// `|‖Φv‖² − ‖v‖²| ≥ 2δ‖v‖²` for `Φ = [A, I]`, `A` Gaussian `m × n`.
    Lemma6 {
        m: usize,
        #[serde(default)]
        n: Option<usize>,
        delta: f64,
    },
}

impl ProbeEvent {
    pub fn name(&self) -> &'static str {
        match self {
            ProbeEvent::Lemma1 { .. } => "lemma1",
            ProbeEvent::Gn { .. } => "gn",
            ProbeEvent::Lemma6 { .. } => "lemma6",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Success rate should be at least the value.
    Floor,
    /// Violation rate should be at most the value.
    Cap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub event: String,
    pub trials: usize,
    pub rate: f64,
    pub reference: f64,
    pub comparison: Comparison,
    /// `√(p(1 − p)/trials)` at `p = reference`.
    pub binomial_sd: f64,
    /// Rate within three binomial standard deviations of the right side.
    pub consistent: bool,
    /// Threshold tested, for the floor events.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Exact `δ₁` of the drawn design, for `lemma1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
}

fn finish(event: &ProbeEvent, trials: usize, rate: f64, reference: f64, comparison: Comparison) -> ProbeResult {
    let sd = (reference * (1.0 - reference) / trials as f64).sqrt();
    let consistent = match comparison {
        Comparison::Floor => rate >= reference - 3.0 * sd,
        Comparison::Cap => rate <= reference + 3.0 * sd,
    };
    ProbeResult {
        event: event.name().to_string(),
        trials,
        rate,
        reference,
        comparison,
        binomial_sd: sd,
        consistent,
        threshold: None,
        delta1: None,
    }
}

fn success_rate(trials: usize, hit: impl Fn(u64) -> bool + Sync) -> f64 {
    let hits: usize = (0..trials as u64).into_par_iter().map(|t| usize::from(hit(t))).sum();
    hits as f64 / trials as f64
}

/// Monte Carlo frequency of `event` next to its closed-form floor or cap.
///
/// Trial `t` uses its own stream, so the result does not depend on the
/// thread count.
pub fn empirical_probability(event: &ProbeEvent, trials: usize, seed: u64) -> Result<ProbeResult> {
    if trials < MIN_PROBE_TRIALS {
        return Err(Error::invalid(format!("probes need trials >= {MIN_PROBE_TRIALS}, got {trials}")));
    }
    match *event {
        ProbeEvent::Lemma1 { sigma, m, n, d, alpha, frame } => {
            let frame = TightFrame::build(frame, n, d, hash64(&[seed, 1]))?;
            let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, m, n, hash64(&[seed, 2])))?;
            let delta1 = drip_exact(&a, &frame, 1)?.delta;
            if delta1 >= 1.0 {
                return Err(Error::HypothesisViolated(format!(
                    "drawn design has delta_1 = {delta1} >= 1; increase m"
                )));
            }
            let (threshold, floor) = lemma1_threshold(sigma, d, alpha, delta1)?;
            let ad = a.matmul(frame.matrix())?;
            let rate = success_rate(trials, |t| {
                let z = gaussian_vec(&mut substream(hash64(&[seed, 3]), t), m, sigma);
                linalg::norm_inf(&ad.matvec_transpose_unchecked(&z)) <= threshold
            });
            let mut out = finish(event, trials, rate, floor, Comparison::Floor);
            out.threshold = Some(threshold);
            out.delta1 = Some(delta1);
            Ok(out)
        }
        ProbeEvent::Gn { sigma, m } => {
            let (threshold, floor) = l2_noise_bound(sigma, m)?;
            let rate = success_rate(trials, |t| {
                let z = gaussian_vec(&mut substream(seed, t), m, sigma);
                linalg::norm2(&z) <= threshold
            });
            let mut out = finish(event, trials, rate, floor, Comparison::Floor);
            out.threshold = Some(threshold);
            Ok(out)
        }
        ProbeEvent::Lemma6 { m, n, delta } => {
            let ensemble = ProbeEnsemble::GaussianWithIdentity { m, n: n.unwrap_or(m) };
            let rate = concentration_probe(&ensemble, delta, trials, seed)?;
            let cap = 3.0 * (-(m as f64) * delta * delta / 8.0).exp();
            Ok(finish(event, trials, rate, cap.min(1.0), Comparison::Cap))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_always_succeeds() {
        let gn = empirical_probability(&ProbeEvent::Gn { sigma: 0.0, m: 20 }, 1000, 1).unwrap();
        assert_eq!(gn.rate, 1.0);
        let l1 = ProbeEvent::Lemma1 { sigma: 0.0, m: 20, n: 10, d: 10, alpha: 1.0, frame: FrameKind::RandomOnb };
        assert_eq!(empirical_probability(&l1, 1000, 1).unwrap().rate, 1.0);
    }

    #[test]
    fn gn_meets_floor_at_m_100() {
        let r = empirical_probability(&ProbeEvent::Gn { sigma: 1.0, m: 100 }, 2000, 5).unwrap();
        assert!((r.reference - 0.99).abs() < 1e-15);
        assert!(r.consistent, "{r:?}");
    }

    #[test]
    fn rejects_few_trials_and_is_reproducible() {
        assert!(empirical_probability(&ProbeEvent::Gn { sigma: 1.0, m: 10 }, 999, 0).is_err());
        let e = ProbeEvent::Lemma6 { m: 50, n: None, delta: 0.5 };
        assert_eq!(empirical_probability(&e, 1000, 4).unwrap(), empirical_probability(&e, 1000, 4).unwrap());
    }

    #[test]
    fn event_json() {
        let e: ProbeEvent = serde_json::from_str(r#"{"event":"lemma1","sigma":1,"m":100,"n":100,"d":100}"#).unwrap();
        assert_eq!(e.name(), "lemma1");
        assert!(matches!(e, ProbeEvent::Lemma1 { alpha, .. } if alpha == 1.0));
    }
}
