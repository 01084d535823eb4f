use serde::{Deserialize, Serialize};

use crate::bounds::tail_profile;
use crate::error::{Error, Result};
use crate::frames::TightFrame;
use crate::rng::{random_permutation, random_subset, rademacher, rng_from_seed, standard_normal};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SignalModel {
    /// `f = Dx` with `‖x‖₀ = s`; needs an orthonormal `D` so that `D*f = x`.
    ExactAnalysisSparse { s: usize },
    /// `f = Dx` with `‖x‖₀ = s` for any frame.
    SynthesisSparse { s: usize },
    /// Coefficients `R·j^{−1/p}` with random signs and positions.
    PowerLaw {
        #[serde(rename = "R", alias = "r")]
        r: f64,
        p: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeLaw {
    /// All nonzero coefficients equal to 1.
    Unit,
    #[default]
    Rademacher,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub model: SignalModel,
    #[serde(default)]
    pub amplitude_law: AmplitudeLaw,
    #[serde(default)]
    pub seed: u64,
}

impl SignalSpec {
    pub fn new(model: SignalModel, amplitude_law: AmplitudeLaw) -> Self {
        SignalSpec { model, amplitude_law, seed: 0 }
    }

    /// Sparsity level, or `None` for the power-law model.
    pub fn sparsity(&self) -> Option<usize> {
        match self.model {
            SignalModel::ExactAnalysisSparse { s } | SignalModel::SynthesisSparse { s } => Some(s),
            SignalModel::PowerLaw { .. } => None,
        }
    }

    /// Copy with the sparsity replaced (no-op for the power-law model).
    pub fn with_sparsity(&self, value: usize) -> Self {
        let mut out = self.clone();
        if let SignalModel::ExactAnalysisSparse { s } | SignalModel::SynthesisSparse { s } = &mut out.model {
            *s = value;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedSignal {
    pub f: Vec<f64>,
    /// `D*f` as computed from `f`.
    pub coefficients: Vec<f64>,
    /// `l1_tail(D*f, k)` for `k = 1..=s`, or `1..=d` for the power-law model.
    pub tails: Vec<f64>,
}

/// Draws a test signal. `spec.seed` is mixed with `seed`.
pub fn generate_signal(spec: &SignalSpec, frame: &TightFrame, seed: u64) -> Result<GeneratedSignal> {
    let d = frame.d();
    let mut rng = rng_from_seed(crate::rng::hash64(&[seed, spec.seed]));
    let (x, tail_len) = match spec.model {
        SignalModel::ExactAnalysisSparse { s } | SignalModel::SynthesisSparse { s } => {
            if s > d {
                return Err(Error::invalid(format!("sparsity {s} exceeds frame size d = {d}")));
            }
            if matches!(spec.model, SignalModel::ExactAnalysisSparse { .. }) && !frame.is_orthonormal() {
                return Err(Error::invalid(format!(
                    "exact_analysis_sparse needs an orthonormal frame (got {}x{}); use synthesis_sparse for redundant frames",
                    frame.n(),
                    d
                )));
            }
            let mut x = vec![0.0; d];
            for j in random_subset(&mut rng, d, s) {
                x[j] = match spec.amplitude_law {
                    AmplitudeLaw::Unit => 1.0,
                    AmplitudeLaw::Rademacher => rademacher(&mut rng),
                    AmplitudeLaw::Gaussian => standard_normal(&mut rng),
                };
            }
            (x, s)
        }
        SignalModel::PowerLaw { r, p } => {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid(format!("power-law R must be > 0, got {r}")));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::invalid(format!("power-law p must lie in (0, 1], got {p}")));
            }
            if !frame.is_orthonormal() {
                return Err(Error::invalid("power_law signals need an orthonormal frame"));
            }
            let mut x = vec![0.0; d];
            for (j, pos) in random_permutation(&mut rng, d).into_iter().enumerate() {
                x[pos] = rademacher(&mut rng) * r * ((j + 1) as f64).powf(-1.0 / p);
            }
            (x, d)
        }
    };
    let f = frame.synthesis(&x)?;
    let coefficients = frame.analysis(&f)?;
    let tails = tail_profile(&coefficients, tail_len);
    Ok(GeneratedSignal { f, coefficients, tails })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::l1_tail;
    use crate::frames::FrameKind;
    use crate::linalg::count_nonzero;

    #[test]
    fn exact_model_on_onb() {
        let frame = TightFrame::build(FrameKind::RandomOnb, 12, 12, 4).unwrap();
        let spec = SignalSpec::new(SignalModel::ExactAnalysisSparse { s: 3 }, AmplitudeLaw::Rademacher);
        let sig = generate_signal(&spec, &frame, 9).unwrap();
        assert_eq!(count_nonzero(&sig.coefficients, 1e-10), 3);
        assert_eq!(sig.tails.len(), 3);
        assert!(sig.tails[2] < 1e-12);
    }

    #[test]
    fn exact_model_rejects_redundant_frame() {
        let frame = TightFrame::build(FrameKind::UnionOfOnb, 6, 12, 4).unwrap();
        let spec = SignalSpec::new(SignalModel::ExactAnalysisSparse { s: 2 }, AmplitudeLaw::Unit);
        let err = generate_signal(&spec, &frame, 1).unwrap_err().to_string();
        assert!(err.contains("synthesis_sparse"), "{err}");
    }

    #[test]
    fn power_law_magnitudes() {
        let frame = TightFrame::build(FrameKind::Identity, 10, 10, 0).unwrap();
        let spec = SignalSpec::new(SignalModel::PowerLaw { r: 2.0, p: 0.5 }, AmplitudeLaw::Unit);
        let sig = generate_signal(&spec, &frame, 3).unwrap();
        let mut mags: Vec<f64> = sig.coefficients.iter().map(|c| c.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        for (j, m) in mags.iter().enumerate() {
            assert_eq!(*m, 2.0 * ((j + 1) as f64).powf(-2.0));
        }
    }

    #[test]
    fn synthesis_tails_recompute() {
        let frame = TightFrame::build(FrameKind::UnionOfOnb, 8, 16, 2).unwrap();
        let spec = SignalSpec::new(SignalModel::SynthesisSparse { s: 3 }, AmplitudeLaw::Gaussian);
        let sig = generate_signal(&spec, &frame, 5).unwrap();
        let coeffs = frame.analysis(&sig.f).unwrap();
        for k in 1..=3 {
            assert!((sig.tails[k - 1] - l1_tail(&coeffs, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_json_shape() {
        let spec: SignalSpec =
            serde_json::from_str(r#"{"model":"power_law","R":1.5,"p":0.7,"amplitude_law":"unit","seed":2}"#).unwrap();
        assert_eq!(spec.model, SignalModel::PowerLaw { r: 1.5, p: 0.7 });
        let spec: SignalSpec = serde_json::from_str(r#"{"model":"synthesis_sparse","s":4}"#).unwrap();
        assert_eq!(spec.sparsity(), Some(4));
        assert_eq!(spec.amplitude_law, AmplitudeLaw::Rademacher);
    }
}
