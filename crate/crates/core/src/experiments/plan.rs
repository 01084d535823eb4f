use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::signal::SignalSpec;
use crate::error::{Error, Result};
use crate::frames::{FrameKind, FrameSpec};
use crate::noise::NoiseSpec;
use crate::sensing::{SensingKind, SensingSpec};
use crate::solvers::{SeparationVariant, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Abp,
    Ads,
    Alasso,
    Sabp,
    Sads,
    Salasso,
}

impl MethodKind {
    pub const ALL: [MethodKind; 6] = [
        MethodKind::Abp,
        MethodKind::Ads,
        MethodKind::Alasso,
        MethodKind::Sabp,
        MethodKind::Sads,
        MethodKind::Salasso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Abp => "abp",
            MethodKind::Ads => "ads",
            MethodKind::Alasso => "alasso",
            MethodKind::Sabp => "sabp",
            MethodKind::Sads => "sads",
            MethodKind::Salasso => "salasso",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown method {name:?}; expected abp, ads, alasso, sabp, sads or salasso")))
    }

    pub fn separation(self) -> Option<SeparationVariant> {
        match self {
            MethodKind::Sabp => Some(SeparationVariant::Sabp),
            MethodKind::Sads => Some(SeparationVariant::Sads),
            MethodKind::Salasso => Some(SeparationVariant::Salasso),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ParameterRule {
    Explicit { value: f64 },
    /// `λ = 2σ√(2 ln d)`, `μ = 4σ√(2 ln d)` or `ε = σ√(m + 2√(m ln m))`;
    /// separation variants use `d + M` coefficients.
    PaperFormula,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: MethodKind,
    pub parameter: ParameterRule,
    /// Compute the exact D-RIP constant and check the bound hypotheses per
    /// trial (ADS and ALASSO only).
    #[serde(default)]
    pub certify: bool,
}

/// Grids over the sweep axes. An empty grid keeps the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sweep {
    pub m: Vec<usize>,
    pub s: Vec<usize>,
    pub sigma: Vec<f64>,
    pub s_prime: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    M,
    S,
    Sigma,
    SPrime,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::M => "m",
            SweepAxis::S => "s",
            SweepAxis::Sigma => "sigma",
            SweepAxis::SPrime => "s_prime",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        [SweepAxis::M, SweepAxis::S, SweepAxis::Sigma, SweepAxis::SPrime]
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown sweep axis {name:?}; expected m, s, sigma or s_prime")))
    }
}

/// Output file names, resolved against the run's output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub plotdata: Option<PathBuf>,
    pub aggregate: Option<PathBuf>,
    /// Axis for plotdata; defaults to the first axis with more than one value.
    pub plot_axis: Option<SweepAxis>,
    /// Measure solve time. Off by default so that output files are a pure
    /// function of the plan; `wall_time_ms` is then written as 0.
    pub record_wall_time: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            csv: Some("records.csv".into()),
            json: Some("records.json".into()),
            plotdata: None,
            aggregate: Some("aggregate.json".into()),
            plot_axis: None,
            record_wall_time: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub frame: FrameSpec,
    pub sensing: SensingSpec,
    pub signal: SignalSpec,
    pub noise: NoiseSpec,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub sweep: Sweep,
    pub trials_per_cell: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// One grid point of the sweep for one method.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub method: MethodSpec,
    pub m: usize,
    pub s: usize,
    pub sigma: f64,
    pub s_prime: usize,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("plan lists no methods"));
        }
        if self.trials_per_cell == 0 {
            return Err(Error::invalid("trials_per_cell must be >= 1"));
        }
        if self.frame.kind != FrameKind::FromFile && self.sensing.kind != SensingKind::FromFile && self.frame.n != self.sensing.n {
            return Err(Error::invalid(format!(
                "frame has n = {} rows but sensing has n = {} columns",
                self.frame.n, self.sensing.n
            )));
        }
        if self.sweep.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid("sweep sigma values must be finite and >= 0"));
        }
        self.solver.validate()
    }

    fn base_s(&self) -> usize {
        self.signal.sparsity().unwrap_or(1)
    }

    fn axis_values(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>, Vec<usize>) {
        fn or<T: Clone>(grid: &[T], base: T) -> Vec<T> {
            if grid.is_empty() {
                vec![base]
            } else {
                grid.to_vec()
            }
        }
        (
            or(&self.sweep.m, self.sensing.m),
            or(&self.sweep.s, self.base_s()),
            or(&self.sweep.sigma, self.noise.sigma()),
            or(&self.sweep.s_prime, self.noise.s_prime()),
        )
    }

    /// Cells in index order: `m`, then `s`, `sigma`, `s_prime`, and the
    /// method varying fastest.
    pub fn cells(&self) -> Vec<Cell> {
        let (ms, ss, sigmas, sps) = self.axis_values();
        let mut out = Vec::new();
        for &m in &ms {
            for &s in &ss {
                for &sigma in &sigmas {
                    for &s_prime in &sps {
                        for method in &self.methods {
                            out.push(Cell { index: out.len(), method: method.clone(), m, s, sigma, s_prime });
                        }
                    }
                }
            }
        }
        out
    }

    /// First axis whose grid has more than one value.
    pub fn varying_axis(&self) -> Option<SweepAxis> {
        let (ms, ss, sigmas, sps) = self.axis_values();
        [
            (SweepAxis::M, ms.len()),
            (SweepAxis::S, ss.len()),
            (SweepAxis::Sigma, sigmas.len()),
            (SweepAxis::SPrime, sps.len()),
        ]
        .into_iter()
        .find(|(_, n)| *n > 1)
        .map(|(a, _)| a)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const SMALL_PLAN: &str = r#"{
        "frame": {"kind": "random_onb", "n": 16, "d": 16},
        "sensing": {"kind": "gaussian", "m": 12, "n": 16},
        "signal": {"model": "exact_analysis_sparse", "s": 2, "amplitude_law": "rademacher"},
        "noise": {"model": "gaussian", "sigma": 0.01},
        "methods": [
            {"method": "ads", "parameter": {"rule": "paper_formula"}},
            {"method": "alasso", "parameter": {"rule": "explicit", "value": 0.05}}
        ],
        "sweep": {"m": [10, 14], "s": [1, 2]},
        "trials_per_cell": 2,
        "master_seed": 7
    }"#;

    #[test]
    fn parses_and_enumerates_cells() {
        let plan = ExperimentPlan::from_json(SMALL_PLAN).unwrap();
        let cells = plan.cells();
        assert_eq!(cells.len(), 2 * 2 * 2);
        assert_eq!(cells[0].method.method, MethodKind::Ads);
        assert_eq!(cells[1].method.method, MethodKind::Alasso);
        assert_eq!((cells[7].m, cells[7].s), (14, 2));
        assert!(cells.iter().enumerate().all(|(i, c)| c.index == i));
        assert_eq!(plan.varying_axis(), Some(SweepAxis::M));
        assert_eq!(plan.outputs, Outputs::default());
    }

    #[test]
    fn json_round_trip() {
        let plan = ExperimentPlan::from_json(SMALL_PLAN).unwrap();
        let again = ExperimentPlan::from_json(&plan.to_json().unwrap()).unwrap();
        assert_eq!(plan, again);
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let bad = SMALL_PLAN.replace(r#""m": 12, "n": 16"#, r#""m": 12, "n": 15"#);
        assert!(ExperimentPlan::from_json(&bad).is_err());
        let bad = SMALL_PLAN.replace(r#""trials_per_cell": 2"#, r#""trials_per_cell": 0"#);
        assert!(ExperimentPlan::from_json(&bad).is_err());
    }

    #[test]
    fn method_names() {
        for m in MethodKind::ALL {
            assert_eq!(MethodKind::parse(m.name()).unwrap(), m);
        }
        assert!(MethodKind::parse("lasso").is_err());
    }
}
