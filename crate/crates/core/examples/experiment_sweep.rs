//! A seeded sweep over the number of measurements, written as CSV and plot data.

use frame_recovery::experiments::{run_experiment, to_plotdata, write_outputs, ExperimentPlan};

const PLAN: &str = r#"{
    "frame": {"kind": "random_onb", "n": 64, "d": 64},
    "sensing": {"kind": "gaussian", "m": 32, "n": 64},
    "signal": {"model": "exact_analysis_sparse", "s": 4, "amplitude_law": "rademacher"},
    "noise": {"model": "gaussian", "sigma": 0.02},
    "methods": [
        {"method": "ads", "parameter": {"rule": "paper_formula"}},
        {"method": "alasso", "parameter": {"rule": "paper_formula"}},
        {"method": "abp", "parameter": {"rule": "paper_formula"}}
    ],
    "sweep": {"m": [16, 24, 32, 48]},
    "trials_per_cell": 5,
    "master_seed": 2024,
    "outputs": {"plotdata": "errors.dat"}
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = ExperimentPlan::from_json(PLAN)?;
    let out = run_experiment(&plan, None)?;
    for c in &out.aggregate.cells {
        println!(
            "{:<7} m = {:>2}: median error {:.4}, converged {}/{}",
            c.method.name(),
            c.m,
            c.median_error_l2,
            c.converged,
            c.trials
        );
    }
    let dir = std::env::temp_dir().join("frame-recovery-sweep");
    std::fs::create_dir_all(&dir)?;
    for path in write_outputs(&plan, &out, &dir)? {
        println!("wrote {}", path.display());
    }
    print!("{}", to_plotdata(&out.records, None));
    Ok(())
}
