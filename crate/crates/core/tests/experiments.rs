use frame_recovery::experiments::{
    emit_report, generate_signal, read_csv, run_experiment, run_trial, trial_seed, write_outputs, AmplitudeLaw,
    ExperimentPlan, MethodKind, ReportFormat, SignalModel, SignalSpec, SweepAxis,
};
use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::rng::hash64;

const SEPARATION_PLAN: &str = r#"{
    "frame": {"kind": "random_onb", "n": 30, "d": 30},
    "sensing": {"kind": "gaussian", "m": 24, "n": 30},
    "signal": {"model": "exact_analysis_sparse", "s": 2},
    "noise": {"model": "sparse", "s_prime": 2, "amplitude": 1.0},
    "methods": [
        {"method": "sabp", "parameter": {"rule": "explicit", "value": 0.0}},
        {"method": "abp", "parameter": {"rule": "explicit", "value": 0.0}}
    ],
    "trials_per_cell": 5,
    "master_seed": 99
}"#;

#[test]
fn separation_beats_plain_recovery_on_outliers() {
    let plan = ExperimentPlan::from_json(SEPARATION_PLAN).unwrap();
    let out = run_experiment(&plan, Some(1)).unwrap();
    let cell = |m: MethodKind| out.aggregate.cells.iter().find(|c| c.method == m).unwrap();
    let (sep, plain) = (cell(MethodKind::Sabp), cell(MethodKind::Abp));
    assert_eq!(sep.success_rate, Some(1.0));
    assert!(plain.median_error_l2 > 100.0 * sep.median_error_l2.max(1e-12));
    assert!(out.records.iter().filter(|r| r.method == MethodKind::Sabp).all(|r| r.error_e.unwrap() < 1e-4));
}

#[test]
fn seeds_follow_the_documented_hash() {
    let plan = ExperimentPlan::from_json(SEPARATION_PLAN).unwrap();
    let rec = run_trial(&plan, 1, 3).unwrap();
    assert_eq!(rec.seed, hash64(&[99, 1, 3]));
    assert_eq!(trial_seed(99, 1, 3), rec.seed);
    assert_eq!(rec, run_trial(&plan, 1, 3).unwrap());
}

#[test]
fn power_law_signals_with_abp() {
    let text = r#"{
        "frame": {"kind": "random_onb", "n": 32, "d": 32},
        "sensing": {"kind": "gaussian", "m": 24, "n": 32},
        "signal": {"model": "power_law", "R": 1.0, "p": 0.5},
        "noise": {"model": "bounded", "epsilon": 0.01},
        "methods": [{"method": "abp", "parameter": {"rule": "explicit", "value": 0.01}}],
        "sweep": {"m": [16, 28]},
        "trials_per_cell": 4,
        "master_seed": 5
    }"#;
    let plan = ExperimentPlan::from_json(text).unwrap();
    let out = run_experiment(&plan, None).unwrap();
    assert_eq!(out.records.len(), 8);
    assert!(out.records.iter().all(|r| r.converged && r.error_l2.is_finite()));
    let medians: Vec<f64> = out.aggregate.cells.iter().map(|c| c.median_error_l2).collect();
    assert!(medians[1] < medians[0], "{medians:?}");
}

#[test]
fn power_law_coefficients_decay() {
    let frame = TightFrame::build(FrameKind::RandomOnb, 20, 20, 1).unwrap();
    let spec = SignalSpec::new(SignalModel::PowerLaw { r: 2.0, p: 0.7 }, AmplitudeLaw::Rademacher);
    let sig = generate_signal(&spec, &frame, 3).unwrap();
    let mut mags: Vec<f64> = sig.coefficients.iter().map(|c| c.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    for (i, m) in mags.iter().enumerate() {
        assert!(*m <= 2.0 * ((i + 1) as f64).powf(-1.0 / 0.7) + 1e-12);
    }
    let redundant = TightFrame::build(FrameKind::UnionOfOnb, 10, 20, 1).unwrap();
    let err = generate_signal(&spec, &redundant, 3).unwrap_err();
    assert!(err.to_string().contains("orthonormal"), "{err}");
}

#[test]
fn outputs_land_in_the_directory() {
    let mut plan = ExperimentPlan::from_json(SEPARATION_PLAN).unwrap();
    plan.outputs.plotdata = Some("plot/errors.dat".into());
    plan.outputs.plot_axis = Some(SweepAxis::SPrime);
    let out = run_experiment(&plan, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("plot")).unwrap();
    let written = write_outputs(&plan, &out, dir.path()).unwrap();
    assert_eq!(written.len(), 4);
    let plot = std::fs::read_to_string(dir.path().join("plot/errors.dat")).unwrap();
    assert!(plot.starts_with("# sweep axis: s_prime"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("records.json")).unwrap()).unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), out.records.len());
    assert_eq!(read_csv(dir.path().join("records.csv")).unwrap(), out.records);

    assert!(emit_report(&[], None, ReportFormat::Json, dir.path().join("x.json"), None).is_err());
}

#[test]
fn plan_files_reject_unknown_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    std::fs::write(&path, SEPARATION_PLAN.replace("\"sabp\"", "\"lasso\"")).unwrap();
    assert!(ExperimentPlan::from_file(&path).is_err());
    assert!(ExperimentPlan::from_file(dir.path().join("missing.json")).is_err());
}
