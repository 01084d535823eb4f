use approx::assert_relative_eq;
use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::linalg::{self, DenseMatrix};
use frame_recovery::noise::{ads_lambda, draw_noise, NoiseSpec};
use frame_recovery::rng::{random_subset, rng_from_seed, standard_normal};
use frame_recovery::sensing::{draw_sensing, SensingKind, SensingSpec};
use frame_recovery::solvers::{
    solve, solve_abp, solve_ads, solve_alasso, verify_outcome, Engine, Method, RecoveryProblem, SolverConfig,
};
use frame_recovery::Error;

fn instance(m: usize, n: usize, d: usize, kind: FrameKind, s: usize, seed: u64) -> (DenseMatrix, TightFrame, Vec<f64>) {
    let frame = TightFrame::build(kind, n, d, seed).unwrap();
    let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, m, n, seed + 1)).unwrap();
    let mut rng = rng_from_seed(seed + 2);
    let mut x = vec![0.0; d];
    for j in random_subset(&mut rng, d, s) {
        x[j] = standard_normal(&mut rng);
    }
    (a, frame.clone(), frame.synthesis(&x).unwrap())
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    linalg::norm2(&linalg::sub(a, b)) / linalg::norm2(b)
}

#[test]
fn noiseless_recovery_by_every_program() {
    let cfg = SolverConfig::default();
    let (a, frame, f) = instance(32, 48, 48, FrameKind::RandomOnb, 4, 11);
    let y = a.matvec(&f).unwrap();
    for method in [Method::Abp { epsilon: 0.0 }, Method::Ads { lambda: 0.0 }, Method::Alasso { mu: 1e-7 }] {
        let p = RecoveryProblem::new(a.clone(), frame.clone(), y.clone(), method).unwrap();
        let out = solve(&p, &cfg).unwrap();
        assert!(out.converged, "{}", method.name());
        assert!(rel(&out.f_hat, &f) < 1e-4, "{}: {}", method.name(), rel(&out.f_hat, &f));
    }
}

#[test]
fn noisy_ads_beats_least_norm_and_verifies() {
    let cfg = SolverConfig::default();
    let (a, frame, f) = instance(40, 64, 64, FrameKind::RandomOnb, 3, 5);
    let sigma = 0.02;
    let z = draw_noise(&NoiseSpec::Gaussian { sigma }, 40, None, 8).unwrap().z;
    let y = linalg::add(&a.matvec(&f).unwrap(), &z);
    let lambda = ads_lambda(sigma, 64).unwrap();
    let p = RecoveryProblem::new(a, frame, y, Method::Ads { lambda }).unwrap();
    let out = solve_ads(&p, &cfg).unwrap();
    assert!(out.converged);
    assert_eq!(out.engine, Engine::Pdhg);
    let err = linalg::norm2(&linalg::sub(&out.f_hat, &f));
    assert!(err < 0.5 * linalg::norm2(&f), "{err}");
    let report = verify_outcome(&p, &out, Some(&f), None, &cfg).unwrap();
    assert!(report.all_pass(), "{report:?}");
}

#[test]
fn redundant_frame_alasso_certifies() {
    let cfg = SolverConfig::default();
    let (a, frame, f) = instance(20, 24, 48, FrameKind::UnionOfOnb, 2, 3);
    let y = a.matvec(&f).unwrap();
    let p = RecoveryProblem::new(a, frame, y, Method::Alasso { mu: 0.01 }).unwrap();
    let out = solve_alasso(&p, &cfg).unwrap();
    assert!(out.converged);
    assert_eq!(out.engine, Engine::Admm);
    let report = verify_outcome(&p, &out, Some(&f), None, &cfg).unwrap();
    assert!(report.feasible);
    assert!(report.stationarity_residual.unwrap() < 1e-6);
}

#[test]
fn abp_meets_the_constraint_with_equality_when_active() {
    let cfg = SolverConfig::default();
    let (a, frame, f) = instance(16, 24, 36, FrameKind::RandomParseval, 3, 17);
    let y = a.matvec(&f).unwrap();
    let epsilon = 0.3 * linalg::norm2(&y);
    let p = RecoveryProblem::new(a.clone(), frame, y.clone(), Method::Abp { epsilon }).unwrap();
    let out = solve_abp(&p, &cfg).unwrap();
    let resid = linalg::norm2(&linalg::sub(&a.matvec(&out.f_hat).unwrap(), &y));
    assert_relative_eq!(resid, epsilon, max_relative = 1e-6);
}

#[test]
fn zero_parameter_with_zero_signal() {
    let cfg = SolverConfig::default();
    let (a, frame, _) = instance(6, 8, 8, FrameKind::Identity, 1, 0);
    let p = RecoveryProblem::new(a, frame, vec![0.0; 6], Method::Ads { lambda: 0.0 }).unwrap();
    let out = solve(&p, &cfg).unwrap();
    assert!(linalg::norm2(&out.f_hat) < 1e-12);
    assert!(out.objective.abs() < 1e-12);
}

#[test]
fn separation_recovers_signal_and_outliers() {
    let cfg = SolverConfig::default();
    let (a, frame, f) = instance(40, 60, 60, FrameKind::RandomOnb, 2, 23);
    let mut e = vec![0.0; 40];
    e[3] = 2.0;
    e[30] = -1.0;
    let y = linalg::add(&a.matvec(&f).unwrap(), &e);
    let omega = TightFrame::build(FrameKind::Identity, 40, 40, 0).unwrap();
    let p = RecoveryProblem::new(a, frame, y, Method::Ads { lambda: 1e-9 })
        .unwrap()
        .with_separation(omega, 2)
        .unwrap();
    let out = solve(&p, &cfg).unwrap();
    assert!(rel(&out.f_hat, &f) < 1e-4);
    assert!(rel(out.e_hat.as_ref().unwrap(), &e) < 1e-4);
}

#[test]
fn corrupted_solution_is_flagged() {
    let cfg = SolverConfig::default();
    let (a, frame, f) = instance(12, 16, 16, FrameKind::RandomOnb, 2, 31);
    let y = a.matvec(&f).unwrap();
    let p = RecoveryProblem::new(a, frame, y, Method::Ads { lambda: 0.01 }).unwrap();
    let mut out = solve_ads(&p, &cfg).unwrap();
    out.f_hat[0] += 1.0;
    let report = verify_outcome(&p, &out, Some(&f), None, &cfg).unwrap();
    assert!(!report.feasible);
    assert!(!report.all_pass());
}

#[test]
fn malformed_problems_are_rejected() {
    let (a, frame, _) = instance(6, 8, 8, FrameKind::Identity, 1, 0);
    let short = RecoveryProblem::new(a.clone(), frame.clone(), vec![0.0; 5], Method::Ads { lambda: 0.1 });
    assert!(matches!(short, Err(Error::DimensionMismatch { .. })));
    let negative = RecoveryProblem::new(a.clone(), frame.clone(), vec![0.0; 6], Method::Abp { epsilon: -1.0 });
    assert!(negative.is_err());
    let nan = RecoveryProblem::new(a, frame, vec![f64::NAN; 6], Method::Alasso { mu: 0.1 });
    assert!(nan.is_err());
}
