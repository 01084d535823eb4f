//! Joint recovery of a signal and sparse outliers with SABP, SADS and SALASSO.

use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::linalg;
use frame_recovery::noise::{draw_noise, NoiseSpec};
use frame_recovery::rng::{random_subset, rng_from_seed, standard_normal};
use frame_recovery::sensing::{draw_sensing, SensingKind, SensingSpec};
use frame_recovery::solvers::{solve, Method, RecoveryProblem, SolverConfig};

fn rel(a: &[f64], b: &[f64]) -> f64 {
    linalg::norm2(&linalg::sub(a, b)) / linalg::norm2(b)
}

fn main() -> frame_recovery::Result<()> {
    let (m, n, s, s_prime) = (40, 60, 2, 3);
    let frame = TightFrame::build(FrameKind::RandomOnb, n, n, 1)?;
    let omega = TightFrame::build(FrameKind::Identity, m, m, 0)?;
    let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, m, n, 2))?;
    let mut rng = rng_from_seed(3);
    let mut x = vec![0.0; n];
    for j in random_subset(&mut rng, n, s) {
        x[j] = standard_normal(&mut rng);
    }
    let f = frame.synthesis(&x)?;
    let noise = draw_noise(&NoiseSpec::Sparse { s_prime, amplitude: 5.0, omega: None }, m, Some(&omega), 4)?;
    let y = linalg::add(&a.matvec(&f)?, &noise.e);

    let cfg = SolverConfig::default();
    let plain = solve(&RecoveryProblem::new(a.clone(), frame.clone(), y.clone(), Method::Abp { epsilon: 0.0 })?, &cfg)?;
    println!("abp ignoring outliers: signal error {:.3}", rel(&plain.f_hat, &f));
    for (name, method) in [
        ("sabp", Method::Abp { epsilon: 0.0 }),
        ("sads", Method::Ads { lambda: 1e-4 }),
        ("salasso", Method::Alasso { mu: 1e-3 }),
    ] {
        let problem = RecoveryProblem::new(a.clone(), frame.clone(), y.clone(), method)?.with_separation(omega.clone(), s_prime)?;
        let out = solve(&problem, &cfg)?;
        let e_hat = out.e_hat.as_deref().unwrap_or(&[]);
        println!(
            "{name:<8} signal error {:.1e}, outlier error {:.1e}, {} iterations, converged {}",
            rel(&out.f_hat, &f),
            rel(e_hat, &noise.e),
            out.iterations,
            out.converged
        );
    }
    Ok(())
}
