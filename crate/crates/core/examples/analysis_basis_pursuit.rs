//! ABP with the ℓ₂ noise radius, across sample sizes.

use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::linalg;
use frame_recovery::noise::l2_noise_bound;
use frame_recovery::rng::{gaussian_vec, random_subset, rng_from_seed, standard_normal};
use frame_recovery::sensing::{draw_sensing, SensingKind, SensingSpec};
use frame_recovery::solvers::{solve_abp, Method, RecoveryProblem, SolverConfig};

fn main() -> frame_recovery::Result<()> {
    let (n, s, sigma) = (96, 5, 0.01);
    let frame = TightFrame::build(FrameKind::RandomOnb, n, n, 5)?;
    let mut rng = rng_from_seed(6);
    let mut x = vec![0.0; n];
    for j in random_subset(&mut rng, n, s) {
        x[j] = standard_normal(&mut rng);
    }
    let f = frame.synthesis(&x)?;
    for m in [20, 32, 48, 64] {
        let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, m, n, 7))?;
        let y = linalg::add(&a.matvec(&f)?, &gaussian_vec(&mut rng, m, sigma));
        let (epsilon, floor) = l2_noise_bound(sigma, m)?;
        let problem = RecoveryProblem::new(a, frame.clone(), y, Method::Abp { epsilon })?;
        let out = solve_abp(&problem, &SolverConfig::default())?;
        let err = linalg::norm2(&linalg::sub(&out.f_hat, &f));
        println!("m = {m:>2}: ε = {epsilon:.4} (holds w.p. ≥ {floor:.3}), error {err:.4}, converged {}", out.converged);
    }
    Ok(())
}
