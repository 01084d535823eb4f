//! ADS on a design with a certified D-RIP constant, compared with its error bound.

use frame_recovery::bounds::{ads_bound, tail_profile, BoundInputs};
use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::linalg::{self, mtx};
use frame_recovery::noise::ads_lambda;
use frame_recovery::rng::{gaussian_vec, substream};
use frame_recovery::sensing::drip_exact;
use frame_recovery::solvers::{solve_ads, verify_outcome, Method, RecoveryProblem, SolverConfig};

fn main() -> frame_recovery::Result<()> {
    // A 6 x 8 design whose order-3 restricted isometry constant is below 1/2.
    let a = mtx::read_matrix(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/designed_6x8.mtx"))?;
    let frame = TightFrame::build(FrameKind::Identity, 8, 8, 0)?;
    let delta = drip_exact(&a, &frame, 3)?.delta;
    let sigma = 0.02;
    let lambda = ads_lambda(sigma, 8)?;
    println!("δ₃ = {delta:.4}, λ = {lambda:.4}");

    let mut f = vec![0.0; 8];
    f[5] = -1.0;
    let cfg = SolverConfig::default();
    for trial in 0..5 {
        let z = gaussian_vec(&mut substream(11, trial), 6, sigma);
        let y = linalg::add(&a.matvec(&f)?, &z);
        let problem = RecoveryProblem::new(a.clone(), frame.clone(), y, Method::Ads { lambda })?;
        let out = solve_ads(&problem, &cfg)?;
        let err = linalg::norm2(&linalg::sub(&out.f_hat, &f));
        let bound = ads_bound(&BoundInputs::new(delta, lambda, tail_profile(&f, 1)))?.bound;
        let noise_ok = linalg::norm_inf(&a.matvec_transpose(&z)?) <= lambda;
        let checks = verify_outcome(&problem, &out, Some(&f), None, &cfg)?;
        println!(
            "trial {trial}: error {err:.4} vs bound {bound:.3} (noise within λ: {noise_ok}), {} iterations, checks pass: {}",
            out.iterations,
            checks.all_pass()
        );
    }
    Ok(())
}
