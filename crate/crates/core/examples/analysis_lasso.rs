//! ALASSO with a redundant frame, solved by ADMM and by PDHG.

use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::linalg;
use frame_recovery::noise::alasso_mu;
use frame_recovery::rng::{gaussian_vec, random_subset, rng_from_seed, standard_normal};
use frame_recovery::sensing::{draw_sensing, SensingKind, SensingSpec};
use frame_recovery::solvers::{solve_alasso, solve_alasso_pdhg, verify_outcome, Method, RecoveryProblem, SolverConfig};

fn main() -> frame_recovery::Result<()> {
    let (m, n, d, s, sigma) = (56, 64, 128, 4, 0.002);
    let frame = TightFrame::build(FrameKind::UnionOfOnb, n, d, 1)?;
    let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, m, n, 2))?;
    let mut rng = rng_from_seed(3);
    let mut x = vec![0.0; d];
    for j in random_subset(&mut rng, d, s) {
        x[j] = standard_normal(&mut rng);
    }
    let f = frame.synthesis(&x)?;
    let y = linalg::add(&a.matvec(&f)?, &gaussian_vec(&mut rng, m, sigma));
    let mu = alasso_mu(sigma, d)?;
    let problem = RecoveryProblem::new(a, frame, y, Method::Alasso { mu })?;

    let cfg = SolverConfig::default();
    for (name, out) in [("admm", solve_alasso(&problem, &cfg)?), ("pdhg", solve_alasso_pdhg(&problem, &cfg)?)] {
        let err = linalg::norm2(&linalg::sub(&out.f_hat, &f)) / linalg::norm2(&f);
        let checks = verify_outcome(&problem, &out, None, None, &cfg)?;
        println!(
            "{name}: objective {:.10}, gap {:.1e}, {} iterations, relative error {err:.3}, stationarity {:.1e}",
            out.objective,
            out.duality_gap,
            out.iterations,
            checks.stationarity_residual.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
