//! Minimax lower bounds next to the least-squares oracle risk.

use frame_recovery::bounds::{minimax_lower, minimax_trace, MinimaxMode};
use frame_recovery::linalg::{self, sym_eig, Cholesky};
use frame_recovery::rng::{gaussian_vec, substream};
use frame_recovery::sensing::{draw_sensing, SensingKind, SensingSpec};

fn main() -> frame_recovery::Result<()> {
    let (m, s, sigma) = (12, 4, 0.5);
    for seed in 0..3 {
        let phi = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, m, s, seed))?;
        let gram = phi.gram();
        let delta = (sym_eig(&gram)?.max() - 1.0).max(0.0);
        let oracle = minimax_trace(&phi, sigma)?.value();
        let (lower, _) = minimax_lower(s, sigma, delta, MinimaxMode::Expectation)?;
        let (lower_hp, prob) = minimax_lower(s, sigma, delta, MinimaxMode::HighProbability)?;

        // Monte Carlo risk of least squares on the support.
        let chol = Cholesky::factor(&gram)?;
        let trials = 5_000;
        let risk: f64 = (0..trials)
            .map(|t| {
                let z = gaussian_vec(&mut substream(seed + 100, t), m, sigma);
                let err = chol.solve(&phi.matvec_transpose(&z).unwrap()).unwrap();
                linalg::norm2(&err).powi(2)
            })
            .sum::<f64>()
            / trials as f64;
        println!(
            "design {seed}: δ = {delta:.3}, lower {lower:.4}, σ²tr = {oracle:.4}, simulated {risk:.4}, \
             high-probability lower {lower_hp:.4} (w.p. ≥ {:.3})",
            prob.unwrap()
        );
    }
    Ok(())
}
