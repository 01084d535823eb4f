//! Parameter choices for Gaussian noise and the probability each one holds.

use frame_recovery::noise::{draw_noise, NoiseSpec, ThresholdReport};
use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::linalg;

fn main() -> frame_recovery::Result<()> {
    for (sigma, d, m) in [(0.01, 256, 64), (0.05, 1024, 128), (0.1, 4096, 512)] {
        let r = ThresholdReport::new(sigma, d, m)?;
        println!(
            "σ = {sigma}, d = {d}, m = {m}: λ = {:.4}, μ = {:.4} (floor {:.5}); ε = {:.4} (floor {:.3})",
            r.lambda_ads, r.mu_alasso, r.lambda_probability_floor, r.epsilon_l2, r.epsilon_probability_floor
        );
    }

    // Composite noise: Gaussian z plus a sparse e in Ω.
    let omega = TightFrame::build(FrameKind::RandomOnb, 32, 32, 2)?;
    let spec = NoiseSpec::Composite { sigma: 0.05, s_prime: 3, amplitude: 1.0, omega: None };
    let draw = draw_noise(&spec, 32, Some(&omega), 9)?;
    println!(
        "‖z‖₂ = {:.3}, ‖e‖₂ = {:.3}, ‖Ωᵀe‖₀ = {:?}",
        linalg::norm2(&draw.z),
        linalg::norm2(&draw.e),
        draw.analysis_sparsity
    );
    Ok(())
}
