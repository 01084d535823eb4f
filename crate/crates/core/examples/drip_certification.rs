//! Exact and sampled D-RIP constants, and the sample-size advisor.

use frame_recovery::frames::{FrameKind, TightFrame};
use frame_recovery::sensing::{draw_sensing, drip_exact, drip_monte_carlo, sample_size_advisor, SensingKind, SensingSpec};

fn main() -> frame_recovery::Result<()> {
    let frame = TightFrame::build(FrameKind::UnionOfOnb, 16, 32, 3)?;
    for m in [16, 64, 256] {
        let a = draw_sensing(&SensingSpec::new(SensingKind::Gaussian, m, 16, 4))?;
        for s in 1..=3 {
            let exact = drip_exact(&a, &frame, s)?;
            let sampled = drip_monte_carlo(&a, &frame, s, 2_000, 5)?;
            println!(
                "m = {m:>2}, s = {s}: exact δ = {:.4} over {} supports, sampled lower bound {:.4}",
                exact.delta, exact.supports_examined, sampled.delta
            );
        }
    }

    // Measurements suggested for s-sparse signals with s'-sparse outliers.
    for (s, s_prime) in [(5, 0), (5, 10), (20, 10)] {
        let m = sample_size_advisor(s, s_prime, 1024, 256, 0.5, 1.0)?;
        println!("s = {s:>2}, s' = {s_prime:>2}, d = 1024, M = 256: m ≥ {m}");
    }
    Ok(())
}
