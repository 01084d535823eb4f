//! Empirical frequencies of the noise and concentration events.

use frame_recovery::experiments::{empirical_probability, ProbeEvent};
use frame_recovery::frames::FrameKind;

fn main() -> frame_recovery::Result<()> {
    let events = [
        ProbeEvent::Lemma1 { sigma: 1.0, m: 100, n: 100, d: 100, alpha: 1.0, frame: FrameKind::RandomOnb },
        ProbeEvent::Gn { sigma: 1.0, m: 100 },
        ProbeEvent::Lemma6 { m: 120, n: None, delta: 0.5 },
    ];
    for event in &events {
        let r = empirical_probability(event, 4_000, 17)?;
        println!(
            "{:<7} rate {:.4} vs {:?} {:.5} (sd {:.1e}) consistent: {}",
            r.event, r.rate, r.comparison, r.reference, r.binomial_sd, r.consistent
        );
    }
    Ok(())
}
