//! Error-bound calculators for compressible coefficient vectors.

use frame_recovery::bounds::{
    abp_bound, ads_bound, alasso_bound, power_law_risk, separation_bound, tail_profile, BoundInputs,
};
use frame_recovery::solvers::SeparationVariant;

fn main() -> frame_recovery::Result<()> {
    // Coefficients decaying like k^(-3/2).
    let coeffs: Vec<f64> = (1..=200).map(|k| (k as f64).powf(-1.5)).collect();
    let s = 10;
    let tails = tail_profile(&coeffs, s);
    let (delta, lambda, mu) = (0.1, 0.02, 0.04);

    let ads = ads_bound(&BoundInputs::new(delta, lambda, tails.clone()))?;
    println!("ads bound {:.4} at k* = {} (C0 = {:.3})", ads.bound, ads.k_star, ads.constants_used["C0"]);
    let alasso = alasso_bound(&BoundInputs::new(delta, mu, tails.clone()).with_norm11(1.0))?;
    println!("alasso bound {:.4} at k* = {}", alasso.bound, alasso.k_star);
    println!("abp bound with C2 = C3 = 2: {:.4}", abp_bound(tails[s - 1], s, 0.05, 2.0, 2.0)?);

    let sep = BoundInputs::new(delta, lambda, tails.clone()).with_s_prime(4);
    let sads = separation_bound(SeparationVariant::Sads, &sep, None)?;
    println!("sads bound with s' = 4: {:.4}", sads.bound);

    // Hypotheses are enforced.
    let err = alasso_bound(&BoundInputs::new(0.3, mu, tails)).unwrap_err();
    println!("alasso with δ = 0.3: {err}");

    for d in [1_000usize, 100_000, 10_000_000] {
        let r = power_law_risk(1.0, 0.5, 0.01, d, s, 1.0)?;
        println!("power-law risk, d = {d:>8}: {:.3e} (best k = {})", r.bound, r.k_star);
    }
    Ok(())
}
