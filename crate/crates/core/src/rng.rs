//! Seed derivation and random draws.
//!
//! Every random quantity in the crate comes from a [`ChaCha8Rng`] keyed by a
//! 64-bit seed. ChaCha is a counter-based stream cipher, so a given seed yields
//! the same stream on every platform and under every thread schedule. Work
//! items never share a generator: each derives its own seed through
//! [`hash64`].
//!
//! `hash64` is a splitmix64 chain. Starting from `state = 0x9E3779B97F4A7C15`,
//! each word `w` is absorbed as `state = mix(state ^ w) + 0x9E3779B97F4A7C15`
//! (wrapping), where `mix` is the splitmix64 finalizer with multipliers
//! `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB` and shifts 30, 27, 31.
//! The result is `mix(state)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes an ordered list of words into one 64-bit seed.
pub fn hash64(words: &[u64]) -> u64 {
    let mut state = GOLDEN;
    for &w in words {
        state = mix(state ^ w).wrapping_add(GOLDEN);
    }
    mix(state)
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the `index`-th independent stream under `seed`.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    rng_from_seed(hash64(&[seed, index]))
}

pub fn standard_normal(rng: &mut SeededRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_vec(rng: &mut SeededRng, len: usize, std_dev: f64) -> Vec<f64> {
    (0..len).map(|_| std_dev * standard_normal(rng)).collect()
}

pub fn rademacher(rng: &mut SeededRng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Uniformly random `k`-subset of `0..n`, returned sorted.
pub fn random_subset(rng: &mut SeededRng, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "subset size {k} exceeds population {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let mut out = pool[..k].to_vec();
    out.sort_unstable();
    out
}

/// Uniformly random permutation of `0..n`.
pub fn random_permutation(rng: &mut SeededRng, n: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        pool.swap(i, j);
    }
    pool
}

/// Unit vector drawn uniformly from the sphere in `len` dimensions.
pub fn unit_vector(rng: &mut SeededRng, len: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, len, 1.0);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash64_is_order_sensitive_and_stable() {
        assert_eq!(hash64(&[1, 2, 3]), hash64(&[1, 2, 3]));
        assert_ne!(hash64(&[1, 2, 3]), hash64(&[3, 2, 1]));
        assert_ne!(hash64(&[0]), hash64(&[0, 0]));
    }

    #[test]
    fn streams_are_reproducible() {
        let a = gaussian_vec(&mut substream(7, 3), 16, 1.0);
        let b = gaussian_vec(&mut substream(7, 3), 16, 1.0);
        assert_eq!(a, b);
        let c = gaussian_vec(&mut substream(7, 4), 16, 1.0);
        assert_ne!(a, c);
    }

    #[test]
    fn subsets_are_distinct_and_sorted() {
        let mut rng = rng_from_seed(11);
        for _ in 0..50 {
            let s = random_subset(&mut rng, 20, 6);
            assert_eq!(s.len(), 6);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
