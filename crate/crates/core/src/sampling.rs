//! Seeded random points for the sampled certification checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const DEFAULT_SAMPLES: usize = 200;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` points drawn uniformly from the box, skipping any point for which
/// `reject` returns true.
pub fn sample_box(
    lower: &[f64],
    upper: &[f64],
    count: usize,
    seed: u64,
    reject: impl Fn(&[f64]) -> bool,
) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 1000 * (count + 1), "sampling box is almost entirely rejected");
        let x: Vec<f64> = lower
            .iter()
            .zip(upper)
            .map(|(&a, &b)| if a == b { a } else { rng.gen_range(a..b) })
            .collect();
        if !reject(&x) {
            out.push(x);
        }
    }
    out
}

/// Random vectors with entries uniform in `[-1, 1]`.
pub fn random_vectors(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}
