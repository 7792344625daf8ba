//! Shared inputs for the criterion benchmarks.

use ecmo_core::pareto::FrontEntry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` random points in `[0, 1]^s` wrapped as front entries.
pub fn random_entries(n: usize, s: usize, seed: u64) -> Vec<FrontEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| FrontEntry {
            run_id: i.to_string(),
            lambda: Vec::new(),
            z: Vec::new(),
            f: (0..s).map(|_| rng.random::<f64>()).collect(),
        })
        .collect()
}

/// `n` mutually non-dominated points on the simplex face `sum f = 1`.
pub fn simplex_front(n: usize, s: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..s).map(|_| rng.random::<f64>() + 1e-9).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / sum).collect()
        })
        .collect()
}
