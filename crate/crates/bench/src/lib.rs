//! Shared fixtures for the criterion benchmarks.

use lindet_core::channel::{normalize, sample_standard_gaussian};
use lindet_core::{ComplexMatrix, RngStream};

pub const SEED: u64 = 0x5eed;

/// A normalized `n x n` Rayleigh channel, fixed for a given `n`.
pub fn channel(n: usize) -> ComplexMatrix {
    let mut rng = RngStream::for_experiment(SEED, "bench/channel", n as u64).rng();
    normalize(&sample_standard_gaussian(n, &mut rng))
        .expect("Gaussian draw is nonzero")
        .into_matrix()
}
