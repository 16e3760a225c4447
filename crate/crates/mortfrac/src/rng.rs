//! Reproducible RNG substreams and deterministic reductions.
//!
//! Every simulated path draws from a ChaCha substream keyed by
//! `(master seed, path index, component tag)`, so multi-threaded path
//! generation is bit-identical to the sequential run regardless of worker
//! count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Driving-noise component tags for substream derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// Brownian shock shared by rate and mortality.
    W1 = 0,
    /// Independent Brownian shock of the mortality equation.
    W2 = 1,
    /// Fractional noise of the rate equation.
    B1 = 2,
    /// Fractional noise of the mortality equation.
    B2 = 3,
}

/// Substream for `(seed, path, component)`.
pub fn substream(seed: u64, path: u64, component: Component) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(path.wrapping_mul(8).wrapping_add(component as u64));
    rng
}

/// Substream used by single-noise generators (fGn, mfBm).
pub fn noise_stream(seed: u64, component_tag: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(component_tag);
    rng
}

/// Pairwise summation in a fixed order. Used for all Monte Carlo reductions
/// so that results do not depend on thread count or summation chunking.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Mean via pairwise summation.
pub fn pairwise_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample standard deviation (denominator n-1) via pairwise sums.
pub fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = pairwise_mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    (pairwise_sum(&sq) / (n as f64 - 1.0)).sqrt()
}
