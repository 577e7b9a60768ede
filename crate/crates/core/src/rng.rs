//! Seeded randomness.
//!
//! Every stochastic routine draws from [`SimRng`], ChaCha with 8 rounds as
//! implemented by `rand_chacha`. Its output stream is fixed by the seed alone,
//! independent of platform and thread count, so archived CSVs can be compared
//! byte for byte.

use rand::{Rng, SeedableRng};
use rand_distr::{Binomial, Distribution};

pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed for a named stream.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Binomial draw that tolerates the degenerate probabilities produced by
/// rounding (`p` slightly outside `[0, 1]`).
pub fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("probability checked to lie in (0, 1)")
        .sample(rng)
}

/// Multinomial draw of `n` items over `probs` by sequential binomial
/// splitting. `probs` need not be normalised; negative entries count as zero.
pub fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining_mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut remaining = n;
    let last_nonzero = probs.iter().rposition(|&p| p > 0.0);
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if Some(k) == last_nonzero {
            counts[k] = remaining;
            break;
        }
        if p == 0.0 {
            continue;
        }
        let c = binomial(rng, remaining, p / remaining_mass);
        counts[k] = c;
        remaining -= c;
        remaining_mass -= p;
    }
    counts
}
