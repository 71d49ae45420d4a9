//! Seed derivation for independent, reproducible random streams.
//!
//! Every random draw in a study is tied to a `(master seed, m, replication,
//! purpose)` tuple. Streams are derived by SplitMix64 finalisation so that,
//! for example, the latent draws of replication 3 do not depend on how many
//! item parameters were drawn before them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Items,
    Latents,
    Responses,
    /// Jitter and neighbour tie-breaking inside the estimators.
    Estimators,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Items => 0x11,
            Purpose::Latents => 0x22,
            Purpose::Responses => 0x33,
            Purpose::Estimators => 0x44,
        }
    }
}

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed.
pub fn mix(words: &[u64]) -> u64 {
    words.iter().fold(0x6A09_E667_F3BC_C909, |acc, &w| {
        splitmix64(acc ^ splitmix64(w))
    })
}

/// Seed for the stream identified by `(master, m, rep, purpose)`.
pub fn stream_seed(master: u64, m: usize, rep: usize, purpose: Purpose) -> u64 {
    mix(&[master, m as u64, rep as u64, purpose.tag()])
}

/// Generator used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Maps a 64-bit hash onto `[0, 1)`.
#[inline]
pub fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
pub(crate) fn std_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng)
}
