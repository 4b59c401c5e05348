//! Seed discipline.
//!
//! Every random stream in the crate is derived from a single `u64` master seed
//! by mixing it with a path of stream tags through SplitMix64. A tag path such
//! as `[KMEANS, iteration, restart]` always yields the same child seed, so
//! results never depend on how work is scheduled across threads. Streams are
//! ChaCha8 generators seeded from the derived value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub mod tag {
    pub const LABELS: u64 = 0x4c41_4245;
    pub const EDGES: u64 = 0x4544_4745;
    pub const THETA: u64 = 0x5448_4554;
    pub const LATENT: u64 = 0x4c41_5445;
    pub const KMEANS: u64 = 0x4b4d_4541;
    pub const INIT: u64 = 0x494e_4954;
    pub const FOLDS: u64 = 0x464f_4c44;
    pub const RESAMPLE: u64 = 0x5245_5341;
    pub const BERNOULLI: u64 = 0x4245_524e;
    pub const PERMUTE: u64 = 0x5045_524d;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for the stream identified by `path` under `seed`.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(seed: u64, path: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, path))
}
