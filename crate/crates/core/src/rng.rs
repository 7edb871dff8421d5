//! Seed splitting. Every stochastic job draws from its own ChaCha stream,
//! keyed by a root seed and a path of integer labels, so results never
//! depend on scheduling order or on how many sibling jobs exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` and a label.
pub fn child_seed(seed: u64, label: u64) -> u64 {
    splitmix(splitmix(seed) ^ label.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Derive a seed from a path of labels.
pub fn path_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &l| child_seed(s, l))
}

pub fn stream(seed: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(path_seed(seed, path))
}

/// Stream-separation tags.
pub(crate) mod tag {
    pub const NOISE: u64 = 1;
    pub const DRAW: u64 = 2;
    pub const TRAJECTORY: u64 = 3;
    pub const DOMINATING: u64 = 4;
    pub const COEFFICIENTS: u64 = 5;
    pub const CELL: u64 = 6;
}
