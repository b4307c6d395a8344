//! Seed derivation. Every random stage draws from its own ChaCha8 stream so
//! that changing one stage never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage indices used to split the pipeline root seed.
pub mod stage {
    pub const EMBED: u64 = 1;
    pub const SAE: u64 = 2;
    pub const CLUSTER: u64 = 3;
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one pipeline stage, derived from the root seed.
pub fn stage_seed(root: u64, stage: u64) -> u64 {
    mix64(root ^ mix64(stage))
}

/// Independent generator `stream` of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
