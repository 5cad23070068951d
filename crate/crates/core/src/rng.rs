//! Seeded random streams shared by all randomized searches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream `index` of the generator seeded by `seed`.
///
/// Work split across threads draws from `derived_rng(seed, worker)` so the
/// result does not depend on scheduling.
pub fn derived_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
