//! Seed derivation for reproducible parallel streams.
//!
//! Every independent unit of work (a sweep point, a shard of shots, a delay
//! in a scan) gets its own ChaCha8 stream seeded from
//! `derive_seed(parent, index, stage)`. The mixing function is SplitMix64's
//! finalizer applied to a running combination, so child seeds do not depend
//! on scheduling and distinct `(index, stage)` pairs yield unrelated streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage tags keep streams of different consumers apart even when they share
/// a parent seed and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    SweepPoint = 0x5157_4545_5000_0001,
    ShotShard = 0x5157_4545_5000_0002,
    ScanDelay = 0x5157_4545_5000_0003,
    CepDraws = 0x5157_4545_5000_0004,
    Intensity = 0x5157_4545_5000_0005,
    EnergyPoint = 0x5157_4545_5000_0006,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for work item `index` of `stage` under `parent`.
pub fn derive_seed(parent: u64, index: u64, stage: Stage) -> u64 {
    let a = splitmix64(parent ^ stage as u64);
    let b = splitmix64(a ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix64(b)
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_stream(parent: u64, index: u64, stage: Stage) -> ChaCha8Rng {
    stream(derive_seed(parent, index, stage))
}
