//! Splittable seed streams for reproducible Monte Carlo.
//!
//! Every randomized routine takes a master seed and derives independent
//! substreams by mixing the seed with an integer tag (or a stream name).
//! Substreams are deterministic functions of `(master, tag)` alone, so the
//! n-th draw of a procedure does not depend on how many draws preceded it;
//! this is what makes results bit-identical regardless of evaluation order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective mix with good bit diffusion.
fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of substream `tag` from a master seed.
pub fn derive(master: u64, tag: u64) -> u64 {
    splitmix(master ^ splitmix(tag.wrapping_add(GOLDEN)))
}

/// Derive a substream seed from a stream name (FNV-1a over the bytes).
pub fn derive_named(master: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    derive(master, h)
}

/// Generator for a raw substream seed.
pub fn stream(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Generator for substream `tag` of a master seed.
pub fn substream(master: u64, tag: u64) -> ChaCha12Rng {
    stream(derive(master, tag))
}
