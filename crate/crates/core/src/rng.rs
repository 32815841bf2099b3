//! Deterministic substream derivation for parallel Monte Carlo.
//!
//! Samples are generated in fixed-size logical blocks; each block owns an
//! independent ChaCha stream derived from `(seed, stream tag, block index)`.
//! Block boundaries are a property of the indexing, not of the thread count,
//! so any parallel schedule reproduces the serial output bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per logical block.
pub const BLOCK_LEN: usize = 8192;

/// SplitMix64 step; the standard finalizer used to decorrelate seed words.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one `(seed, tag, block)` triple.
pub fn substream(seed: u64, tag: u64, block: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut words = [0u64; 4];
    // Chain the identifying words through the mixer so that every triple
    // lands on a distinct, well-separated 256-bit key.
    state ^= splitmix64(&mut { tag }).wrapping_add(0x517c_c1b7_2722_0a95);
    state ^= splitmix64(&mut { block }).rotate_left(17);
    for w in words.iter_mut() {
        *w = splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for (i, w) in words.iter().enumerate() {
        key[8 * i..8 * (i + 1)].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Derived seed for an auxiliary deterministic decision, e.g. one search
/// probe within a larger experiment.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut state = seed ^ tag.rotate_left(32);
    splitmix64(&mut state)
}
