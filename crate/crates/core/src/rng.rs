//! Counter-based per-path random streams.
//!
//! Every path owns a generator derived from `(seed, stream)` alone, so a
//! path's randomness never depends on which worker ran it or in what order.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type PathRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for stream `stream` under the run seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> PathRng {
    let key = mix64(seed.wrapping_add(GOLDEN));
    let mut state = [0u8; 32];
    for (i, chunk) in state.chunks_exact_mut(8).enumerate() {
        let word = mix64(key ^ mix64(stream.wrapping_mul(4).wrapping_add(i as u64).wrapping_add(GOLDEN)));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    // xoshiro rejects the all-zero state
    if state.iter().all(|&b| b == 0) {
        state[0] = 1;
    }
    Xoshiro256PlusPlus::from_seed(state)
}
