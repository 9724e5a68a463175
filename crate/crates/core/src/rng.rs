//! Keyed RNG streams for reproducible Monte Carlo.
//!
//! Each trajectory gets its own ChaCha stream whose 256-bit key is derived
//! from (master seed, indices, domain tag) with a SplitMix64 chain, so any
//! trajectory is reproducible in isolation without generating its
//! predecessors and results do not depend on execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain separation tags for the different stream families.
pub const STREAM_INIT_STATE: u64 = 0x01;
pub const STREAM_TRAJECTORY: u64 = 0x02;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a deterministic, statistically independent stream from a master
/// seed and a list of identifiers (domain tag first, then indices).
pub fn stream_rng(master_seed: u64, ids: &[u64]) -> ChaCha8Rng {
    let mut state = master_seed ^ 0x6a09_e667_f3bc_c908;
    let mut seed = [0u8; 32];
    for &id in ids {
        state ^= id.wrapping_mul(0xff51_afd7_ed55_8ccd).rotate_left(31);
        let _ = splitmix64(&mut state);
    }
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
