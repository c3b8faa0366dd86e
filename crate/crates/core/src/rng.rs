//! Seed derivation for reproducible, order-independent Monte Carlo.
//!
//! Every replication gets its own seed `derive_seed(base, cell, rep)`, a
//! SplitMix64 hash chain over the three coordinates. A path seed drives
//! ChaCha12 generators on separate streams: stream 0 for the Gaussian part,
//! stream 1 for jump times and counts, stream 2 for jump sizes. Changing the
//! jump model therefore leaves the Brownian part of a path untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub const DIFFUSION_STREAM: u64 = 0;
pub const JUMP_TIME_STREAM: u64 = 1;
pub const JUMP_SIZE_STREAM: u64 = 2;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, cell: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ cell) ^ rep.rotate_left(32))
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
