//! Reproducible random streams.
//!
//! Every run owns a family of ChaCha8 streams, one per purpose, keyed by
//! the master seed and selected by the run index (`set_stream`). Fading
//! draws are counter-based: each `(run, gateway, unit)` triple seeds its own
//! SplitMix generator, so the value a unit sees at a gateway does not depend on
//! evaluation order, worker count, or which other gateways exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::SplitMix64;

/// What a stream is used for; each purpose gets an independent key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Devices = 1,
    Layout = 2,
    Orbit = 3,
    Traffic = 4,
    Fading = 5,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive combination of two keys.
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b.rotate_left(29) ^ 0xD6E8_FEB8_6659_FD93)
}

/// The stream for `purpose` in run `run_index`.
pub fn run_rng(master_seed: u64, run_index: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(master_seed, purpose as u64));
    rng.set_stream(run_index);
    rng
}

/// Root key of the counter-based fading draws of one run.
pub fn fading_key(master_seed: u64, run_index: u64) -> u64 {
    mix(mix(master_seed, Purpose::Fading as u64), run_index)
}

/// Generator for one unit at one gateway.
pub fn unit_rng(fading_key: u64, gateway_key: u64, unit_id: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(mix(mix(fading_key, gateway_key), unit_id))
}

/// Identifier of unit `unit` of packet `packet` within a run.
pub fn unit_id(packet: usize, unit: usize) -> u64 {
    ((packet as u64) << 16) | unit as u64
}

/// A fresh master seed from OS entropy.
pub fn entropy_seed() -> u64 {
    rand::random()
}
