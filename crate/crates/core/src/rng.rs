//! Per-replica random streams.
//!
//! Every replica draws from its own generator seeded by mixing the master seed,
//! the replica index and a purpose tag, so a replica's output never depends on
//! which worker ran it or in which order.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

/// Purpose tags keep the initial-data stream and the dynamics stream of one
/// replica independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Initial = 0x1d,
    Dynamics = 0x2e,
    Oracle = 0x3f,
    Limit = 0x4a,
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_seed(master: u64, replica: u64, purpose: Purpose) -> u64 {
    mix64(mix64(master ^ mix64(replica)) ^ (purpose as u64).wrapping_mul(0xa076_1d64_78bd_642f))
}

pub fn stream(master: u64, replica: u64, purpose: Purpose) -> StreamRng {
    StreamRng::seed_from_u64(stream_seed(master, replica, purpose))
}

/// Standard exponential variate.
#[inline]
pub fn exp1(rng: &mut StreamRng) -> f64 {
    rand_distr::Distribution::<f64>::sample(&rand_distr::Exp1, rng)
}

pub fn from_seed(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(mix64(seed))
}
