//! Deterministic, splittable randomness.
//!
//! Each generated sequence draws from its own ChaCha8 stream keyed by the
//! master seed and a domain tag, with the stream number set to the example
//! index. Any example can therefore be regenerated in isolation and parallel
//! generation is order-independent.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream domains, so training and test draws never share a keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Training = 0x7472_6169_6e00_0001,
    Test = 0x7465_7374_0000_0002,
    Bench = 0x6265_6e63_6800_0003,
}

#[derive(Debug, Clone)]
pub struct RandomSource(ChaCha8Rng);

impl RandomSource {
    pub fn from_seed(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Child generator for example `index` of `domain` under `master_seed`.
    pub fn child(master_seed: u64, domain: Domain, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ domain as u64));
        rng.set_stream(index);
        Self(rng)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}
