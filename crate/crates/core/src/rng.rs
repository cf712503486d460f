//! Splittable seeding for reproducible parallel streams.
//!
//! A [`RngKey`] names a position in a tree of streams. Child keys are derived
//! by mixing tags into the parent with SplitMix64, and a key is turned into a
//! ChaCha8 generator (a counter-based cipher) on demand. Streams therefore
//! never depend on the order in which threads consume them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

/// Stream purposes within one quarter.
pub mod tag {
    pub const RUN: u64 = 0x52554e;
    pub const EXPECTATIONS: u64 = 1;
    pub const LABOR: u64 = 2;
    pub const GOODS: u64 = 3;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngKey(u64);

impl RngKey {
    pub fn new(seed: u64) -> Self {
        Self(splitmix64(seed))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn child(self, tag: u64) -> Self {
        Self(splitmix64(self.0 ^ splitmix64(tag.wrapping_add(0x6a09_e667_f3bc_c909))))
    }

    pub fn derive(self, tags: &[u64]) -> Self {
        tags.iter().fold(self, |k, &t| k.child(t))
    }

    /// Key of ensemble run `run` (1-based) under `master_seed`.
    pub fn for_run(master_seed: u64, run: usize) -> Self {
        Self::new(master_seed).derive(&[tag::RUN, run as u64])
    }

    pub fn stream(self, tags: &[u64]) -> StreamRng {
        let key = self.derive(tags);
        let mut seed = [0u8; 32];
        let mut z = key.0;
        for chunk in seed.chunks_exact_mut(8) {
            z = splitmix64(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        StreamRng::from_seed(seed)
    }
}
