//! Counter-based random streams.
//!
//! Every (seed, step, purpose) triple gets its own ChaCha8 stream, so two runs
//! that share a seed consume identical random numbers in every phase of every
//! step no matter how their states diverge. Paired impulse-response runs rely
//! on this.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Labour = 2,
    Capital = 3,
    Consumption = 4,
    Pricing = 5,
    Policy = 6,
    CapitalPricing = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_rng(seed: u64, step: u64, stream: Stream) -> SimRng {
    let key = splitmix64(splitmix64(seed) ^ step.wrapping_mul(0xD1B5_4A32_D192_ED03));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream as u64);
    rng
}

/// Draws `k` distinct indices from `0..n` by a partial Fisher-Yates shuffle
/// that is undone after every draw, so each draw depends only on the rng.
#[derive(Debug, Clone)]
pub struct DistinctSampler {
    perm: Vec<usize>,
    swaps: Vec<usize>,
}

impl DistinctSampler {
    pub fn new(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            swaps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R, k: usize, out: &mut Vec<usize>) {
        let n = self.perm.len();
        debug_assert!(k <= n);
        out.clear();
        self.swaps.clear();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            self.perm.swap(i, j);
            self.swaps.push(j);
            out.push(self.perm[i]);
        }
        for i in (0..k).rev() {
            self.perm.swap(i, self.swaps[i]);
        }
    }
}
