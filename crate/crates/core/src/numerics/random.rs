//! Deterministic, splittable random streams and the samplers built on them.
//!
//! A [`RandomStream`] is only an address: a 64-bit seed and a 64-bit
//! substream index. [`RandomStream::generator`] turns it into a ChaCha8
//! generator keyed by the seed and positioned on the substream, so the same
//! address always yields the same sequence and distinct substreams of one
//! seed never overlap. No sampler in this crate touches a global RNG.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

/// Generator type produced by a [`RandomStream`].
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn generator(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child stream `index` of `parent`.
///
/// All children of one parent share a key derived from the parent's address
/// and differ only in the ChaCha stream number, so distinct indices can
/// never produce overlapping sequences.
pub fn split_stream(parent: RandomStream, index: u64) -> RandomStream {
    RandomStream {
        seed: splitmix64(parent.seed ^ splitmix64(parent.stream_id)),
        stream_id: index,
    }
}

pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Poisson draw: inversion for small means, transformed rejection for
/// large ones.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as u64
}
