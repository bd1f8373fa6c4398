//! Seeded random streams.
//!
//! Every trajectory owns a [`SimRng`]. The generator is ChaCha with 8 rounds,
//! which is counter based: `(seed, stream)` pairs give independent,
//! reproducible streams without sharing state between threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::Vector9;

pub type SimRng = ChaCha8Rng;

/// Identity of the generator and normal sampler, echoed into reports so a
/// change of either is visible when comparing runs.
pub const RNG_IDENTITY: &str = "chacha8/rand_chacha-0.9+ziggurat-normal/rand_distr-0.5";

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng
}

pub fn standard_normal(rng: &mut SimRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Nine independent standard normals.
pub fn normal_vector(rng: &mut SimRng) -> Vector9 {
    Vector9::from_fn(|_, _| StandardNormal.sample(rng))
}

/// Brownian increment over `dt`: `sqrt(dt) * N(0, I)`.
pub fn wiener_increment(rng: &mut SimRng, dt: f64) -> Vector9 {
    normal_vector(rng) * dt.sqrt()
}
