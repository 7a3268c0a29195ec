//! Deterministic randomness.
//!
//! All random draws flow through one counter-based generator (ChaCha) keyed by
//! the scenario seed. Independent purposes get independent streams of the same
//! keyed generator, so adding a draw to one stream never perturbs another.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::scalar::Real;

/// Stream ids for the per-scenario generator. Attempt `a` of a constrained
/// initial-condition resample uses `POSITIONS + a * ATTEMPT_STRIDE` and
/// `STRENGTHS + a * ATTEMPT_STRIDE`.
pub mod streams {
    pub const POSITIONS: u64 = 0;
    pub const STRENGTHS: u64 = 1;
    pub const PERTURBATION: u64 = 2;
    pub const ATTEMPT_STRIDE: u64 = 8;
}

/// A ChaCha generator keyed by `seed`, positioned on stream `stream`.
pub fn stream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One standard-normal draw. Sampling happens in `f64` regardless of `T`, so
/// the draw sequence is identical across scalar types.
#[inline]
pub fn standard_normal<T: Real, R: Rng>(rng: &mut R) -> T {
    let x: f64 = rng.sample(StandardNormal);
    T::of(x)
}

/// One uniform draw on `[0, 2*pi)`.
#[inline]
pub fn uniform_angle<T: Real, R: Rng>(rng: &mut R) -> T {
    T::of(rng.gen_range(0.0..std::f64::consts::TAU))
}

/// One uniform draw on `[-1, 1)`.
#[inline]
pub fn uniform_symmetric<T: Real, R: Rng>(rng: &mut R) -> T {
    T::of(rng.gen_range(-1.0..1.0))
}
