//! Counter-based random substreams.
//!
//! Every consumer derives its generator from `(master seed, domain, counter)`,
//! so a trial draws the same numbers no matter which thread runs it or in
//! which order trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent purposes that share one master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    NoiseDraw = 1,
    Shots = 2,
    DetectionShot = 3,
    Fixture = 4,
}

/// Generator for trial `counter` of `domain` under `seed`.
pub fn substream(seed: u64, domain: Domain, counter: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(counter);
    rng
}
