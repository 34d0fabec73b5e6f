//! Deterministic random streams.
//!
//! Every run derives independent ChaCha streams from a master seed, a run
//! index and a purpose tag, so that changing one part of an experiment (for
//! instance the feedback error rate) leaves every other random draw intact.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

/// Purpose tags for independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Codes = 1,
    Channels = 2,
    Symbols = 3,
    RelayNoise = 4,
    DestinationNoise = 5,
    Powers = 6,
    Feedback = 7,
    Selection = 8,
    Pilots = 9,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for `(master, run, stream)`.
pub fn derive_seed(master: u64, run: u64, stream: Stream) -> u64 {
    splitmix(splitmix(master ^ splitmix(run.wrapping_add(1))) ^ (stream as u64).wrapping_mul(0xA24B_AED4_963E_E407))
}

/// Generator for `(master, run, stream)`.
pub fn stream_rng(master: u64, run: u64, stream: Stream) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, run, stream))
}

/// Draws from `CN(0, variance)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}
