//! Simulation library for cooperative relay networks.
//!
//! Two system models share one set of tools:
//!
//! * a DS-CDMA uplink in which each source is helped by `n_r` relays over
//!   multipath channels, detected at the destination by linear MMSE filters
//!   whose transmit amplitudes are jointly optimized with the filters;
//! * a flat-fading MIMO relay network in which the destination selects which
//!   relay transmit antennas are active and which relay to drop.
//!
//! Modules are layered bottom-up: [`signal`] produces waveforms and channels,
//! [`coopnet`] simulates the two-phase network, [`mmse`] holds the
//! known-statistics designs, [`adaptive`] the recursive estimators,
//! [`selection`] the antenna/relay selection machinery and [`harness`] the
//! Monte-Carlo experiments that tie them together.

pub mod adaptive;
pub mod coopnet;
mod error;
pub mod harness;
pub mod linalg;
pub mod mmse;
pub mod rng;
pub mod selection;
pub mod signal;

pub use error::{Error, Result};
pub use num_complex::Complex64;
