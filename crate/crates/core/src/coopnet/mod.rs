//! Two-phase cooperative transmission.
//!
//! In the first phase every source broadcasts to the destination and to the
//! relays; in the second phase the relays forward what they received (AF) or
//! what they decoded (DF). The destination stacks one `M`-sample block per
//! phase into the observation vector `r[i]` of length `J`.
//!
//! A transmitted waveform on a link is described by [`LinkWaveforms`]: the
//! channel-convolved signature of the current symbol plus the parts of the
//! neighbouring symbols that spill into the observation window.

mod cdma;
mod hop;
mod mimo;
mod relay;

pub use cdma::{CdmaNetwork, LinkAmplitudes, LinkChannelSet, NetworkConfig, RelayProtocol};
pub use hop::{
    add_noise, assemble_received, effective_signature, hop_covariance, hop_signal, signature_stack, transmit_phase,
    LinkWaveforms, SymbolTriplet,
};
pub use mimo::{MimoConfig, MimoNetwork};
pub use relay::{relay_process, RelayDecision, RelayFilters};
