//! Waveforms and channels: spreading codes, multipath channels, QPSK.

mod channel;
mod code;
mod qpsk;

pub use channel::{bessel_j0, gen_channel, ChannelRealization, FadingProcess};
pub use code::{generate_codes, isi_head, isi_tail, SignatureMatrix, SpreadingCode};
pub use qpsk::{bit_errors, qpsk_demodulate, qpsk_modulate, random_symbol, slice, symbol_from_index};
