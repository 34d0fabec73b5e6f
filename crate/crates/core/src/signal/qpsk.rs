//! Gray-mapped QPSK with unit average energy.
//!
//! Bits `(b0, b1)` select the signs of the in-phase and quadrature parts:
//! `(0,0) -> (1+j)/√2`, `(0,1) -> (1-j)/√2`, `(1,0) -> (-1+j)/√2`,
//! `(1,1) -> (-1-j)/√2`. Adjacent points differ in one bit.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

pub fn qpsk_modulate(b0: bool, b1: bool) -> Complex64 {
    let re = if b0 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    let im = if b1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}

/// Hard decision on the bit pair.
pub fn qpsk_demodulate(z: Complex64) -> (bool, bool) {
    (z.re < 0.0, z.im < 0.0)
}

/// Nearest constellation point.
pub fn slice(z: Complex64) -> Complex64 {
    let (b0, b1) = qpsk_demodulate(z);
    qpsk_modulate(b0, b1)
}

/// Constellation point for a 2-bit index (`b0` is the high bit).
pub fn symbol_from_index(i: u8) -> Complex64 {
    qpsk_modulate(i & 2 != 0, i & 1 != 0)
}

pub fn random_symbol<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    symbol_from_index(rng.random_range(0..4u8))
}

/// Bit errors between two constellation points (decided by sign).
pub fn bit_errors(sent: Complex64, decided: Complex64) -> u32 {
    u32::from((sent.re < 0.0) != (decided.re < 0.0)) + u32::from((sent.im < 0.0) != (decided.im < 0.0))
}
