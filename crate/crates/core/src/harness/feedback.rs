//! Scalar quantization of power-allocation vectors and the binary symmetric
//! feedback channel.

use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Serialized feedback: `n_b` bits (MSB first) per transmitted component.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackPacket {
    pub bits: Vec<bool>,
    pub bits_per_component: usize,
    /// Whether imaginary parts are carried too.
    pub complex: bool,
    /// Components that fell outside the quantizer range and were clipped.
    pub saturated: usize,
}

impl FeedbackPacket {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

fn levels(bits: usize) -> u64 {
    1u64 << bits
}

/// Index of the mid-rise uniform quantizer over `[-range, range]`.
fn quantize_scalar(x: f64, range: f64, bits: usize) -> (u64, bool) {
    let n = levels(bits);
    let step = 2.0 * range / n as f64;
    let clipped = x.clamp(-range, range);
    let idx = ((clipped + range) / step).floor() as i64;
    (idx.clamp(0, n as i64 - 1) as u64, x.abs() > range)
}

fn reconstruct(idx: u64, range: f64, bits: usize) -> f64 {
    let step = 2.0 * range / levels(bits) as f64;
    -range + step * (idx as f64 + 0.5)
}

/// Reconstruction levels of the quantizer.
pub fn reconstruction_levels(range: f64, bits: usize) -> Vec<f64> {
    (0..levels(bits)).map(|i| reconstruct(i, range, bits)).collect()
}

/// Quantizes each coefficient with `bits` bits over `[-ranges[i], ranges[i]]`.
pub fn quantize_power_vector(values: &[Complex64], ranges: &[f64], bits: usize, complex: bool) -> Result<FeedbackPacket> {
    if bits == 0 || bits > 32 {
        return Err(Error::param("n_b", "bits per coefficient must lie in 1..=32"));
    }
    if values.len() != ranges.len() {
        return Err(Error::shape("one quantizer range per coefficient is required"));
    }
    let mut out = Vec::with_capacity(values.len() * bits * if complex { 2 } else { 1 });
    let mut saturated = 0;
    let mut push = |x: f64, range: f64, out: &mut Vec<bool>| {
        let (idx, sat) = quantize_scalar(x, range, bits);
        saturated += usize::from(sat);
        for b in (0..bits).rev() {
            out.push((idx >> b) & 1 == 1);
        }
    };
    for (v, &range) in values.iter().zip(ranges) {
        if !(range > 0.0) {
            return Err(Error::param("range", "quantizer range must be positive"));
        }
        push(v.re, range, &mut out);
        if complex {
            push(v.im, range, &mut out);
        }
    }
    Ok(FeedbackPacket {
        bits: out,
        bits_per_component: bits,
        complex,
        saturated,
    })
}

/// Inverse of [`quantize_power_vector`].
pub fn dequantize_power_vector(packet: &FeedbackPacket, ranges: &[f64]) -> Result<Vec<Complex64>> {
    let per = packet.bits_per_component * if packet.complex { 2 } else { 1 };
    if packet.bits.len() != per * ranges.len() {
        return Err(Error::shape("feedback packet length does not match the coefficient count"));
    }
    let read = |chunk: &[bool]| chunk.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
    Ok(packet
        .bits
        .chunks(per)
        .zip(ranges)
        .map(|(chunk, &range)| {
            let (re_bits, im_bits) = chunk.split_at(packet.bits_per_component);
            let re = reconstruct(read(re_bits), range, packet.bits_per_component);
            let im = if packet.complex {
                reconstruct(read(im_bits), range, packet.bits_per_component)
            } else {
                0.0
            };
            Complex64::new(re, im)
        })
        .collect())
}

/// Flips each bit independently with probability `p`.
pub fn bsc_transmit<R: Rng + ?Sized>(bits: &[bool], p: f64, rng: &mut R) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("P_e", "error probability must lie in [0, 1]"));
    }
    Ok(bits.iter().map(|&b| b ^ (rng.random::<f64>() < p)).collect())
}

/// Feedback bits per packet for the group-constrained scheme with `G = K`.
pub fn group_feedback_bits(users: usize, relays: usize, bits: usize) -> usize {
    (relays + 1) * users * bits
}

/// Feedback bits per user for individual constraints (`G = 1`).
pub fn individual_feedback_bits(relays: usize, bits: usize) -> usize {
    (relays + 1) * bits
}

/// Feedback bits of a transmit-diversity selection pattern.
pub fn tds_feedback_bits(relays: usize, streams: usize) -> usize {
    relays * streams
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn reconstruction_levels_round_trip_exactly() {
        let levels = reconstruction_levels(1.5, 4);
        let vals: Vec<Complex64> = levels.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let ranges = vec![1.5; vals.len()];
        let pkt = quantize_power_vector(&vals, &ranges, 4, false).unwrap();
        assert_eq!(dequantize_power_vector(&pkt, &ranges).unwrap(), vals);
    }

    #[test]
    fn packet_length_for_group_scheme() {
        assert_eq!(group_feedback_bits(8, 2, 4), 96);
        let vals = vec![Complex64::new(0.2, 0.0); 24];
        let pkt = quantize_power_vector(&vals, &vec![1.0; 24], 4, false).unwrap();
        assert_eq!(pkt.len(), 96);
        assert_eq!(tds_feedback_bits(10, 2), 20);
        assert_eq!(individual_feedback_bits(2, 4), 12);
    }

    #[test]
    fn saturation_is_flagged() {
        let pkt = quantize_power_vector(&[Complex64::new(3.0, 0.0)], &[1.0], 3, false).unwrap();
        assert_eq!(pkt.saturated, 1);
        let back = dequantize_power_vector(&pkt, &[1.0]).unwrap();
        assert!((back[0].re - (1.0 - 1.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn bsc_extremes() {
        let mut rng = stream_rng(1, 0, Stream::Feedback);
        let bits = vec![true, false, true, true];
        assert_eq!(bsc_transmit(&bits, 0.0, &mut rng).unwrap(), bits);
        let flipped: Vec<bool> = bits.iter().map(|b| !b).collect();
        assert_eq!(bsc_transmit(&bits, 1.0, &mut rng).unwrap(), flipped);
        assert!(bsc_transmit(&bits, 1.5, &mut rng).is_err());
    }
}
