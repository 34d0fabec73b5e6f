//! MSE costs of antenna patterns and relays.

use super::TdsPattern;
use crate::coopnet::MimoNetwork;
use crate::linalg::{CMat, HermitianFactor};
use crate::{Error, Result};
use num_complex::Complex64;

/// Channel knowledge used to score patterns and relays.
///
/// The source splits unit power over its `K` streams and the relays split
/// unit power over the active antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoInstance {
    /// Source to destination, `M x K`.
    pub direct: CMat,
    /// Source to relay `j`, `M x K`.
    pub source_relay: Vec<CMat>,
    /// Relay `j` to destination, `M x K` (column `k` is antenna `k` of relay `j`).
    pub relay_destination: Vec<CMat>,
    pub noise_variance: f64,
}

impl MimoInstance {
    pub fn from_network(net: &MimoNetwork) -> Self {
        Self {
            direct: net.source_destination.clone(),
            source_relay: net.source_relay.clone(),
            relay_destination: net.relay_destination.clone(),
            noise_variance: net.config.noise_variance,
        }
    }

    pub fn streams(&self) -> usize {
        self.direct.ncols()
    }

    pub fn antennas(&self) -> usize {
        self.direct.nrows()
    }

    pub fn relays(&self) -> usize {
        self.relay_destination.len()
    }

    /// Per-stream source amplitude `1/√K`.
    pub fn source_amplitude(&self) -> f64 {
        1.0 / (self.streams() as f64).sqrt()
    }

    /// Per-antenna relay amplitude for `pattern`.
    pub fn relay_amplitude(pattern: &TdsPattern) -> f64 {
        match pattern.active_count() {
            0 => 0.0,
            n => 1.0 / (n as f64).sqrt(),
        }
    }

    /// Second-phase channel seen by the destination, `M x K`.
    pub fn relay_phase_matrix(&self, pattern: &TdsPattern) -> CMat {
        let (m, k) = (self.antennas(), self.streams());
        let g = Self::relay_amplitude(pattern);
        let mut h = CMat::zeros(m, k);
        for (j, hr) in self.relay_destination.iter().enumerate() {
            for s in 0..k {
                if pattern.is_active(j * k + s) {
                    h.column_mut(s).axpy(Complex64::new(g, 0.0), &hr.column(s), Complex64::new(1.0, 0.0));
                }
            }
        }
        h
    }

    /// Stacked two-phase channel `[H_sd/√K; Σ_j H_{r_j d} T_j g]`, `2M x K`.
    pub fn effective_matrix(&self, pattern: &TdsPattern) -> CMat {
        let (m, k) = (self.antennas(), self.streams());
        let mut h = CMat::zeros(2 * m, k);
        h.view_mut((0, 0), (m, k)).copy_from(&(&self.direct * Complex64::new(self.source_amplitude(), 0.0)));
        h.view_mut((m, 0), (m, k)).copy_from(&self.relay_phase_matrix(pattern));
        h
    }

    /// Direct link alone, `M x K`.
    pub fn direct_matrix(&self) -> CMat {
        &self.direct * Complex64::new(self.source_amplitude(), 0.0)
    }

    fn check(&self, pattern: &TdsPattern) -> Result<()> {
        if pattern.antennas() != self.relays() * self.streams() {
            return Err(Error::shape(format!(
                "pattern over {} antennas for {} relay antennas",
                pattern.antennas(),
                self.relays() * self.streams()
            )));
        }
        Ok(())
    }

    /// MMSE filters (columns) for the channel `h`.
    pub fn mmse_filters(h: &CMat, noise_variance: f64) -> CMat {
        let n = h.nrows();
        let r = h * h.adjoint() + CMat::identity(n, n) * Complex64::new(noise_variance, 0.0);
        HermitianFactor::new(&r).solve_mat(h)
    }

    /// `Σ_k (1 - h_k^H R^{-1} h_k)` for the channel `h`.
    pub fn sum_mse(h: &CMat, noise_variance: f64) -> f64 {
        let w = Self::mmse_filters(h, noise_variance);
        let captured: f64 = (0..h.ncols()).map(|k| h.column(k).dotc(&w.column(k)).re).sum();
        h.ncols() as f64 - captured
    }

    /// Destination filters for `pattern`, `2M x K`.
    pub fn tds_filters(&self, pattern: &TdsPattern) -> Result<CMat> {
        self.check(pattern)?;
        Ok(Self::mmse_filters(&self.effective_matrix(pattern), self.noise_variance))
    }

    /// Sum MSE at the destination under `pattern`, assuming correct relaying.
    pub fn tds_cost(&self, pattern: &TdsPattern) -> Result<f64> {
        self.check(pattern)?;
        Ok(Self::sum_mse(&self.effective_matrix(pattern), self.noise_variance))
    }

    /// First-phase channel at relay `j`, `M x K`.
    pub fn relay_input_matrix(&self, j: usize) -> CMat {
        &self.source_relay[j] * Complex64::new(self.source_amplitude(), 0.0)
    }

    /// Relay `j`'s MMSE filters (columns).
    pub fn relay_filters(&self, j: usize) -> CMat {
        Self::mmse_filters(&self.relay_input_matrix(j), self.noise_variance)
    }

    /// Sum MSE of relay `j`'s detectors.
    pub fn relay_mse(&self, j: usize) -> f64 {
        Self::sum_mse(&self.relay_input_matrix(j), self.noise_variance)
    }

    /// Summed relay MSEs of a removal candidate.
    pub fn relay_set_mse(&self, set: &[usize]) -> f64 {
        set.iter().map(|&j| self.relay_mse(j)).sum()
    }
}

/// Exponentially smoothed per-candidate cost estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedCosts {
    factor: f64,
    values: Vec<Option<f64>>,
}

impl SmoothedCosts {
    pub fn new(len: usize, factor: f64) -> Self {
        Self {
            factor,
            values: vec![None; len],
        }
    }

    /// Folds in a new sample; the first sample is taken as is.
    pub fn update(&mut self, i: usize, sample: f64) -> f64 {
        let v = match self.values[i] {
            None => sample,
            Some(old) => self.factor * old + (1.0 - self.factor) * sample,
        };
        self.values[i] = Some(v);
        v
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.values[i]
    }
}
