use super::hop::LinkWaveforms;
use crate::linalg::CMat;
use crate::rng::complex_gaussian;
use crate::{Error, Result};
use rand::Rng;

/// Flat-fading MIMO relay network: a `K`-antenna source, `n_r` relays with
/// `M` receive and `K` transmit antennas, and an `M`-antenna destination.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoConfig {
    /// Source streams (and transmit antennas per relay) `K`.
    pub streams: usize,
    pub relays: usize,
    /// Receive antennas `M` at relays and destination.
    pub antennas: usize,
    pub noise_variance: f64,
}

impl MimoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.streams == 0 || self.antennas == 0 {
            return Err(Error::param("K/M", "streams and antennas must be positive"));
        }
        if !(self.noise_variance > 0.0) {
            return Err(Error::param("sigma2", "noise variance must be positive"));
        }
        Ok(())
    }

    /// Observation length `J = 2M` (direct phase plus relay phase).
    pub fn observation_len(&self) -> usize {
        2 * self.antennas
    }

    /// Relay transmit antennas `n_r K`.
    pub fn relay_antennas(&self) -> usize {
        self.relays * self.streams
    }
}

/// Channel realization of the MIMO relay network.
#[derive(Debug, Clone)]
pub struct MimoNetwork {
    pub config: MimoConfig,
    /// Source to destination, `M x K`.
    pub source_destination: CMat,
    /// Source to relay `j`, `M x K`.
    pub source_relay: Vec<CMat>,
    /// Relay `j` to destination, `M x K`.
    pub relay_destination: Vec<CMat>,
}

impl MimoNetwork {
    /// Rayleigh channels with `CN(0, 1)` entries.
    pub fn generate<R: Rng + ?Sized>(config: MimoConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let (m, k) = (config.antennas, config.streams);
        let mut draw = || CMat::from_fn(m, k, |_, _| complex_gaussian(rng, 1.0));
        let source_destination = draw();
        let source_relay = (0..config.relays).map(|_| draw()).collect();
        let relay_destination = (0..config.relays).map(|_| draw()).collect();
        Ok(Self {
            config,
            source_destination,
            source_relay,
            relay_destination,
        })
    }

    fn columns(h: &CMat) -> Vec<LinkWaveforms> {
        (0..h.ncols()).map(|k| LinkWaveforms::flat(h.column(k).into_owned())).collect()
    }

    /// Per-stream waveforms of the direct link.
    pub fn direct_waveforms(&self) -> Vec<LinkWaveforms> {
        Self::columns(&self.source_destination)
    }

    /// Per-stream waveforms at relay `j`.
    pub fn relay_input_waveforms(&self, j: usize) -> Vec<LinkWaveforms> {
        Self::columns(&self.source_relay[j])
    }

    /// Waveforms of relay antennas at the destination, indexed `[relay][antenna]`.
    pub fn relay_output_waveforms(&self) -> Vec<Vec<LinkWaveforms>> {
        self.relay_destination.iter().map(Self::columns).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn shapes_follow_the_configuration() {
        let cfg = MimoConfig {
            streams: 2,
            relays: 3,
            antennas: 4,
            noise_variance: 0.1,
        };
        assert_eq!(cfg.observation_len(), 8);
        assert_eq!(cfg.relay_antennas(), 6);
        let net = MimoNetwork::generate(cfg, &mut stream_rng(1, 0, Stream::Channels)).unwrap();
        assert_eq!(net.source_relay.len(), 3);
        assert_eq!(net.relay_destination[2].shape(), (4, 2));
        let out = net.relay_output_waveforms();
        assert_eq!(out.len(), 3);
        assert_eq!(out[1][1].main, net.relay_destination[1].column(1).into_owned());
        assert_eq!(net.direct_waveforms()[0].main, net.source_destination.column(0).into_owned());
    }

    #[test]
    fn degenerate_configurations_are_rejected() {
        let cfg = MimoConfig {
            streams: 0,
            relays: 1,
            antennas: 2,
            noise_variance: 0.1,
        };
        assert!(cfg.validate().is_err());
        let cfg = MimoConfig {
            streams: 1,
            noise_variance: 0.0,
            ..cfg
        };
        assert!(cfg.validate().is_err());
    }
}
