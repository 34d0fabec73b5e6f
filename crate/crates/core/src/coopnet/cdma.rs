use super::hop::LinkWaveforms;
use crate::linalg::CVec;
use crate::rng::complex_gaussian;
use crate::signal::{gen_channel, ChannelRealization, FadingProcess, SignatureMatrix, SpreadingCode};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// What a relay forwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayProtocol {
    AmplifyForward,
    DecodeForward,
}

/// Static description of a DS-CDMA cooperative network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Users `K`.
    pub users: usize,
    /// Relays `n_r`.
    pub relays: usize,
    /// Spreading gain `N`.
    pub chips: usize,
    /// Multipath components `L`.
    pub paths: usize,
    /// Noise variance `σ²` per complex sample.
    pub noise_variance: f64,
    pub protocol: RelayProtocol,
    /// Include inter-symbol spill-over.
    pub isi: bool,
    /// Standard deviation in dB of the log-normal per-user power `P_{A,k}`.
    pub power_spread_db: f64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::param("K", "at least one user is required"));
        }
        if self.chips == 0 {
            return Err(Error::param("N", "spreading gain must be at least 1"));
        }
        if self.paths == 0 {
            return Err(Error::param("L", "at least one path is required"));
        }
        if !(self.noise_variance > 0.0) {
            return Err(Error::param("sigma2", "noise variance must be positive"));
        }
        if !(self.power_spread_db >= 0.0) {
            return Err(Error::param("power_spread_db", "must be non-negative"));
        }
        Ok(())
    }

    /// Window length `M = N + L - 1`.
    pub fn window(&self) -> usize {
        self.chips + self.paths - 1
    }

    /// Links reaching the destination, `n_r + 1`.
    pub fn links(&self) -> usize {
        self.relays + 1
    }

    /// Destination observation length `J = (n_r + 1) M`.
    pub fn observation_len(&self) -> usize {
        self.links() * self.window()
    }

    /// Stacked channel length `Q = (n_r + 1) L`.
    pub fn channel_len(&self) -> usize {
        self.links() * self.paths
    }
}

/// Channels of one user: destination-facing links (direct first, then relays
/// in index order) and source-to-relay links.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannelSet {
    pub to_destination: Vec<ChannelRealization>,
    pub to_relays: Vec<ChannelRealization>,
}

impl LinkChannelSet {
    pub fn generate<R: Rng + ?Sized>(relays: usize, paths: usize, rng: &mut R) -> Result<Self> {
        let to_destination = (0..=relays).map(|_| gen_channel(paths, rng)).collect::<Result<_>>()?;
        let to_relays = (0..relays).map(|_| gen_channel(paths, rng)).collect::<Result<_>>()?;
        Ok(Self {
            to_destination,
            to_relays,
        })
    }

    /// Stacked destination-facing gains `h_k` of length `Q`.
    pub fn stacked(&self) -> CVec {
        let gains: Vec<Complex64> = self.to_destination.iter().flat_map(|c| c.gains.iter().copied()).collect();
        CVec::from_vec(gains)
    }

    /// Advances every link by one symbol.
    pub fn evolve<R: Rng + ?Sized>(&mut self, normalized_doppler: f64, rng: &mut R) -> Result<()> {
        for link in self.to_destination.iter_mut().chain(self.to_relays.iter_mut()) {
            let process = FadingProcess::new(link.profile.clone(), normalized_doppler)?;
            process.advance(&mut link.gains, 1, rng)?;
        }
        Ok(())
    }
}

/// Transmit amplitudes for one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkAmplitudes {
    /// Source-to-relay amplitude per user.
    pub source_relay: Vec<f64>,
    /// Destination-facing amplitudes per user, `n_r + 1` each.
    pub destination: Vec<CVec>,
}

impl LinkAmplitudes {
    /// Power `P_{A,k}` split equally over the destination-facing links.
    pub fn equal(user_powers: &[f64], links: usize) -> Self {
        Self {
            source_relay: user_powers.iter().map(|p| p.sqrt()).collect(),
            destination: user_powers
                .iter()
                .map(|&p| CVec::from_element(links, Complex64::new((p / links as f64).sqrt(), 0.0)))
                .collect(),
        }
    }

    /// Whole power on the direct link.
    pub fn direct_only(user_powers: &[f64], links: usize) -> Self {
        Self {
            source_relay: user_powers.iter().map(|p| p.sqrt()).collect(),
            destination: user_powers
                .iter()
                .map(|&p| {
                    let mut a = CVec::zeros(links);
                    a[0] = Complex64::new(p.sqrt(), 0.0);
                    a
                })
                .collect(),
        }
    }
}

/// One realization of the DS-CDMA network.
#[derive(Debug, Clone)]
pub struct CdmaNetwork {
    pub config: NetworkConfig,
    pub signatures: Vec<SignatureMatrix>,
    pub channels: Vec<LinkChannelSet>,
    /// Per-user power `P_{A,k}`.
    pub user_powers: Vec<f64>,
}

impl CdmaNetwork {
    pub fn new(config: NetworkConfig, codes: &[SpreadingCode], channels: Vec<LinkChannelSet>, user_powers: Vec<f64>) -> Result<Self> {
        config.validate()?;
        if codes.len() != config.users || channels.len() != config.users || user_powers.len() != config.users {
            return Err(Error::shape("codes, channels and powers must have one entry per user"));
        }
        for ch in &channels {
            if ch.to_destination.len() != config.links() || ch.to_relays.len() != config.relays {
                return Err(Error::shape("channel set does not match the relay count"));
            }
            if ch.to_destination.iter().chain(&ch.to_relays).any(|c| c.gains.len() != config.paths) {
                return Err(Error::shape("channel length does not match the path count"));
            }
        }
        if codes.iter().any(|c| c.len() != config.chips) {
            return Err(Error::shape("code length does not match the spreading gain"));
        }
        let signatures = codes
            .iter()
            .map(|c| SignatureMatrix::new(c, config.paths))
            .collect::<Result<_>>()?;
        Ok(Self {
            config,
            signatures,
            channels,
            user_powers,
        })
    }

    /// Draws channels and log-normal user powers for the given codes.
    pub fn generate<R: Rng + ?Sized, S: Rng + ?Sized>(
        config: NetworkConfig,
        codes: &[SpreadingCode],
        channel_rng: &mut R,
        power_rng: &mut S,
    ) -> Result<Self> {
        config.validate()?;
        let channels = (0..config.users)
            .map(|_| LinkChannelSet::generate(config.relays, config.paths, channel_rng))
            .collect::<Result<Vec<_>>>()?;
        let user_powers = (0..config.users)
            .map(|_| {
                let g: f64 = power_rng.sample(StandardNormal);
                10f64.powf(config.power_spread_db * g / 10.0)
            })
            .collect();
        Self::new(config, codes, channels, user_powers)
    }

    fn waveform(&self, k: usize, link: &ChannelRealization) -> LinkWaveforms {
        let main = self.signatures[k].apply(&link.gains);
        LinkWaveforms::with_isi(main, self.config.chips)
    }

    /// Destination-facing waveforms, indexed `[user][link]`.
    pub fn destination_waveforms(&self) -> Vec<Vec<LinkWaveforms>> {
        self.channels
            .iter()
            .enumerate()
            .map(|(k, ch)| ch.to_destination.iter().map(|l| self.waveform(k, l)).collect())
            .collect()
    }

    /// Source-to-relay waveforms, indexed `[relay][user]`.
    pub fn relay_waveforms(&self) -> Vec<Vec<LinkWaveforms>> {
        (0..self.config.relays)
            .map(|j| {
                self.channels
                    .iter()
                    .enumerate()
                    .map(|(k, ch)| self.waveform(k, &ch.to_relays[j]))
                    .collect()
            })
            .collect()
    }

    /// Advances all channels by one symbol.
    pub fn evolve<R: Rng + ?Sized>(&mut self, normalized_doppler: f64, rng: &mut R) -> Result<()> {
        for ch in &mut self.channels {
            ch.evolve(normalized_doppler, rng)?;
        }
        Ok(())
    }

    /// Noise sample helper for the network's `σ²`.
    pub fn noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        complex_gaussian(rng, self.config.noise_variance)
    }
}
