//! Packet-level simulation of the DS-CDMA cooperative uplink.
//!
//! A [`PacketRealization`] fixes everything that does not depend on the
//! scheme under test (codes, channels, symbols, relay decisions and the
//! destination noise stream), so schemes are compared on common random
//! numbers.

use super::feedback::{bsc_transmit, dequantize_power_vector, quantize_power_vector};
use crate::adaptive::{PowerMode, RalsConfig, RalsReceiver, Reference};
use crate::coopnet::{
    hop_covariance, relay_process, CdmaNetwork, LinkWaveforms, NetworkConfig, RelayFilters,
};
use crate::linalg::CVec;
use crate::mmse::{alternating_optimize, constraint_blocks, AlternatingOptions, DestinationModel, Multiplier};
use crate::rng::{complex_gaussian, stream_rng, SimRng, Stream};
use crate::signal::{bit_errors, generate_codes, random_symbol, slice, SignatureMatrix};
use crate::{Error, Result};
use num_complex::Complex64;

/// Detection schemes compared at the destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Direct link only, full power, adaptive MMSE receiver.
    Ncis,
    /// Equal power split over all links, adaptive MMSE receiver.
    Cis,
    /// Adaptive joint power allocation with group size `G`.
    Jpais { group: usize },
    /// Known-statistics joint power allocation with group size `G`.
    JpaisMmse { group: usize },
}

impl Scheme {
    /// Column label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            Scheme::Ncis => "ncis".into(),
            Scheme::Cis => "cis".into(),
            Scheme::Jpais { group } => format!("jpais_g{group}"),
            Scheme::JpaisMmse { group } => format!("jpais_mmse_g{group}"),
        }
    }

    /// Parses `ncis`, `cis`, `jpais:G` or `jpais_mmse:G`; `G` may be `K`.
    pub fn parse(text: &str, users: usize) -> Result<Self> {
        let text = text.trim();
        let group = |g: &str| -> Result<usize> {
            if g.eq_ignore_ascii_case("k") {
                return Ok(users);
            }
            g.parse()
                .map_err(|_| Error::Config(format!("invalid group size `{g}` in scheme `{text}`")))
        };
        match text.split_once(':') {
            None if text == "ncis" => Ok(Scheme::Ncis),
            None if text == "cis" => Ok(Scheme::Cis),
            Some(("jpais", g)) => Ok(Scheme::Jpais { group: group(g)? }),
            Some(("jpais_mmse", g)) => Ok(Scheme::JpaisMmse { group: group(g)? }),
            _ => Err(Error::Config(format!("unknown scheme `{text}`"))),
        }
    }

    fn group(&self) -> Option<usize> {
        match *self {
            Scheme::Jpais { group } | Scheme::JpaisMmse { group } => Some(group),
            _ => None,
        }
    }
}

/// Everything needed to simulate one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct CdmaParams {
    pub network: NetworkConfig,
    /// Symbols per packet `P`.
    pub packet_len: usize,
    /// Training symbols `N_tr`.
    pub training: usize,
    /// Normalized Doppler `f_d T`.
    pub doppler: f64,
    /// Bits per fed-back coefficient `n_b`.
    pub feedback_bits: usize,
    /// Feedback bit error probability `P_e`.
    pub feedback_error: f64,
    pub receiver: RalsConfig,
    /// Multiplier of the known-statistics allocation.
    pub multiplier: Multiplier,
    /// Alternations of the known-statistics allocation.
    pub batch_iterations: usize,
}

impl CdmaParams {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.packet_len == 0 || self.training == 0 || self.training >= self.packet_len {
            return Err(Error::param("N_tr", "need 0 < N_tr < P"));
        }
        if !(self.doppler >= 0.0) {
            return Err(Error::param("f_dT", "must be non-negative"));
        }
        if self.feedback_bits == 0 {
            return Err(Error::param("n_b", "at least one feedback bit is required"));
        }
        if !(0.0..=1.0).contains(&self.feedback_error) {
            return Err(Error::param("P_e", "must lie in [0, 1]"));
        }
        self.receiver.validate()
    }

    fn check_scheme(&self, scheme: Scheme) -> Result<()> {
        match scheme.group() {
            Some(g) if g == 0 || g > self.network.users => {
                Err(Error::param("G", format!("group size must lie in 1..={}", self.network.users)))
            }
            _ => Ok(()),
        }
    }
}

/// Scheme-independent draws of one packet.
#[derive(Debug, Clone)]
pub struct PacketRealization {
    pub network: CdmaNetwork,
    /// Source symbols `[user][i]`, `P + 1` entries (the last only feeds spill-over).
    pub symbols: Vec<Vec<Complex64>>,
    /// Symbols forwarded by each relay, `[relay][user][i]`.
    pub relayed: Vec<Vec<Vec<Complex64>>>,
    /// Destination-facing gains per symbol `[i][user][link]` when fading.
    fading_gains: Option<Vec<Vec<Vec<Vec<Complex64>>>>>,
    static_waves: Vec<Vec<LinkWaveforms>>,
    master: u64,
    run: u64,
}

impl PacketRealization {
    /// Draws the packet for `(master, run)`.
    pub fn generate(params: &CdmaParams, master: u64, run: u64) -> Result<Self> {
        params.validate()?;
        let cfg = &params.network;
        let codes = generate_codes(cfg.users, cfg.chips, &mut stream_rng(master, run, Stream::Codes))?;
        let mut channel_rng = stream_rng(master, run, Stream::Channels);
        let mut network =
            CdmaNetwork::generate(cfg.clone(), &codes, &mut channel_rng, &mut stream_rng(master, run, Stream::Powers))?;
        let p = params.packet_len;
        let mut sym_rng = stream_rng(master, run, Stream::Symbols);
        let symbols: Vec<Vec<Complex64>> = (0..cfg.users)
            .map(|_| (0..=p).map(|_| random_symbol(&mut sym_rng)).collect())
            .collect();
        let static_waves = network.destination_waveforms();
        let fading = params.doppler > 0.0;

        let mut relay_rng = stream_rng(master, run, Stream::RelayNoise);
        let mut relayed = vec![vec![vec![Complex64::new(0.0, 0.0); p + 1]; cfg.users]; cfg.relays];
        let mut gains = Vec::new();
        let mut filters: Option<Vec<RelayFilters>> = None;
        let src_amp: Vec<Complex64> = network.user_powers.iter().map(|&x| Complex64::new(x.sqrt(), 0.0)).collect();
        for i in 0..=p {
            if fading && i > 0 {
                network.evolve(params.doppler, &mut channel_rng)?;
            }
            if fading {
                gains.push(
                    network
                        .channels
                        .iter()
                        .map(|c| c.to_destination.iter().map(|l| l.gains.clone()).collect())
                        .collect(),
                );
            }
            if cfg.relays == 0 {
                continue;
            }
            let relay_waves = network.relay_waveforms();
            if fading || filters.is_none() {
                filters = Some(
                    relay_waves
                        .iter()
                        .map(|waves| {
                            let refs: Vec<&LinkWaveforms> = waves.iter().collect();
                            let cov = hop_covariance(&refs, &src_amp, cfg.isi, cfg.noise_variance);
                            let cross: Vec<CVec> =
                                waves.iter().zip(&src_amp).map(|(w, a)| &w.main * *a).collect();
                            RelayFilters::design(&cov, &cross)
                        })
                        .collect(),
                );
            }
            let filters = filters.as_ref().expect("relay filters designed above");
            for (j, waves) in relay_waves.iter().enumerate() {
                let mut obs = CVec::zeros(cfg.window());
                for (k, w) in waves.iter().enumerate() {
                    add_waveform(&mut obs, w, src_amp[k], &symbols[k], i, cfg.isi);
                }
                for z in obs.iter_mut() {
                    *z += complex_gaussian(&mut relay_rng, cfg.noise_variance);
                }
                let decision = relay_process(cfg.protocol, &obs, &filters[j]);
                for (k, s) in decision.symbols.into_iter().enumerate() {
                    relayed[j][k][i] = s;
                }
            }
        }
        Ok(Self {
            network,
            symbols,
            relayed,
            fading_gains: fading.then_some(gains),
            static_waves,
            master,
            run,
        })
    }

    fn config(&self) -> &NetworkConfig {
        &self.network.config
    }

    /// Destination waveforms in force at symbol `i`, `[user][link]`.
    pub fn waveforms_at(&self, i: usize) -> Vec<Vec<LinkWaveforms>> {
        match &self.fading_gains {
            None => self.static_waves.clone(),
            Some(g) => waveforms_from_gains(&self.network.signatures, &g[i], self.config().chips),
        }
    }

    /// Relay symbol error rate over the whole packet (all relays and users).
    pub fn relay_symbol_error_rate(&self) -> f64 {
        let mut errors = 0usize;
        let mut total = 0usize;
        for relay in &self.relayed {
            for (k, seq) in relay.iter().enumerate() {
                for (i, s) in seq.iter().enumerate() {
                    total += 1;
                    errors += usize::from(slice(*s) != self.symbols[k][i]);
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            errors as f64 / total as f64
        }
    }

    fn destination_noise(&self) -> SimRng {
        stream_rng(self.master, self.run, Stream::DestinationNoise)
    }

    /// Destination observation at symbol `i` for transmit amplitudes `amps`
    /// (`[user][link]`); only the first `links` blocks are returned.
    fn received(&self, waves: &[Vec<LinkWaveforms>], amps: &[CVec], i: usize, links: usize, noise: &mut SimRng) -> CVec {
        let cfg = self.config();
        let m = cfg.window();
        let mut r = CVec::zeros(cfg.links() * m);
        for (k, user) in waves.iter().enumerate() {
            for (j, w) in user.iter().enumerate().take(amps[k].len()) {
                let seq = if j == 0 { &self.symbols[k] } else { &self.relayed[j - 1][k] };
                let mut block = r.rows_mut(j * m, m).into_owned();
                add_waveform(&mut block, w, amps[k][j], seq, i, cfg.isi);
                r.rows_mut(j * m, m).copy_from(&block);
            }
        }
        // The full noise vector is always drawn to keep streams aligned.
        for z in r.iter_mut() {
            *z += complex_gaussian(noise, cfg.noise_variance);
        }
        r.rows(0, links * m).into_owned()
    }

    /// Fixed-statistics model of the destination at symbol `i`.
    pub fn model_at(&self, i: usize) -> DestinationModel {
        DestinationModel {
            waves: self.waveforms_at(i),
            noise_variance: self.config().noise_variance,
            isi: self.config().isi,
            user_powers: self.network.user_powers.clone(),
        }
    }
}

fn add_waveform(out: &mut CVec, w: &LinkWaveforms, amp: Complex64, seq: &[Complex64], i: usize, isi: bool) {
    if amp == Complex64::new(0.0, 0.0) {
        return;
    }
    let one = Complex64::new(1.0, 0.0);
    out.axpy(amp * seq[i], &w.main, one);
    if isi {
        if i > 0 {
            out.axpy(amp * seq[i - 1], &w.tail, one);
        }
        if i + 1 < seq.len() {
            out.axpy(amp * seq[i + 1], &w.head, one);
        }
    }
}

fn waveforms_from_gains(signatures: &[SignatureMatrix], gains: &[Vec<Vec<Complex64>>], chips: usize) -> Vec<Vec<LinkWaveforms>> {
    signatures
        .iter()
        .zip(gains)
        .map(|(s, links)| links.iter().map(|h| LinkWaveforms::with_isi(s.apply(h), chips)).collect())
        .collect()
}

/// Outcome of one scheme on one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRun {
    pub scheme: Scheme,
    /// Bit errors over the data symbols (after training).
    pub data_errors: u64,
    /// Bits counted in `data_errors`.
    pub data_bits: u64,
    /// Bit errors of all users at each symbol index.
    pub per_symbol_errors: Vec<u32>,
    /// `Σ_k |d_k - z_k|²` at each symbol index (training reference, then decisions).
    pub squared_error: Vec<f64>,
    /// Largest power-constraint violation observed after any power update.
    pub max_constraint_violation: f64,
    /// Feedback coefficients that saturated the quantizer.
    pub saturated: usize,
    /// Feedback bits flipped by the channel.
    pub flipped_bits: usize,
}

impl SchemeRun {
    fn new(scheme: Scheme, p: usize) -> Self {
        Self {
            scheme,
            data_errors: 0,
            data_bits: 0,
            per_symbol_errors: vec![0; p],
            squared_error: vec![0.0; p],
            max_constraint_violation: 0.0,
            saturated: 0,
            flipped_bits: 0,
        }
    }

    fn record(&mut self, i: usize, training: usize, sent: &[Complex64], decided: &[Complex64]) {
        let errors: u32 = sent.iter().zip(decided).map(|(&s, &d)| bit_errors(s, d)).sum();
        self.per_symbol_errors[i] = errors;
        if i >= training {
            self.data_errors += u64::from(errors);
            self.data_bits += 2 * sent.len() as u64;
        }
    }
}

/// Amplitudes after the one-shot feedback: what the receiver intended and
/// what the sources decode from the (possibly corrupted) packet.
struct FeedbackOutcome {
    intended: Vec<CVec>,
    applied: Vec<CVec>,
    saturated: usize,
    flipped: usize,
}

fn feed_back(
    params: &CdmaParams,
    amps: &[CVec],
    group: &[usize],
    user_powers: &[f64],
    rng: &mut SimRng,
) -> Result<FeedbackOutcome> {
    let links = amps[0].len();
    let mut ranges = vec![0.0; amps.len() * links];
    for block in constraint_blocks(group, user_powers) {
        for &k in &block.users {
            ranges[k * links..(k + 1) * links].fill(block.budget.sqrt());
        }
    }
    let flat: Vec<Complex64> = amps.iter().flat_map(|a| a.iter().copied()).collect();
    let complex = !params.receiver.domain.is_real();
    let packet = quantize_power_vector(&flat, &ranges, params.feedback_bits, complex)?;
    let intended = dequantize_power_vector(&packet, &ranges)?;
    let mut noisy = packet.clone();
    noisy.bits = bsc_transmit(&packet.bits, params.feedback_error, rng)?;
    let flipped = noisy.bits.iter().zip(&packet.bits).filter(|(a, b)| a != b).count();
    let applied = dequantize_power_vector(&noisy, &ranges)?;
    let unflatten = |v: Vec<Complex64>| -> Vec<CVec> { v.chunks(links).map(|c| CVec::from_column_slice(c)).collect() };
    Ok(FeedbackOutcome {
        intended: unflatten(intended),
        applied: unflatten(applied),
        saturated: packet.saturated,
        flipped,
    })
}

fn column(seqs: &[Vec<Complex64>], i: usize) -> Vec<Complex64> {
    seqs.iter().map(|s| s[i]).collect()
}

/// Runs `scheme` over one packet.
pub fn run_scheme(params: &CdmaParams, packet: &PacketRealization, scheme: Scheme) -> Result<SchemeRun> {
    params.check_scheme(scheme)?;
    match scheme {
        Scheme::JpaisMmse { group } => run_batch(params, packet, group),
        _ => run_adaptive(params, packet, scheme),
    }
}

fn run_adaptive(params: &CdmaParams, packet: &PacketRealization, scheme: Scheme) -> Result<SchemeRun> {
    let net = &packet.network;
    let cfg = &net.config;
    let powers = &net.user_powers;
    let p = params.packet_len;
    let (links, initial, mut rx_cfg) = match scheme {
        Scheme::Ncis => (
            1,
            powers.iter().map(|&x| CVec::from_element(1, Complex64::new(x.sqrt(), 0.0))).collect::<Vec<_>>(),
            RalsConfig {
                power: PowerMode::Frozen,
                group_size: 1,
                ..params.receiver.clone()
            },
        ),
        Scheme::Cis => (
            cfg.links(),
            packet.model_at(0).equal_amplitudes(),
            RalsConfig {
                power: PowerMode::Frozen,
                group_size: 1,
                ..params.receiver.clone()
            },
        ),
        Scheme::Jpais { group } => (
            cfg.links(),
            packet.model_at(0).equal_amplitudes(),
            RalsConfig {
                power: PowerMode::Adaptive,
                group_size: group,
                ..params.receiver.clone()
            },
        ),
        Scheme::JpaisMmse { .. } => unreachable!("batch scheme handled separately"),
    };
    if links == 1 {
        rx_cfg.power = PowerMode::Frozen;
    }
    let adaptive_power = rx_cfg.power == PowerMode::Adaptive;
    let mut rx = RalsReceiver::new(rx_cfg, net.signatures.clone(), powers.clone(), &initial)?;
    let mut tx = initial;
    let mut noise = packet.destination_noise();
    let mut feedback_rng = stream_rng(packet.master, packet.run, Stream::Feedback);
    let mut out = SchemeRun::new(scheme, p);
    for i in 0..p {
        let waves = packet.waveforms_at(i);
        let r = packet.received(&waves, &tx, i, links, &mut noise);
        let sent = column(&packet.symbols, i);
        let reference = if i < params.training {
            Reference::Training(&sent)
        } else {
            Reference::DecisionDirected
        };
        let step = rx.step(&r, reference)?;
        out.record(i, params.training, &sent, &step.decisions);
        out.squared_error[i] = step.squared_error;
        if adaptive_power && i < params.training {
            if i + 1 == params.training {
                let fb = feed_back(params, &rx.amplitudes(), rx.group(), powers, &mut feedback_rng)?;
                rx.set_amplitudes(&fb.intended);
                rx.freeze_power();
                tx = fb.applied;
                out.saturated = fb.saturated;
                out.flipped_bits = fb.flipped;
            } else {
                tx = rx.amplitudes();
            }
        }
    }
    out.max_constraint_violation = rx.max_constraint_violation();
    Ok(out)
}

fn run_batch(params: &CdmaParams, packet: &PacketRealization, group: usize) -> Result<SchemeRun> {
    let p = params.packet_len;
    let model = packet.model_at(0);
    let opts = AlternatingOptions {
        group_size: group,
        multiplier: params.multiplier,
        domain: params.receiver.domain,
        iterations: params.batch_iterations,
        ..AlternatingOptions::default()
    };
    let design = alternating_optimize(&model, &opts)?;
    let mut feedback_rng = stream_rng(packet.master, packet.run, Stream::Feedback);
    let fb = feed_back(params, &design.amplitudes, &design.group, &model.user_powers, &mut feedback_rng)?;
    let filters = model.filters(&fb.intended);
    let links = model.links();
    let mut noise = packet.destination_noise();
    let mut out = SchemeRun::new(Scheme::JpaisMmse { group }, p);
    out.saturated = fb.saturated;
    out.flipped_bits = fb.flipped;
    for i in 0..p {
        let waves = packet.waveforms_at(i);
        // Training symbols are not detected, but the noise stream advances.
        let r = packet.received(&waves, &fb.applied, i, links, &mut noise);
        let sent = column(&packet.symbols, i);
        let outputs: Vec<Complex64> = filters.iter().map(|w| w.dotc(&r)).collect();
        let decided: Vec<Complex64> = outputs.iter().map(|&z| slice(z)).collect();
        out.squared_error[i] = sent.iter().zip(&outputs).map(|(s, z)| (s - z).norm_sqr()).sum();
        out.record(i, params.training, &sent, &decided);
    }
    Ok(out)
}

/// Runs every scheme on the packet of `(master, run)`.
pub fn run_packet(params: &CdmaParams, schemes: &[Scheme], master: u64, run: u64) -> Result<Vec<SchemeRun>> {
    let packet = PacketRealization::generate(params, master, run)?;
    schemes.iter().map(|&s| run_scheme(params, &packet, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coopnet::RelayProtocol;

    fn params() -> CdmaParams {
        CdmaParams {
            network: NetworkConfig {
                users: 3,
                relays: 1,
                chips: 8,
                paths: 3,
                noise_variance: 0.05,
                protocol: RelayProtocol::DecodeForward,
                isi: true,
                power_spread_db: 3.0,
            },
            packet_len: 120,
            training: 40,
            doppler: 0.0,
            feedback_bits: 4,
            feedback_error: 0.0,
            receiver: RalsConfig::default(),
            multiplier: Multiplier::Fixed(0.025),
            batch_iterations: 10,
        }
    }

    #[test]
    fn scheme_labels_round_trip() {
        for text in ["ncis", "cis", "jpais:2", "jpais_mmse:3"] {
            let s = Scheme::parse(text, 3).unwrap();
            assert_eq!(Scheme::parse(&s.label().replace("_g", ":"), 3).unwrap(), s);
        }
        assert_eq!(Scheme::parse("jpais:K", 5).unwrap(), Scheme::Jpais { group: 5 });
        assert!(Scheme::parse("jpais", 3).is_err());
        assert!(Scheme::parse("jpais:x", 3).is_err());
    }

    #[test]
    fn packets_are_reproducible_and_shared_by_schemes() {
        let p = params();
        let a = run_packet(&p, &[Scheme::Cis, Scheme::Jpais { group: 3 }], 11, 2).unwrap();
        let b = run_packet(&p, &[Scheme::Cis, Scheme::Jpais { group: 3 }], 11, 2).unwrap();
        assert_eq!(a, b);
        let pk = PacketRealization::generate(&p, 11, 2).unwrap();
        assert_eq!(pk.symbols[0].len(), p.packet_len + 1);
        assert_eq!(run_scheme(&p, &pk, Scheme::Cis).unwrap(), a[0]);
        assert_eq!(a[0].data_bits, 2 * 3 * (p.packet_len - p.training) as u64);
    }

    #[test]
    fn oversized_group_is_rejected() {
        let p = params();
        let pk = PacketRealization::generate(&p, 1, 0).unwrap();
        assert!(run_scheme(&p, &pk, Scheme::Jpais { group: 4 }).is_err());
        assert!(run_scheme(&p, &pk, Scheme::JpaisMmse { group: 0 }).is_err());
    }

    #[test]
    fn adaptive_power_keeps_the_budget_and_feedback_is_clean() {
        let p = params();
        let runs = run_packet(&p, &[Scheme::Jpais { group: 2 }, Scheme::JpaisMmse { group: 3 }], 3, 0).unwrap();
        for r in &runs {
            assert!(r.max_constraint_violation < 1e-10);
            assert_eq!(r.flipped_bits, 0);
        }
    }

    #[test]
    fn validation_catches_bad_training_length() {
        let mut p = params();
        p.training = p.packet_len;
        assert!(p.validate().is_err());
        p.training = 10;
        p.feedback_error = 1.5;
        assert!(p.validate().is_err());
    }
}
