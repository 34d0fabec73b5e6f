//! Plain-text experiment configuration: one `key = value` per line, `#`
//! starts a comment, lists are comma separated.

use super::cdma::{CdmaParams, Scheme};
use super::mimo::{MimoParams, MimoScheme};
use crate::adaptive::RalsConfig;
use crate::coopnet::{MimoConfig, NetworkConfig, RelayProtocol};
use crate::mmse::{AmplitudeDomain, Multiplier};
use crate::{Error, Result};
use std::path::Path;

/// How the DS-CDMA `ber` experiment sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerSweep {
    Snr,
    Users,
    Symbols,
}

/// Which destination channel knowledge the MIMO experiment simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKnowledge {
    Known,
    Estimated,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub runs: usize,
    // DS-CDMA
    pub users: Vec<usize>,
    pub relays: usize,
    pub chips: usize,
    pub paths: usize,
    pub snr_db: Vec<f64>,
    pub doppler: Vec<f64>,
    pub protocol: RelayProtocol,
    pub isi: bool,
    pub power_spread_db: f64,
    pub packet_len: usize,
    pub training: usize,
    pub schemes: Vec<String>,
    pub feedback_bits: usize,
    pub feedback_error: Vec<f64>,
    pub alpha: f64,
    pub initial_inverse: f64,
    /// `P̂_h[0]` scale of the channel recursion.
    pub channel_correlation: f64,
    pub lambda: f64,
    pub inner_iterations: usize,
    pub domain: AmplitudeDomain,
    pub batch_iterations: usize,
    pub sweep: BerSweep,
    pub symbol_bin: usize,
    // MIMO
    pub mimo_streams: usize,
    pub mimo_relays: usize,
    pub mimo_antennas: usize,
    pub k_sub: Option<usize>,
    pub removed_relays: usize,
    pub mimo_packet_len: usize,
    pub mimo_training: usize,
    pub mimo_alpha: f64,
    pub smoothing: f64,
    pub mimo_snr_db: Vec<f64>,
    pub mimo_schemes: Vec<String>,
    pub channel_knowledge: ChannelKnowledge,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            runs: 200,
            users: vec![8],
            relays: 2,
            chips: 16,
            paths: 5,
            snr_db: vec![12.0],
            doppler: vec![0.0],
            protocol: RelayProtocol::DecodeForward,
            isi: true,
            power_spread_db: 3.0,
            packet_len: 1500,
            training: 200,
            schemes: ["ncis", "cis", "jpais:1", "jpais:3", "jpais:K"].map(String::from).to_vec(),
            feedback_bits: 4,
            feedback_error: vec![0.0],
            alpha: 0.998,
            initial_inverse: 0.01,
            channel_correlation: 0.01,
            lambda: 0.025,
            inner_iterations: 2,
            domain: AmplitudeDomain::NonNegative,
            batch_iterations: 20,
            sweep: BerSweep::Snr,
            symbol_bin: 50,
            mimo_streams: 2,
            mimo_relays: 4,
            mimo_antennas: 2,
            k_sub: None,
            removed_relays: 1,
            mimo_packet_len: 500,
            mimo_training: 200,
            mimo_alpha: 0.9,
            smoothing: 0.9,
            mimo_snr_db: vec![15.0],
            mimo_schemes: MimoScheme::ALL.iter().map(|s| s.label().to_string()).collect(),
            channel_knowledge: ChannelKnowledge::Both,
        }
    }
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{}` for `{key}`", value.trim())))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_one(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("`{key}` needs at least one value")));
    }
    Ok(items)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        v => Err(Error::Config(format!("invalid boolean `{v}` for `{key}`"))),
    }
}

impl SimConfig {
    /// Parses a configuration on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse_one(key, value)?,
            "runs" => self.runs = parse_one(key, value)?,
            "users" => self.users = parse_list(key, value)?,
            "relays" => self.relays = parse_one(key, value)?,
            "chips" => self.chips = parse_one(key, value)?,
            "paths" => self.paths = parse_one(key, value)?,
            "snr_db" => self.snr_db = parse_list(key, value)?,
            "fdt" => self.doppler = parse_list(key, value)?,
            "protocol" => {
                self.protocol = match value {
                    "df" => RelayProtocol::DecodeForward,
                    "af" => RelayProtocol::AmplifyForward,
                    v => return Err(Error::Config(format!("unknown protocol `{v}`"))),
                }
            }
            "isi" => self.isi = parse_bool(key, value)?,
            "power_spread_db" => self.power_spread_db = parse_one(key, value)?,
            "packet_len" => self.packet_len = parse_one(key, value)?,
            "training" => self.training = parse_one(key, value)?,
            "schemes" => self.schemes = parse_list(key, value)?,
            "feedback_bits" => self.feedback_bits = parse_one(key, value)?,
            "feedback_error" => self.feedback_error = parse_list(key, value)?,
            "alpha" => self.alpha = parse_one(key, value)?,
            "initial_inverse" => self.initial_inverse = parse_one(key, value)?,
            "channel_correlation" => self.channel_correlation = parse_one(key, value)?,
            "lambda" => self.lambda = parse_one(key, value)?,
            "inner_iterations" => self.inner_iterations = parse_one(key, value)?,
            "domain" => {
                self.domain = match value {
                    "nonnegative" => AmplitudeDomain::NonNegative,
                    "real" => AmplitudeDomain::Real,
                    "complex" => AmplitudeDomain::Complex,
                    v => return Err(Error::Config(format!("unknown amplitude domain `{v}`"))),
                }
            }
            "batch_iterations" => self.batch_iterations = parse_one(key, value)?,
            "sweep" => {
                self.sweep = match value {
                    "snr" => BerSweep::Snr,
                    "users" => BerSweep::Users,
                    "symbols" => BerSweep::Symbols,
                    v => return Err(Error::Config(format!("unknown sweep `{v}`"))),
                }
            }
            "symbol_bin" => self.symbol_bin = parse_one(key, value)?,
            "mimo_streams" => self.mimo_streams = parse_one(key, value)?,
            "mimo_relays" => self.mimo_relays = parse_one(key, value)?,
            "mimo_antennas" => self.mimo_antennas = parse_one(key, value)?,
            "k_sub" => self.k_sub = Some(parse_one(key, value)?),
            "removed_relays" => self.removed_relays = parse_one(key, value)?,
            "mimo_packet_len" => self.mimo_packet_len = parse_one(key, value)?,
            "mimo_training" => self.mimo_training = parse_one(key, value)?,
            "mimo_alpha" => self.mimo_alpha = parse_one(key, value)?,
            "smoothing" => self.smoothing = parse_one(key, value)?,
            "mimo_snr_db" => self.mimo_snr_db = parse_list(key, value)?,
            "mimo_schemes" => self.mimo_schemes = parse_list(key, value)?,
            "channel_knowledge" => {
                self.channel_knowledge = match value {
                    "known" => ChannelKnowledge::Known,
                    "estimated" => ChannelKnowledge::Estimated,
                    "both" => ChannelKnowledge::Both,
                    v => return Err(Error::Config(format!("unknown channel knowledge `{v}`"))),
                }
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::param("runs", "must be positive"));
        }
        if self.symbol_bin == 0 {
            return Err(Error::param("symbol_bin", "must be positive"));
        }
        for &k in &self.users {
            for s in &self.schemes {
                let scheme = Scheme::parse(s, k)?;
                if let Scheme::Jpais { group } | Scheme::JpaisMmse { group } = scheme {
                    if group == 0 || group > k {
                        return Err(Error::param("G", format!("group size {group} exceeds K = {k}")));
                    }
                }
            }
        }
        for s in &self.mimo_schemes {
            MimoScheme::parse(s)?;
        }
        self.cdma_params(self.users[0], self.snr_db[0], self.doppler[0], self.feedback_error[0])?
            .validate()?;
        self.mimo_params(self.mimo_snr_db[0])?.validate()
    }

    /// DS-CDMA schemes for `users` users.
    pub fn cdma_schemes(&self, users: usize) -> Result<Vec<Scheme>> {
        self.schemes.iter().map(|s| Scheme::parse(s, users)).collect()
    }

    /// DS-CDMA packet parameters at one operating point.
    pub fn cdma_params(&self, users: usize, snr_db: f64, doppler: f64, feedback_error: f64) -> Result<CdmaParams> {
        let params = CdmaParams {
            network: NetworkConfig {
                users,
                relays: self.relays,
                chips: self.chips,
                paths: self.paths,
                noise_variance: 10f64.powf(-snr_db / 10.0),
                protocol: self.protocol,
                isi: self.isi,
                power_spread_db: self.power_spread_db,
            },
            packet_len: self.packet_len,
            training: self.training,
            doppler,
            feedback_bits: self.feedback_bits,
            feedback_error,
            receiver: RalsConfig {
                alpha: self.alpha,
                initial_inverse: self.initial_inverse,
                channel_initial_correlation: self.channel_correlation,
                inner_iterations: self.inner_iterations,
                domain: self.domain,
                ..RalsConfig::default()
            },
            multiplier: Multiplier::Fixed(self.lambda),
            batch_iterations: self.batch_iterations,
        };
        Ok(params)
    }

    pub fn mimo_schemes(&self) -> Result<Vec<MimoScheme>> {
        self.mimo_schemes.iter().map(|s| MimoScheme::parse(s)).collect()
    }

    /// MIMO packet parameters at one SNR.
    pub fn mimo_params(&self, snr_db: f64) -> Result<MimoParams> {
        Ok(MimoParams {
            network: MimoConfig {
                streams: self.mimo_streams,
                relays: self.mimo_relays,
                antennas: self.mimo_antennas,
                noise_variance: 10f64.powf(-snr_db / 10.0),
            },
            k_sub: self.k_sub.unwrap_or(self.mimo_streams),
            removed_relays: self.removed_relays,
            packet_len: self.mimo_packet_len,
            training: self.mimo_training,
            smoothing: self.smoothing,
            ce_alpha: self.mimo_alpha,
        })
    }
}
