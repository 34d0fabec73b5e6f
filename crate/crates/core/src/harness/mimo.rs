//! Packet simulation of the two-phase DF MIMO relay network with antenna
//! and relay selection.

use crate::coopnet::{MimoConfig, MimoNetwork};
use crate::linalg::{CMat, CVec};
use crate::rng::{complex_gaussian, stream_rng, Stream};
use crate::selection::{
    enumerate_tds, exhaustive_rs, exhaustive_tds, relay_subsets, set_reduction, CandidateSets, DsaState,
    MimoInstance, Objective, SmoothedCosts, TdsPattern,
};
use crate::signal::{bit_errors, random_symbol, slice};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Transmission and selection strategies of the MIMO experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimoScheme {
    /// Direct link only.
    NonCooperative,
    /// Every relay antenna active.
    NoTds,
    IterativeTds,
    ExhaustiveTds,
    IterativeTdsRs,
    ExhaustiveTdsRs,
}

impl MimoScheme {
    pub const ALL: [MimoScheme; 6] = [
        MimoScheme::NonCooperative,
        MimoScheme::NoTds,
        MimoScheme::IterativeTds,
        MimoScheme::ExhaustiveTds,
        MimoScheme::IterativeTdsRs,
        MimoScheme::ExhaustiveTdsRs,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            MimoScheme::NonCooperative => "noncoop",
            MimoScheme::NoTds => "no_tds",
            MimoScheme::IterativeTds => "iter_tds",
            MimoScheme::ExhaustiveTds => "exh_tds",
            MimoScheme::IterativeTdsRs => "iter_tds_rs",
            MimoScheme::ExhaustiveTdsRs => "exh_tds_rs",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.label() == text.trim())
            .ok_or_else(|| Error::Config(format!("unknown MIMO scheme `{}`", text.trim())))
    }

    fn uses_rs(&self) -> bool {
        matches!(self, MimoScheme::IterativeTdsRs | MimoScheme::ExhaustiveTdsRs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MimoParams {
    pub network: MimoConfig,
    /// Active relay antennas `K_sub`.
    pub k_sub: usize,
    /// Relays removed by RS.
    pub removed_relays: usize,
    pub packet_len: usize,
    pub training: usize,
    /// Smoothing factor of the instantaneous MSE estimates.
    pub smoothing: f64,
    /// Forgetting factor of the channel estimators.
    pub ce_alpha: f64,
}

impl MimoParams {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        let n = self.network.relays;
        if n == 0 {
            return Err(Error::param("n_r", "selection needs at least one relay"));
        }
        if self.removed_relays >= n {
            return Err(Error::param("removed_relays", format!("must be below n_r = {n}")));
        }
        let remaining = (n - self.removed_relays) * self.network.streams;
        if self.k_sub == 0 || self.k_sub > remaining {
            return Err(Error::param("K_sub", format!("must lie in 1..={remaining}")));
        }
        if self.packet_len == 0 || self.training > self.packet_len {
            return Err(Error::param("N_tr", "need N_tr <= P and P > 0"));
        }
        if !(0.0..1.0).contains(&self.smoothing) || !(self.ce_alpha > 0.0 && self.ce_alpha <= 1.0) {
            return Err(Error::param("smoothing/alpha", "smoothing in [0,1) and alpha in (0,1]"));
        }
        Ok(())
    }
}

/// Scheme-independent draws of one MIMO packet.
#[derive(Debug, Clone)]
pub struct MimoPacket {
    pub network: MimoNetwork,
    /// Source symbols `[stream][i]`.
    pub symbols: Vec<Vec<Complex64>>,
    /// Relay decisions `[relay][stream][i]`.
    pub relayed: Vec<Vec<Vec<Complex64>>>,
    /// Instantaneous relay squared errors `[relay][i]`.
    pub relay_errors: Vec<Vec<f64>>,
    master: u64,
    run: u64,
}

impl MimoPacket {
    pub fn generate(params: &MimoParams, master: u64, run: u64) -> Result<Self> {
        params.validate()?;
        let cfg = &params.network;
        let network = MimoNetwork::generate(cfg.clone(), &mut stream_rng(master, run, Stream::Channels))?;
        let inst = MimoInstance::from_network(&network);
        let (k, m, p) = (cfg.streams, cfg.antennas, params.packet_len);
        let mut sym_rng = stream_rng(master, run, Stream::Symbols);
        let symbols: Vec<Vec<Complex64>> = (0..k).map(|_| (0..p).map(|_| random_symbol(&mut sym_rng)).collect()).collect();
        let mut noise = stream_rng(master, run, Stream::RelayNoise);
        let mut relayed = vec![vec![vec![Complex64::new(0.0, 0.0); p]; k]; cfg.relays];
        let mut relay_errors = vec![vec![0.0; p]; cfg.relays];
        for j in 0..cfg.relays {
            let h = inst.relay_input_matrix(j);
            let w = inst.relay_filters(j);
            for i in 0..p {
                let b = CVec::from_iterator(k, (0..k).map(|s| symbols[s][i]));
                let mut y = &h * &b;
                for z in y.iter_mut() {
                    *z += complex_gaussian(&mut noise, cfg.noise_variance);
                }
                let z = w.adjoint() * &y;
                let mut err = 0.0;
                for s in 0..k {
                    let d = slice(z[s]);
                    relayed[j][s][i] = d;
                    let reference = if i < params.training { b[s] } else { d };
                    err += (reference - z[s]).norm_sqr();
                }
                relay_errors[j][i] = err;
            }
            debug_assert_eq!(h.nrows(), m);
        }
        Ok(Self {
            network,
            symbols,
            relayed,
            relay_errors,
            master,
            run,
        })
    }
}

/// Recursive estimates of the destination-facing channels.
#[derive(Debug, Clone)]
struct ChannelTracker {
    alpha: f64,
    direct: CMat,
    direct_p: CMat,
    relay: Vec<CMat>,
    relay_p: Vec<Vec<f64>>,
}

impl ChannelTracker {
    fn new(m: usize, k: usize, relays: usize, alpha: f64) -> Self {
        Self {
            alpha,
            direct: CMat::zeros(m, k),
            direct_p: CMat::identity(k, k),
            relay: vec![CMat::zeros(m, k); relays],
            relay_p: vec![vec![1.0; k]; relays],
        }
    }

    /// Multi-output RLS step for `y = H x + n`.
    fn update_direct(&mut self, x: &CVec, y: &CVec) {
        let px = &self.direct_p * x;
        let denom = self.alpha + x.dotc(&px).re;
        let g = px / Complex64::new(denom, 0.0);
        let e = y - &self.direct * x;
        self.direct += &e * g.adjoint();
        let update = &g * (x.adjoint() * &self.direct_p);
        self.direct_p = (&self.direct_p - update) / Complex64::new(self.alpha, 0.0);
        self.direct_p = (&self.direct_p + self.direct_p.adjoint()) * Complex64::new(0.5, 0.0);
    }

    /// Scalar-input RLS step for relay antenna `(j, s)` from pilot `p`.
    fn update_pilot(&mut self, j: usize, s: usize, pilot: Complex64, y: &CVec) {
        let p = self.relay_p[j][s];
        let g = p * pilot.conj() / (self.alpha + p * pilot.norm_sqr());
        let e = y - self.relay[j].column(s) * pilot;
        let mut col = self.relay[j].column_mut(s);
        col.axpy(Complex64::new(g.re, g.im), &e, Complex64::new(1.0, 0.0));
        self.relay_p[j][s] = (p - (g * pilot).re * p) / self.alpha;
    }

    fn instance(&self, truth: &MimoInstance) -> MimoInstance {
        MimoInstance {
            direct: self.direct.clone(),
            source_relay: truth.source_relay.clone(),
            relay_destination: self.relay.clone(),
            noise_variance: truth.noise_variance,
        }
    }
}

/// Outcome of one MIMO scheme on one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoRun {
    pub scheme: MimoScheme,
    pub channel_estimation: bool,
    /// Bit errors of all streams at each symbol.
    pub per_symbol_errors: Vec<u32>,
    /// Index into the full pattern set used at each symbol (`None` when not selecting).
    pub patterns: Vec<Option<usize>>,
    /// Removed relay set (index into the RS candidates) at each symbol.
    pub removed: Vec<Option<usize>>,
}

/// Selection state shared by the iterative and exhaustive searches.
struct Selection {
    rs: Option<DsaState>,
    relay_costs: SmoothedCosts,
    tds: DsaState,
    /// Indices into the full pattern set still allowed after RS.
    reduced: Vec<usize>,
    tds_costs: SmoothedCosts,
}

impl Selection {
    fn relay_cost(&self, set: &[usize]) -> f64 {
        set.iter().map(|&j| self.relay_costs.get(j).unwrap_or(0.0)).sum()
    }

    fn reduce(&mut self, sets: &CandidateSets, removed: &[usize], start: usize) -> Result<()> {
        self.reduced = reduced_indices(sets, removed);
        self.tds = DsaState::new(self.reduced.len(), start, Objective::Minimize)?;
        Ok(())
    }

    /// One DSA iteration of RS (if enabled) followed by one of TDS.
    fn iterative_step(
        &mut self,
        sets: &CandidateSets,
        relay_sets: &[Vec<usize>],
        draws: &mut impl Rng,
        mut sample: impl FnMut(&TdsPattern) -> f64,
    ) -> Result<()> {
        if let Some(mut rs) = self.rs.take() {
            let before = rs.current;
            let c = draws.random_range(0..relay_sets.len());
            rs.step(c, |idx| self.relay_cost(&relay_sets[idx]));
            if rs.current != before {
                self.reduce(sets, &relay_sets[rs.current], 0)?;
            }
            self.rs = Some(rs);
        }
        let c = draws.random_range(0..self.reduced.len());
        let mut evaluated: Vec<(usize, f64)> = Vec::with_capacity(2);
        let (reduced, costs) = (&self.reduced, &mut self.tds_costs);
        self.tds.step(c, |idx| {
            if let Some(&(_, v)) = evaluated.iter().find(|(i, _)| *i == idx) {
                return v;
            }
            let v = costs.update(reduced[idx], sample(&sets.patterns[reduced[idx]]));
            evaluated.push((idx, v));
            v
        });
        Ok(())
    }

    /// Evaluates every candidate and keeps the best.
    fn exhaustive_step(
        &mut self,
        sets: &CandidateSets,
        relay_sets: &[Vec<usize>],
        mut sample: impl FnMut(&TdsPattern) -> f64,
    ) -> Result<()> {
        if let Some(mut rs) = self.rs.take() {
            let worst = exhaustive_rs(relay_sets, |s| self.relay_cost(s))?;
            if worst != rs.current {
                rs = DsaState::new(relay_sets.len(), worst, Objective::Maximize)?;
                self.reduce(sets, &relay_sets[worst], 0)?;
            }
            self.rs = Some(rs);
        }
        let patterns: Vec<TdsPattern> = self.reduced.iter().map(|&c| sets.patterns[c].clone()).collect();
        let costs = &mut self.tds_costs;
        let reduced = &self.reduced;
        let mut pos = 0;
        let best = exhaustive_tds(&patterns, |t| {
            let v = costs.update(reduced[pos], sample(t));
            pos += 1;
            v
        })?;
        self.tds = DsaState::new(self.reduced.len(), best, Objective::Minimize)?;
        Ok(())
    }
}

fn reduced_indices(sets: &CandidateSets, removed: &[usize]) -> Vec<usize> {
    let kept = set_reduction(&sets.patterns, removed, sets.streams);
    sets.patterns
        .iter()
        .enumerate()
        .filter(|(_, p)| kept.contains(p))
        .map(|(i, _)| i)
        .collect()
}

fn mmse_filters(h: &CMat, noise_variance: f64) -> CMat {
    MimoInstance::mmse_filters(h, noise_variance)
}

/// Runs `scheme` over one packet with known or estimated destination channels.
pub fn run_mimo_scheme(
    params: &MimoParams,
    packet: &MimoPacket,
    scheme: MimoScheme,
    channel_estimation: bool,
) -> Result<MimoRun> {
    let cfg = &params.network;
    let (k, m, p) = (cfg.streams, cfg.antennas, params.packet_len);
    let truth = MimoInstance::from_network(&packet.network);
    let sets = enumerate_tds(cfg.relays, k, params.k_sub)?;
    let relay_sets = relay_subsets(cfg.relays, params.removed_relays)?;
    let all_active = TdsPattern::all(cfg.relays * k);

    let mut noise = stream_rng(packet.master, packet.run, Stream::DestinationNoise);
    let mut pilots = stream_rng(packet.master, packet.run, Stream::Pilots);
    let mut draws = stream_rng(packet.master, packet.run, Stream::Selection);
    let mut tracker = ChannelTracker::new(m, k, cfg.relays, params.ce_alpha);

    let full: Vec<usize> = (0..sets.patterns.len()).collect();
    let rs_state = scheme
        .uses_rs()
        .then(|| DsaState::new(relay_sets.len(), 0, Objective::Maximize))
        .transpose()?;
    let reduced = match &rs_state {
        Some(state) => reduced_indices(&sets, &relay_sets[state.current]),
        None => full.clone(),
    };
    let mut sel = Selection {
        rs: rs_state,
        relay_costs: SmoothedCosts::new(cfg.relays, params.smoothing),
        tds: DsaState::new(reduced.len(), 0, Objective::Minimize)?,
        reduced,
        tds_costs: SmoothedCosts::new(sets.patterns.len(), params.smoothing),
    };
    let selecting = !matches!(scheme, MimoScheme::NonCooperative | MimoScheme::NoTds);
    let exhaustive = matches!(scheme, MimoScheme::ExhaustiveTds | MimoScheme::ExhaustiveTdsRs);

    let mut out = MimoRun {
        scheme,
        channel_estimation,
        per_symbol_errors: vec![0; p],
        patterns: vec![None; p],
        removed: vec![None; p],
    };
    for i in 0..p {
        let knowledge = if channel_estimation { tracker.instance(&truth) } else { truth.clone() };
        // Pattern in force for this symbol.
        let (pattern_index, removed_index) = if selecting {
            (Some(sel.reduced[sel.tds.current]), sel.rs.as_ref().map(|s| s.current))
        } else {
            (None, None)
        };
        out.patterns[i] = pattern_index;
        out.removed[i] = removed_index;
        let pattern = pattern_index.map_or(&all_active, |c| &sets.patterns[c]);

        // Observation.
        let b = CVec::from_iterator(k, (0..k).map(|s| packet.symbols[s][i]));
        let mut r1 = truth.direct_matrix() * &b;
        let g = MimoInstance::relay_amplitude(pattern);
        let mut r2 = CVec::zeros(m);
        for (j, h) in truth.relay_destination.iter().enumerate() {
            for s in 0..k {
                if pattern.is_active(j * k + s) {
                    r2.axpy(Complex64::new(g, 0.0) * packet.relayed[j][s][i], &h.column(s), Complex64::new(1.0, 0.0));
                }
            }
        }
        for z in r1.iter_mut().chain(r2.iter_mut()) {
            *z += complex_gaussian(&mut noise, cfg.noise_variance);
        }
        let cooperative = scheme != MimoScheme::NonCooperative;
        let (h_eff, r) = if cooperative {
            let mut r = CVec::zeros(2 * m);
            r.rows_mut(0, m).copy_from(&r1);
            r.rows_mut(m, m).copy_from(&r2);
            (knowledge.effective_matrix(pattern), r)
        } else {
            (knowledge.direct_matrix(), r1.clone())
        };
        let w = mmse_filters(&h_eff, cfg.noise_variance);
        let z = w.adjoint() * &r;
        let decisions: Vec<Complex64> = z.iter().map(|&v| slice(v)).collect();
        out.per_symbol_errors[i] = (0..k).map(|s| bit_errors(b[s], decisions[s])).sum();
        let reference: Vec<Complex64> = if i < params.training { b.iter().copied().collect() } else { decisions };
        let ref_vec = CVec::from_column_slice(&reference);

        // Channel estimation.
        if channel_estimation {
            let x = &ref_vec * Complex64::new(truth.source_amplitude(), 0.0);
            tracker.update_direct(&x, &r1);
            for j in 0..cfg.relays {
                for s in 0..k {
                    let pilot = random_symbol(&mut pilots);
                    let mut y = truth.relay_destination[j].column(s) * pilot;
                    for v in y.iter_mut() {
                        *v += complex_gaussian(&mut pilots, cfg.noise_variance);
                    }
                    tracker.update_pilot(j, s, pilot, &y);
                }
            }
        }

        // Selection for the next symbol; costs need known symbols, so the
        // choice is held once training ends.
        if selecting && i < params.training {
            for j in 0..cfg.relays {
                sel.relay_costs.update(j, packet.relay_errors[j][i]);
            }
            let residual = &r2 - knowledge.relay_phase_matrix(pattern) * &ref_vec;
            let sample = |t: &TdsPattern| -> f64 {
                let h = knowledge.effective_matrix(t);
                let mut rt = CVec::zeros(2 * m);
                rt.rows_mut(0, m).copy_from(&r1);
                rt.rows_mut(m, m).copy_from(&(knowledge.relay_phase_matrix(t) * &ref_vec + &residual));
                let zt = mmse_filters(&h, cfg.noise_variance).adjoint() * rt;
                (0..k).map(|s| (ref_vec[s] - zt[s]).norm_sqr()).sum()
            };
            if exhaustive {
                sel.exhaustive_step(&sets, &relay_sets, sample)?;
            } else {
                sel.iterative_step(&sets, &relay_sets, &mut draws, sample)?;
            }
        }
    }
    Ok(out)
}

/// Runs every scheme, with and without channel estimation as requested.
pub fn run_mimo_packet(
    params: &MimoParams,
    schemes: &[(MimoScheme, bool)],
    master: u64,
    run: u64,
) -> Result<Vec<MimoRun>> {
    let packet = MimoPacket::generate(params, master, run)?;
    schemes
        .iter()
        .map(|&(s, ce)| run_mimo_scheme(params, &packet, s, ce))
        .collect()
}
