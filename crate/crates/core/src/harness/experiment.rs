//! Monte-Carlo drivers that turn packet runs into BER curves.

use super::cdma::{run_packet, CdmaParams, Scheme, SchemeRun};
use super::config::{BerSweep, ChannelKnowledge, SimConfig};
use super::curve::{BerCurve, BerPoint, SchemeStats, SweepVariable};
use super::mimo::{run_mimo_packet, MimoParams, MimoRun, MimoScheme};
use crate::Result;

/// Evaluates `f(run)` for `run in 0..runs`, spread over the available cores.
/// Results come back in run order, so output does not depend on the thread count.
pub fn map_runs<T, F>(runs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(runs.max(1));
    if threads <= 1 {
        return (0..runs as u64).map(&f).collect();
    }
    let chunk = runs.div_ceil(threads);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let lo = t * chunk;
                let hi = ((t + 1) * chunk).min(runs);
                s.spawn(move || (lo as u64..hi as u64).map(f).collect::<Result<Vec<T>>>())
            })
            .collect();
        let mut out = Vec::with_capacity(runs);
        for h in handles {
            out.extend(h.join().expect("simulation thread panicked")?);
        }
        Ok(out)
    })
}

/// All scheme runs at one DS-CDMA operating point.
#[derive(Debug, Clone)]
pub struct CdmaPoint {
    pub schemes: Vec<Scheme>,
    /// `runs[r][s]` is scheme `s` on packet `r`.
    pub runs: Vec<Vec<SchemeRun>>,
}

impl CdmaPoint {
    pub fn simulate(params: &CdmaParams, schemes: &[Scheme], runs: usize, master: u64) -> Result<Self> {
        params.validate()?;
        let runs = map_runs(runs, |r| run_packet(params, schemes, master, r))?;
        Ok(Self {
            schemes: schemes.to_vec(),
            runs,
        })
    }

    pub fn labels(&self) -> Vec<String> {
        self.schemes.iter().map(Scheme::label).collect()
    }

    /// Data-symbol error counts per scheme.
    pub fn data_stats(&self) -> Vec<SchemeStats> {
        let mut stats = vec![SchemeStats::default(); self.schemes.len()];
        for packet in &self.runs {
            for (s, run) in stats.iter_mut().zip(packet) {
                s.push(run.data_errors, run.data_bits);
            }
        }
        stats
    }

    /// BER against symbol index, averaged over bins of `bin` symbols.
    pub fn convergence(&self, bin: usize, users: usize) -> BerCurve {
        let per_symbol: Vec<Vec<Vec<u32>>> = self
            .runs
            .iter()
            .map(|p| p.iter().map(|r| r.per_symbol_errors.clone()).collect())
            .collect();
        binned_curve(self.labels(), &per_symbol, bin, 2 * users as u64)
    }

    /// Largest constraint violation over every run and scheme.
    pub fn max_constraint_violation(&self) -> f64 {
        self.runs
            .iter()
            .flatten()
            .map(|r| r.max_constraint_violation)
            .fold(0.0, f64::max)
    }
}

fn binned_curve(labels: Vec<String>, per_symbol: &[Vec<Vec<u32>>], bin: usize, bits_per_symbol: u64) -> BerCurve {
    let mut curve = BerCurve::new(SweepVariable::Symbols, labels);
    let len = per_symbol.first().and_then(|p| p.first()).map_or(0, Vec::len);
    for start in (0..len).step_by(bin.max(1)) {
        let end = (start + bin).min(len);
        let mut stats = vec![SchemeStats::default(); curve.labels.len()];
        for packet in per_symbol {
            for (s, errors) in stats.iter_mut().zip(packet) {
                let e: u64 = errors[start..end].iter().map(|&x| u64::from(x)).sum();
                s.push(e, bits_per_symbol * (end - start) as u64);
            }
        }
        curve.points.push(BerPoint {
            x: (start + 1) as f64,
            stats,
        });
    }
    curve
}

/// Column labels of the configured schemes; `jpais:K` becomes `jpais_gK` so
/// that a user sweep keeps one column per scheme.
pub fn scheme_columns(cfg: &SimConfig) -> Vec<String> {
    cfg.schemes.iter().map(|s| s.trim().replace(':', "_g")).collect()
}

fn cdma_sweep<I>(cfg: &SimConfig, variable: SweepVariable, points: I) -> Result<(BerCurve, f64)>
where
    I: IntoIterator<Item = (f64, usize, CdmaParams)>,
{
    let mut curve: Option<BerCurve> = None;
    let mut violation: f64 = 0.0;
    for (x, users, params) in points {
        let schemes = cfg.cdma_schemes(users)?;
        let point = CdmaPoint::simulate(&params, &schemes, cfg.runs, cfg.seed)?;
        violation = violation.max(point.max_constraint_violation());
        let c = curve.get_or_insert_with(|| BerCurve::new(variable, scheme_columns(cfg)));
        c.points.push(BerPoint {
            x,
            stats: point.data_stats(),
        });
    }
    Ok((curve.unwrap_or_else(|| BerCurve::new(variable, scheme_columns(cfg))), violation))
}

/// Result of a DS-CDMA experiment.
#[derive(Debug, Clone)]
pub struct CdmaExperiment {
    pub curve: BerCurve,
    pub max_constraint_violation: f64,
}

/// BER against SNR, number of users or symbol index, as `cfg.sweep` selects.
/// Columns are labelled with the scheme strings of the configuration.
pub fn run_ber_experiment(cfg: &SimConfig) -> Result<CdmaExperiment> {
    cfg.validate()?;
    let (pe, fdt) = (cfg.feedback_error[0], cfg.doppler[0]);
    let (curve, violation) = match cfg.sweep {
        BerSweep::Snr => {
            let k = cfg.users[0];
            let pts = cfg
                .snr_db
                .iter()
                .map(|&snr| Ok((snr, k, cfg.cdma_params(k, snr, fdt, pe)?)))
                .collect::<Result<Vec<_>>>()?;
            cdma_sweep(cfg, SweepVariable::SnrDb, pts)?
        }
        BerSweep::Users => {
            let snr = cfg.snr_db[0];
            let pts = cfg
                .users
                .iter()
                .map(|&k| Ok((k as f64, k, cfg.cdma_params(k, snr, fdt, pe)?)))
                .collect::<Result<Vec<_>>>()?;
            cdma_sweep(cfg, SweepVariable::Users, pts)?
        }
        BerSweep::Symbols => {
            let k = cfg.users[0];
            let params = cfg.cdma_params(k, cfg.snr_db[0], fdt, pe)?;
            let point = CdmaPoint::simulate(&params, &cfg.cdma_schemes(k)?, cfg.runs, cfg.seed)?;
            let mut curve = point.convergence(cfg.symbol_bin, k);
            curve.labels = scheme_columns(cfg);
            (curve, point.max_constraint_violation())
        }
    };
    Ok(CdmaExperiment {
        curve,
        max_constraint_violation: violation,
    })
}

/// BER against normalized Doppler `f_d T` at the first SNR and user count.
pub fn run_fading_sweep(cfg: &SimConfig) -> Result<CdmaExperiment> {
    cfg.validate()?;
    let k = cfg.users[0];
    let pts = cfg
        .doppler
        .iter()
        .map(|&fdt| Ok((fdt, k, cfg.cdma_params(k, cfg.snr_db[0], fdt, cfg.feedback_error[0])?)))
        .collect::<Result<Vec<_>>>()?;
    let (curve, max_constraint_violation) = cdma_sweep(cfg, SweepVariable::Doppler, pts)?;
    Ok(CdmaExperiment {
        curve,
        max_constraint_violation,
    })
}

/// BER against feedback bit error probability at the first SNR and user count.
pub fn run_feedback_error_sweep(cfg: &SimConfig) -> Result<CdmaExperiment> {
    cfg.validate()?;
    let k = cfg.users[0];
    let pts = cfg
        .feedback_error
        .iter()
        .map(|&pe| Ok((pe, k, cfg.cdma_params(k, cfg.snr_db[0], cfg.doppler[0], pe)?)))
        .collect::<Result<Vec<_>>>()?;
    let (curve, max_constraint_violation) = cdma_sweep(cfg, SweepVariable::FeedbackError, pts)?;
    Ok(CdmaExperiment {
        curve,
        max_constraint_violation,
    })
}

/// All MIMO runs at one SNR.
#[derive(Debug, Clone)]
pub struct MimoPoint {
    pub variants: Vec<(MimoScheme, bool)>,
    /// `runs[r][v]` is variant `v` on packet `r`.
    pub runs: Vec<Vec<MimoRun>>,
}

/// Column label of a MIMO variant; `_ce` marks estimated channels.
pub fn mimo_label(scheme: MimoScheme, estimated: bool) -> String {
    if estimated {
        format!("{}_ce", scheme.label())
    } else {
        scheme.label().to_string()
    }
}

impl MimoPoint {
    pub fn simulate(params: &MimoParams, variants: &[(MimoScheme, bool)], runs: usize, master: u64) -> Result<Self> {
        params.validate()?;
        let runs = map_runs(runs, |r| run_mimo_packet(params, variants, master, r))?;
        Ok(Self {
            variants: variants.to_vec(),
            runs,
        })
    }

    pub fn labels(&self) -> Vec<String> {
        self.variants.iter().map(|&(s, ce)| mimo_label(s, ce)).collect()
    }

    pub fn convergence(&self, bin: usize, streams: usize) -> BerCurve {
        let per_symbol: Vec<Vec<Vec<u32>>> = self
            .runs
            .iter()
            .map(|p| p.iter().map(|r| r.per_symbol_errors.clone()).collect())
            .collect();
        binned_curve(self.labels(), &per_symbol, bin, 2 * streams as u64)
    }

    /// Error counts over symbols `from..` per variant.
    pub fn stats_from(&self, from: usize, streams: usize) -> Vec<SchemeStats> {
        let mut stats = vec![SchemeStats::default(); self.variants.len()];
        for packet in &self.runs {
            for (s, run) in stats.iter_mut().zip(packet) {
                let tail = &run.per_symbol_errors[from.min(run.per_symbol_errors.len())..];
                let e: u64 = tail.iter().map(|&x| u64::from(x)).sum();
                s.push(e, 2 * streams as u64 * tail.len() as u64);
            }
        }
        stats
    }

    /// Fraction of packets, per symbol, in which variants `a` and `b` use the
    /// same transmit pattern.
    pub fn pattern_agreement(&self, a: usize, b: usize) -> Vec<f64> {
        let len = self.runs.first().map_or(0, |p| p[a].patterns.len());
        (0..len)
            .map(|i| {
                let same = self.runs.iter().filter(|p| p[a].patterns[i] == p[b].patterns[i]).count();
                same as f64 / self.runs.len().max(1) as f64
            })
            .collect()
    }
}

/// Result of the MIMO selection experiment.
#[derive(Debug, Clone)]
pub struct MimoExperiment {
    /// BER against symbol index at the first SNR.
    pub convergence: BerCurve,
    /// BER over the data symbols against SNR.
    pub snr: BerCurve,
    /// Per-symbol agreement of the iterative and exhaustive TDS+RS patterns
    /// (known channels) at the first SNR, when both are simulated.
    pub agreement: Option<Vec<f64>>,
}

pub fn mimo_variants(cfg: &SimConfig) -> Result<Vec<(MimoScheme, bool)>> {
    let schemes = cfg.mimo_schemes()?;
    let flags: &[bool] = match cfg.channel_knowledge {
        ChannelKnowledge::Known => &[false],
        ChannelKnowledge::Estimated => &[true],
        ChannelKnowledge::Both => &[false, true],
    };
    Ok(flags
        .iter()
        .flat_map(|&ce| schemes.iter().map(move |&s| (s, ce)))
        .collect())
}

pub fn run_mimo_tds_experiment(cfg: &SimConfig) -> Result<MimoExperiment> {
    cfg.validate()?;
    let variants = mimo_variants(cfg)?;
    let labels: Vec<String> = variants.iter().map(|&(s, ce)| mimo_label(s, ce)).collect();
    let mut snr = BerCurve::new(SweepVariable::SnrDb, labels);
    let mut convergence = None;
    let mut agreement = None;
    for (n, &db) in cfg.mimo_snr_db.iter().enumerate() {
        let params = cfg.mimo_params(db)?;
        let point = MimoPoint::simulate(&params, &variants, cfg.runs, cfg.seed)?;
        snr.points.push(BerPoint {
            x: db,
            stats: point.stats_from(params.training, params.network.streams),
        });
        if n == 0 {
            convergence = Some(point.convergence(cfg.symbol_bin, params.network.streams));
            let find = |s| variants.iter().position(|&v| v == (s, false));
            if let (Some(a), Some(b)) = (find(MimoScheme::IterativeTdsRs), find(MimoScheme::ExhaustiveTdsRs)) {
                agreement = Some(point.pattern_agreement(a, b));
            }
        }
    }
    Ok(MimoExperiment {
        convergence: convergence.expect("at least one SNR is configured"),
        snr,
        agreement,
    })
}
