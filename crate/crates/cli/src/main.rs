//! `coopsim` command line: runs one experiment and writes its CSV.

use clap::{Args, Parser, Subcommand};
use coopsim::harness::{
    complexity_count, format_sig, run_ber_experiment, run_fading_sweep, run_feedback_error_sweep,
    run_mimo_tds_experiment, selection_complexity, BerCurve, CdmaExperiment, ComplexityScheme, Dimensions, SimConfig,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "coopsim", version, about = "Cooperative relay network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo packets per point; overrides the configuration.
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Number of relays, 1 to 10. `complexity` also takes a range `a..b`.
    #[arg(long, global = true, value_parser = parse_relays)]
    nr: Option<RelayRange>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output CSV path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// DS-CDMA BER against SNR, users or symbol index.
    Ber,
    /// DS-CDMA BER against normalized Doppler.
    Fading,
    /// DS-CDMA BER against feedback bit error probability.
    Feedback,
    /// MIMO relay network with transmit diversity and relay selection.
    MimoTds,
    /// Per-symbol operation counts.
    Complexity,
}

#[derive(Clone, Copy, Debug)]
struct RelayRange {
    first: u64,
    last: u64,
}

fn parse_relays(s: &str) -> Result<RelayRange, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("`{t}`: {e}"));
    let (first, last) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => (num(s)?, num(s)?),
    };
    if !(1..=10).contains(&first) || !(1..=10).contains(&last) || first > last {
        return Err(format!("`{s}` is not within 1..10"));
    }
    Ok(RelayRange { first, last })
}

/// Failures split by exit code: configuration problems give 2, runtime 1.
enum Failure {
    Config(String),
    Run(String),
}

impl From<coopsim::Error> for Failure {
    fn from(e: coopsim::Error) -> Self {
        match e {
            coopsim::Error::Config(_) | coopsim::Error::InvalidParameter { .. } => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn load_config(common: &Common, mimo: bool) -> Result<SimConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            if !path.exists() {
                return Err(Failure::Config(format!("config file {} does not exist", path.display())));
            }
            SimConfig::from_file(path)?
        }
        None => SimConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = common.runs {
        cfg.runs = runs;
    }
    if let Some(range) = common.nr {
        let nr = range.first;
        if mimo {
            cfg.mimo_relays = nr as usize;
        } else {
            cfg.relays = nr as usize;
        }
    }
    for o in &common.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("override `{o}` is not `key=value`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, csv: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, csv).map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn summarize(curve: &BerCurve) {
    for p in &curve.points {
        let cols: Vec<String> = curve
            .labels
            .iter()
            .zip(&p.stats)
            .map(|(l, s)| format!("{l}={}", format_sig(s.ber())))
            .collect();
        eprintln!("  {}={}: {}", curve.variable.label(), format_sig(p.x), cols.join(" "));
    }
}

fn cdma_summary(name: &str, cfg: &SimConfig, exp: &CdmaExperiment, started: Instant) {
    eprintln!(
        "{name}: K={:?} n_r={} runs={} seed={} ({:.1} s)",
        cfg.users,
        cfg.relays,
        cfg.runs,
        cfg.seed,
        started.elapsed().as_secs_f64()
    );
    summarize(&exp.curve);
    eprintln!("  max power-constraint violation {:.3e}", exp.max_constraint_violation);
}

/// One row per relay count: additions and multiplications per scheme, then
/// the selection counts of the MIMO network with that many relays.
fn complexity_csv(cfg: &SimConfig, relays: RelayRange) -> Result<String, Failure> {
    const SELECTION: [&str; 4] = ["exhaustive_tds", "exhaustive_tds_rs", "iterative_tds", "iterative_tds_rs"];
    let mut csv = String::from("nr");
    for scheme in ComplexityScheme::ALL {
        let _ = write!(csv, ",{0}_additions,{0}_multiplications", scheme.label());
    }
    for name in SELECTION {
        let _ = write!(csv, ",{name}_multiplications");
    }
    csv.push('\n');
    for nr in relays.first..=relays.last {
        let d = Dimensions::cdma(cfg.users[0] as u64, nr, cfg.chips as u64, cfg.paths as u64);
        let _ = write!(csv, "{nr}");
        for scheme in ComplexityScheme::ALL {
            let r = complexity_count(scheme, &d)?;
            let _ = write!(csv, ",{},{}", r.total.additions, r.total.multiplications);
        }
        let s = selection_complexity(
            nr,
            cfg.mimo_streams as u64,
            cfg.k_sub.unwrap_or(cfg.mimo_streams) as u64,
            cfg.removed_relays as u64,
            cfg.mimo_antennas as u64,
        );
        for v in [s.exhaustive_tds, s.exhaustive_tds_rs, s.iterative_tds, s.iterative_tds_rs] {
            let _ = write!(csv, ",{}", format_sig(v));
        }
        csv.push('\n');
    }
    Ok(csv)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let started = Instant::now();
    let mimo = matches!(cli.command, Command::MimoTds);
    if let Some(r) = cli.common.nr.filter(|r| r.first != r.last && !matches!(cli.command, Command::Complexity)) {
        return Err(Failure::Config(format!("--nr {}..{} is only accepted by `complexity`", r.first, r.last)));
    }
    let cfg = load_config(&cli.common, mimo)?;
    let out = cli.common.out.as_deref();
    match cli.command {
        Command::Ber => {
            let exp = run_ber_experiment(&cfg)?;
            cdma_summary("ber", &cfg, &exp, started);
            emit(out, &exp.curve.to_csv())
        }
        Command::Fading => {
            let exp = run_fading_sweep(&cfg)?;
            cdma_summary("fading", &cfg, &exp, started);
            emit(out, &exp.curve.to_csv())
        }
        Command::Feedback => {
            let exp = run_feedback_error_sweep(&cfg)?;
            cdma_summary("feedback", &cfg, &exp, started);
            emit(out, &exp.curve.to_csv())
        }
        Command::MimoTds => {
            let exp = run_mimo_tds_experiment(&cfg)?;
            eprintln!(
                "mimo-tds: n_r={} K={} M={} runs={} seed={} ({:.1} s)",
                cfg.mimo_relays,
                cfg.mimo_streams,
                cfg.mimo_antennas,
                cfg.runs,
                cfg.seed,
                started.elapsed().as_secs_f64()
            );
            summarize(&exp.snr);
            if let Some(agree) = &exp.agreement {
                let last = agree.last().copied().unwrap_or(0.0);
                eprintln!("  iterative/exhaustive pattern agreement at the last symbol {}", format_sig(last));
            }
            let mut csv = exp.convergence.to_csv();
            if let Some(path) = out {
                let snr_path = path.with_extension("snr.csv");
                emit(Some(&snr_path), &exp.snr.to_csv())?;
            } else {
                csv.push('\n');
                csv.push_str(&exp.snr.to_csv());
            }
            emit(out, &csv)
        }
        Command::Complexity => {
            let relays = cli.common.nr.unwrap_or(RelayRange {
                first: cfg.relays as u64,
                last: cfg.relays as u64,
            });
            let csv = complexity_csv(&cfg, relays)?;
            eprintln!(
                "complexity: K={} n_r={}..{} N={} L={}",
                cfg.users[0], relays.first, relays.last, cfg.chips, cfg.paths
            );
            emit(out, &csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
