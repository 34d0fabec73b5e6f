use crate::linalg::{add_outer, CMat, CVec, ONE, ZERO};
use crate::rng::complex_gaussian;
use crate::signal::{isi_head, isi_tail};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Waveform of one user on one link, as seen in an `M`-sample window.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkWaveforms {
    /// Current-symbol contribution (`C h`, or a channel column in MIMO mode).
    pub main: CVec,
    /// Spill-over of the previous symbol.
    pub tail: CVec,
    /// Spill-over of the next symbol.
    pub head: CVec,
}

impl LinkWaveforms {
    /// Waveform with inter-symbol spill-over for spreading gain `n`.
    pub fn with_isi(main: CVec, n: usize) -> Self {
        let tail = isi_tail(&main, n);
        let head = isi_head(&main, n);
        Self { main, tail, head }
    }

    /// Waveform without spill-over.
    pub fn flat(main: CVec) -> Self {
        let m = main.len();
        Self {
            main,
            tail: CVec::zeros(m),
            head: CVec::zeros(m),
        }
    }

    pub fn len(&self) -> usize {
        self.main.len()
    }

    pub fn is_empty(&self) -> bool {
        self.main.is_empty()
    }
}

/// Symbols at indices `i-1`, `i`, `i+1` on one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolTriplet {
    pub prev: Complex64,
    pub cur: Complex64,
    pub next: Complex64,
}

impl SymbolTriplet {
    pub fn isolated(cur: Complex64) -> Self {
        Self { prev: ZERO, cur, next: ZERO }
    }
}

/// Noiseless observation of one hop: `Σ_k a_k (s_k b_k[i] + η_k)`.
pub fn hop_signal(waves: &[&LinkWaveforms], amps: &[Complex64], symbols: &[SymbolTriplet], isi: bool) -> Result<CVec> {
    if waves.len() != amps.len() || waves.len() != symbols.len() {
        return Err(Error::shape(format!(
            "hop with {} waveforms, {} amplitudes and {} symbols",
            waves.len(),
            amps.len(),
            symbols.len()
        )));
    }
    let m = waves.first().map_or(0, |w| w.len());
    let mut out = CVec::zeros(m);
    for ((w, &a), s) in waves.iter().zip(amps).zip(symbols) {
        if w.len() != m {
            return Err(Error::shape("waveforms of one hop differ in length"));
        }
        if a == ZERO {
            continue;
        }
        out.axpy(a * s.cur, &w.main, ONE);
        if isi {
            out.axpy(a * s.prev, &w.tail, ONE);
            out.axpy(a * s.next, &w.head, ONE);
        }
    }
    Ok(out)
}

/// Adds `CN(0, σ²)` noise to every sample.
pub fn add_noise<R: Rng + ?Sized>(v: &mut CVec, noise_variance: f64, rng: &mut R) {
    for z in v.iter_mut() {
        *z += complex_gaussian(rng, noise_variance);
    }
}

/// Noisy observation of one hop.
pub fn transmit_phase<R: Rng + ?Sized>(
    waves: &[&LinkWaveforms],
    amps: &[Complex64],
    symbols: &[SymbolTriplet],
    isi: bool,
    noise_variance: f64,
    rng: &mut R,
) -> Result<CVec> {
    let mut r = hop_signal(waves, amps, symbols, isi)?;
    add_noise(&mut r, noise_variance, rng);
    Ok(r)
}

/// `E[r r^H]` of a hop for independent unit-energy symbols.
pub fn hop_covariance(waves: &[&LinkWaveforms], amps: &[Complex64], isi: bool, noise_variance: f64) -> CMat {
    let m = waves.first().map_or(0, |w| w.len());
    let mut r = CMat::identity(m, m) * Complex64::new(noise_variance, 0.0);
    for (w, a) in waves.iter().zip(amps) {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        add_outer(&mut r, &w.main, p);
        if isi {
            add_outer(&mut r, &w.tail, p);
            add_outer(&mut r, &w.head, p);
        }
    }
    r
}

/// Stacks per-phase blocks into the destination vector.
pub fn assemble_received(blocks: &[CVec], expected_blocks: usize) -> Result<CVec> {
    if blocks.len() != expected_blocks {
        return Err(Error::shape(format!(
            "expected {expected_blocks} phase observations, got {}",
            blocks.len()
        )));
    }
    let m = blocks.first().map_or(0, |b| b.len());
    if blocks.iter().any(|b| b.len() != m) {
        return Err(Error::shape("phase observations differ in length"));
    }
    let mut r = CVec::zeros(m * blocks.len());
    for (j, b) in blocks.iter().enumerate() {
        r.rows_mut(j * m, m).copy_from(b);
    }
    Ok(r)
}

/// Matrix `P_k` whose column `j` holds link `j`'s waveform in block `j`.
pub fn signature_stack(links: &[LinkWaveforms]) -> CMat {
    let m = links.first().map_or(0, |w| w.len());
    let n = links.len();
    let mut p = CMat::zeros(n * m, n);
    for (j, w) in links.iter().enumerate() {
        p.view_mut((j * m, j), (m, 1)).copy_from(&w.main);
    }
    p
}

/// Amplitude-weighted effective signature `P_k a_k`.
pub fn effective_signature(links: &[LinkWaveforms], amps: &CVec) -> CVec {
    let m = links.first().map_or(0, |w| w.len());
    let mut p = CVec::zeros(m * links.len());
    for (j, w) in links.iter().enumerate() {
        let mut block = p.rows_mut(j * m, m);
        block.axpy(amps[j], &w.main, ZERO);
    }
    p
}
