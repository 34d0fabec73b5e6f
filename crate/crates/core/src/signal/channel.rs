use crate::rng::complex_gaussian;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Decay of the mean power-delay profile per path (in nepers).
const PROFILE_DECAY: f64 = 0.5;

/// One multipath link: `L` complex gains with unit total power and the
/// power-delay profile they were drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub gains: Vec<Complex64>,
    /// Per-path variances summing to one.
    pub profile: Vec<f64>,
}

/// Draws an `L`-path channel.
///
/// The profile decays exponentially with a random perturbation of each path;
/// gains are complex Gaussian with those variances and the realization is
/// scaled to unit total power.
pub fn gen_channel<R: Rng + ?Sized>(paths: usize, rng: &mut R) -> Result<ChannelRealization> {
    if paths == 0 {
        return Err(Error::param("L", "at least one path is required"));
    }
    let mut profile: Vec<f64> = (0..paths)
        .map(|l| (-PROFILE_DECAY * l as f64).exp() * rng.random_range(0.5..1.5))
        .collect();
    let total: f64 = profile.iter().sum();
    profile.iter_mut().for_each(|p| *p /= total);
    let mut gains: Vec<Complex64> = profile.iter().map(|&p| complex_gaussian(rng, p)).collect();
    let energy: f64 = gains.iter().map(|g| g.norm_sqr()).sum();
    let scale = 1.0 / energy.sqrt();
    gains.iter_mut().for_each(|g| *g *= scale);
    Ok(ChannelRealization { gains, profile })
}

/// First-order autoregressive time variation whose lag-one correlation
/// `J0(2π f_d T)` matches the Clarke spectrum.
///
/// Each path evolves independently as `h ← ρ h + sqrt(1 - ρ²) u` with
/// `u ~ CN(0, p_l)`, so the expected power per path stays at `p_l`.
#[derive(Debug, Clone)]
pub struct FadingProcess {
    rho: f64,
    profile: Vec<f64>,
}

impl FadingProcess {
    pub fn new(profile: Vec<f64>, normalized_doppler: f64) -> Result<Self> {
        if !(normalized_doppler >= 0.0) || !normalized_doppler.is_finite() {
            return Err(Error::param("f_dT", "normalized Doppler must be finite and non-negative"));
        }
        Ok(Self {
            rho: bessel_j0(2.0 * PI * normalized_doppler),
            profile,
        })
    }

    /// Correlation between gains `lag` symbols apart.
    pub fn autocorrelation(&self, lag: usize) -> f64 {
        self.rho.powi(lag as i32)
    }

    pub fn is_static(&self) -> bool {
        self.rho == 1.0
    }

    /// Advances `h` by `steps` symbol periods.
    pub fn advance<R: Rng + ?Sized>(&self, h: &mut [Complex64], steps: usize, rng: &mut R) -> Result<()> {
        if h.len() != self.profile.len() {
            return Err(Error::shape(format!(
                "channel has {} paths but the fading profile has {}",
                h.len(),
                self.profile.len()
            )));
        }
        if self.is_static() || steps == 0 {
            return Ok(());
        }
        let r = self.autocorrelation(steps);
        let innov = (1.0 - r * r).max(0.0).sqrt();
        for (g, &p) in h.iter_mut().zip(&self.profile) {
            *g = *g * r + complex_gaussian(rng, p) * innov;
        }
        Ok(())
    }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 8.0 {
        let q = -(x * x) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..60 {
            term *= q / ((m * m) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else {
        // Leading terms of the Hankel asymptotic expansion.
        let z = 8.0 / x;
        let y = z * z;
        let p = 1.0 - y * (1.098628627e-3 - y * (2.734510407e-5 - y * (2.073370639e-6 - y * 2.093887211e-7)));
        let q = -1.562499995e-2 + y * (1.430488765e-4 - y * (6.911147651e-6 - y * (7.621095161e-7 - y * 9.34935152e-8)));
        let xx = x - 0.785398164;
        (0.636619772 / x).sqrt() * (xx.cos() * p - z * xx.sin() * q)
    }
}
