use crate::linalg::{CMat, CVec, HermitianFactor};
use crate::{Error, Result};
use num_complex::Complex64;

/// Linear receive filter `w` with output `w^H r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveFilter {
    pub w: CVec,
    /// Diagonal loading applied to `R`, if it was needed.
    pub loading: Option<f64>,
}

impl ReceiveFilter {
    pub fn output(&self, r: &CVec) -> Complex64 {
        self.w.dotc(r)
    }
}

/// RAKE output `p̂_k^H r`.
pub fn rake_statistic(r: &CVec, signature: &CVec) -> Complex64 {
    signature.dotc(r)
}

/// Indices (ascending) of the `g` largest magnitudes; ties go to the lower index.
pub fn select_group(magnitudes: &[f64], g: usize) -> Result<Vec<usize>> {
    if g == 0 || g > magnitudes.len() {
        return Err(Error::param(
            "G",
            format!("group size {g} must lie in 1..={}", magnitudes.len()),
        ));
    }
    let mut order: Vec<usize> = (0..magnitudes.len()).collect();
    // Stable sort keeps lower indices first among equal magnitudes.
    order.sort_by(|&a, &b| magnitudes[b].total_cmp(&magnitudes[a]));
    let mut chosen = order[..g].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Factorization of a received covariance `R`, shared by the filter and the
/// channel estimator.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    factor: HermitianFactor,
}

impl CovarianceFactor {
    pub fn new(r: &CMat) -> Self {
        Self {
            factor: HermitianFactor::new(r),
        }
    }

    pub fn loading(&self) -> Option<f64> {
        self.factor.loading
    }

    /// `w = R^{-1} p`.
    pub fn filter(&self, cross: &CVec) -> ReceiveFilter {
        ReceiveFilter {
            w: self.factor.solve(cross),
            loading: self.factor.loading,
        }
    }

    /// `ĥ = P_h^H Q^H R^{-1} r`.
    pub fn channel_estimate(&self, r: &CVec, q: &CMat, prior: &CMat) -> CVec {
        let y = self.factor.solve(r);
        prior.adjoint() * (q.adjoint() * y)
    }
}

/// `w = R^{-1} p` with diagonal loading on near-singular `R`.
pub fn mmse_filter(r: &CMat, cross: &CVec) -> Result<ReceiveFilter> {
    if r.nrows() != r.ncols() || r.nrows() != cross.len() {
        return Err(Error::shape("covariance and cross-correlation sizes differ"));
    }
    Ok(CovarianceFactor::new(r).filter(cross))
}

/// Linear MMSE estimate of user `k`'s stacked channel.
///
/// The covariance is `R = Σ_m Q_m P_{h_m} Q_m^H + P_η + σ² I` built from all
/// users' composite matrices `q[m]` and channel priors `priors[m]`.
pub fn mmse_channel_estimate(
    r: &CVec,
    q: &[CMat],
    priors: &[CMat],
    k: usize,
    isi_covariance: Option<&CMat>,
    noise_variance: f64,
) -> Result<CVec> {
    if q.len() != priors.len() || k >= q.len() {
        return Err(Error::shape("one composite matrix and prior per user is required"));
    }
    let j = r.len();
    let mut cov = CMat::identity(j, j) * Complex64::new(noise_variance, 0.0);
    for (qm, pm) in q.iter().zip(priors) {
        if qm.nrows() != j || qm.ncols() != pm.nrows() {
            return Err(Error::shape("composite matrix does not match the observation or prior"));
        }
        cov += qm * pm * qm.adjoint();
    }
    if let Some(p) = isi_covariance {
        cov += p;
    }
    Ok(CovarianceFactor::new(&cov).channel_estimate(r, &q[k], &priors[k]))
}
