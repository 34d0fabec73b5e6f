use crate::linalg::{hermitian_defect, hermitize, CMat, CVec, ZERO};
use crate::{Error, Result};
use num_complex::Complex64;

/// Exponentially weighted inverse covariance `R̂^{-1}` and its latest gain.
#[derive(Debug, Clone)]
pub struct RlsCovarianceState {
    pub inverse: CMat,
    pub alpha: f64,
    /// Gain `k` of the last update, equal to `R̂^{-1}[i] r[i]`.
    pub gain: CVec,
    /// Largest Hermitian defect seen before symmetrization.
    pub max_drift: f64,
}

impl RlsCovarianceState {
    /// `R̂^{-1}[0] = initial · I`.
    pub fn new(dim: usize, initial: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param("alpha", "forgetting factor must lie in (0, 1]"));
        }
        if !(initial > 0.0) {
            return Err(Error::param("delta", "initial inverse covariance must be positive"));
        }
        Ok(Self {
            inverse: CMat::identity(dim, dim) * Complex64::new(initial, 0.0),
            alpha,
            gain: CVec::zeros(dim),
            max_drift: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.inverse.nrows()
    }
}

/// Matrix-inversion-lemma update with observation `r`; returns the gain.
pub fn rls_cov_update<'a>(state: &'a mut RlsCovarianceState, r: &CVec) -> &'a CVec {
    let n = state.dim();
    let mut pi = CVec::zeros(n);
    pi.gemv(Complex64::new(1.0, 0.0), &state.inverse, r, ZERO);
    let denom = state.alpha + r.dotc(&pi).re;
    state.gain = &pi / Complex64::new(denom, 0.0);
    let inv_alpha = 1.0 / state.alpha;
    // R̂⁻¹ ← (R̂⁻¹ - k π^H) / α, using r^H R̂⁻¹ = π^H.
    state
        .inverse
        .gerc(Complex64::new(-inv_alpha, 0.0), &state.gain, &pi, Complex64::new(inv_alpha, 0.0));
    if n <= 16 {
        state.max_drift = state.max_drift.max(hermitian_defect(&state.inverse));
    }
    hermitize(&mut state.inverse);
    &state.gain
}
