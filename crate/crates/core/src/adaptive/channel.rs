use crate::linalg::{add_outer, norm_sqr, CMat, CVec};
use num_complex::Complex64;

/// Channel recursion of one user.
///
/// The correlation estimate is `P̂_h[i] = α P̂_h[i-1] + ĥ[i-1] ĥ[i-1]^H` and the
/// estimate is `ĥ[i] = P̂_h^H[i] Q^H[i] R̂^{-1}[i] r[i]`.
#[derive(Debug, Clone)]
pub struct ChannelRlsState {
    pub correlation: CMat,
    pub estimate: CVec,
    pub alpha: f64,
    /// When set, each link's sub-vector of this length is rescaled to unit
    /// norm after every update.
    pub link_normalization: Option<usize>,
}

impl ChannelRlsState {
    /// `P̂_h[0] = I` and the given starting estimate.
    pub fn new(initial: CVec, alpha: f64, link_normalization: Option<usize>) -> Self {
        Self::with_correlation(initial, 1.0, alpha, link_normalization)
    }

    /// `P̂_h[0] = c I` and the given starting estimate.
    pub fn with_correlation(initial: CVec, c: f64, alpha: f64, link_normalization: Option<usize>) -> Self {
        let q = initial.len();
        Self {
            correlation: CMat::identity(q, q) * Complex64::new(c, 0.0),
            estimate: initial,
            alpha,
            link_normalization,
        }
    }

    /// Recursion step given the precomputed `Q^H R̂^{-1} r`.
    pub fn update_with_projection(&mut self, projection: &CVec) -> &CVec {
        self.correlation *= Complex64::new(self.alpha, 0.0);
        add_outer(&mut self.correlation, &self.estimate, 1.0);
        self.estimate = self.correlation.adjoint() * projection;
        if let Some(len) = self.link_normalization {
            normalize_links(&mut self.estimate, len);
        }
        &self.estimate
    }
}

/// Rescales every consecutive `len`-entry block to unit norm (zero blocks are left alone).
pub fn normalize_links(h: &mut CVec, len: usize) {
    let links = h.len() / len;
    for j in 0..links {
        let mut block = h.rows_mut(j * len, len);
        let e: f64 = block.iter().map(|z| z.norm_sqr()).sum();
        if e > 0.0 {
            block /= Complex64::new(e.sqrt(), 0.0);
        }
    }
}

/// Channel recursion step with explicit `Q` and `R̂^{-1}`.
pub fn rals_channel_update<'a>(state: &'a mut ChannelRlsState, q: &CMat, inverse: &CMat, r: &CVec) -> &'a CVec {
    let projection = q.adjoint() * (inverse * r);
    state.update_with_projection(&projection)
}

/// Angle in degrees between two vectors, insensitive to a common complex phase.
pub fn subspace_angle_deg(a: &CVec, b: &CVec) -> f64 {
    let c = a.dotc(b).norm() / (norm_sqr(a) * norm_sqr(b)).sqrt();
    c.min(1.0).acos().to_degrees()
}
