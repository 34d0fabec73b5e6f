//! Recursive alternating least-squares (RALS) adaptation.
//!
//! One inverse-covariance recursion is shared by all receive filters; each
//! user additionally runs a channel recursion, and the transmit amplitudes of
//! all users are adapted by one masked least-squares recursion whose
//! constraint blocks follow the current group.

mod channel;
mod power;
mod receiver;
mod rls;

pub use channel::{normalize_links, rals_channel_update, subspace_angle_deg, ChannelRlsState};
pub use power::{PowerRlsState, PowerUpdate};
pub use receiver::{PowerMode, RalsConfig, RalsReceiver, Reference, StepOutput};
pub use rls::{rls_cov_update, RlsCovarianceState};

use crate::linalg::CVec;
use num_complex::Complex64;

/// `w ← w + k ξ*` for the a-priori error `ξ = d - w^H r`.
pub fn rals_filter_update(w: &mut CVec, gain: &CVec, error: Complex64) {
    w.axpy(error.conj(), gain, Complex64::new(1.0, 0.0));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_update_from_zero_and_zero_error() {
        let k = CVec::from_vec(vec![Complex64::new(0.5, 0.1), Complex64::new(-0.2, 0.3)]);
        let b = Complex64::new(0.7, -0.7);
        let mut w = CVec::zeros(2);
        rals_filter_update(&mut w, &k, b);
        assert!((w.clone() - &k * b.conj()).norm() < 1e-15);
        let before = w.clone();
        rals_filter_update(&mut w, &k, Complex64::new(0.0, 0.0));
        assert_eq!(w, before);
    }
}
