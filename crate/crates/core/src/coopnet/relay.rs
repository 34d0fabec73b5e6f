use super::cdma::RelayProtocol;
use crate::linalg::{quad_form, solve_hermitian, CMat, CVec};
use crate::signal::slice;
use num_complex::Complex64;

/// Receive processing of one relay, designed from known link statistics.
#[derive(Debug, Clone)]
pub struct RelayFilters {
    /// Per-user MMSE filters `w_{j,k}`.
    pub filters: Vec<CVec>,
    /// AF per-user gain normalizing `E|w^H r|²` to one.
    pub symbol_gains: Vec<f64>,
    /// AF block gain `1 / sqrt(E‖r‖²)`.
    pub block_gain: f64,
}

impl RelayFilters {
    /// MMSE design from the relay covariance `R` and per-user cross-correlations `p_k`.
    pub fn design(covariance: &CMat, cross: &[CVec]) -> Self {
        let filters: Vec<CVec> = cross.iter().map(|p| solve_hermitian(covariance, p).x).collect();
        let symbol_gains = filters
            .iter()
            .map(|w| {
                let e = quad_form(covariance, w);
                if e > 0.0 {
                    1.0 / e.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let power: f64 = covariance.diagonal().iter().map(|z| z.re).sum();
        Self {
            filters,
            symbol_gains,
            block_gain: if power > 0.0 { 1.0 / power.sqrt() } else { 0.0 },
        }
    }
}

/// What a relay forwards for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayDecision {
    /// Per-user symbols re-spread in the second phase: constellation points
    /// for DF, normalized soft estimates for AF.
    pub symbols: Vec<Complex64>,
    /// Power-normalized received block (AF only, `g r`).
    pub block: Option<CVec>,
}

/// Relay processing of one received block.
pub fn relay_process(protocol: RelayProtocol, observation: &CVec, filters: &RelayFilters) -> RelayDecision {
    let soft = filters.filters.iter().map(|w| w.dotc(observation));
    match protocol {
        RelayProtocol::DecodeForward => RelayDecision {
            symbols: soft.map(slice).collect(),
            block: None,
        },
        RelayProtocol::AmplifyForward => RelayDecision {
            symbols: soft.zip(&filters.symbol_gains).map(|(z, g)| z * *g).collect(),
            block: Some(observation * Complex64::new(filters.block_gain, 0.0)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coopnet::hop::{hop_covariance, hop_signal, LinkWaveforms, SymbolTriplet};
    use crate::signal::symbol_from_index;

    fn orthogonal_pair() -> (LinkWaveforms, LinkWaveforms) {
        let a = CVec::from_vec(vec![Complex64::new(0.5, 0.0); 4]);
        let b = CVec::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5, 0.0),
        ]);
        (LinkWaveforms::flat(a), LinkWaveforms::flat(b))
    }

    #[test]
    fn df_recovers_orthogonal_users() {
        let (w1, w2) = orthogonal_pair();
        let amps = [Complex64::new(1.0, 0.0); 2];
        let cov = hop_covariance(&[&w1, &w2], &amps, false, 1e-6);
        let filters = RelayFilters::design(&cov, &[w1.main.clone(), w2.main.clone()]);
        for i in 0..4u8 {
            for j in 0..4u8 {
                let b = [symbol_from_index(i), symbol_from_index(j)];
                let s = [SymbolTriplet::isolated(b[0]), SymbolTriplet::isolated(b[1])];
                let r = hop_signal(&[&w1, &w2], &amps, &s, false).unwrap();
                let d = relay_process(RelayProtocol::DecodeForward, &r, &filters);
                assert_eq!(d.symbols, b.to_vec());
            }
        }
    }

    #[test]
    fn af_is_linear_and_silent_on_zero_input() {
        let (w1, w2) = orthogonal_pair();
        let amps = [Complex64::new(1.0, 0.0); 2];
        let cov = hop_covariance(&[&w1, &w2], &amps, false, 0.1);
        let filters = RelayFilters::design(&cov, &[w1.main.clone(), w2.main.clone()]);
        let zero = relay_process(RelayProtocol::AmplifyForward, &CVec::zeros(4), &filters);
        assert!(zero.symbols.iter().all(|z| z.norm() == 0.0));
        assert_eq!(zero.block.unwrap().norm(), 0.0);
        let x = CVec::from_fn(4, |i, _| Complex64::new(i as f64, 1.0));
        let y = CVec::from_fn(4, |i, _| Complex64::new(-0.5, i as f64));
        let fx = relay_process(RelayProtocol::AmplifyForward, &x, &filters);
        let fy = relay_process(RelayProtocol::AmplifyForward, &y, &filters);
        let fxy = relay_process(RelayProtocol::AmplifyForward, &(&x + &y), &filters);
        for k in 0..2 {
            assert!((fxy.symbols[k] - fx.symbols[k] - fy.symbols[k]).norm() < 1e-12);
        }
        let bsum = fx.block.unwrap() + fy.block.unwrap();
        assert!((fxy.block.unwrap() - bsum).norm() < 1e-12);
    }
}
