use crate::linalg::{CMat, CVec, ONE, ZERO};
use crate::mmse::{enforce_domain, normalize_power, AmplitudeDomain, ConstraintBlock};
use crate::{Error, Result};
use num_complex::Complex64;

/// One power-recursion input: user `k`'s regressor `v_k` (masked to the
/// coordinates of its constraint block), its reference symbol and that block.
#[derive(Debug, Clone, Copy)]
pub struct PowerUpdate<'a> {
    pub regressor: &'a CVec,
    pub target: Complex64,
    pub block: &'a ConstraintBlock,
}

/// Least-squares recursion over the stacked amplitudes of all users.
///
/// The model is `z_k = v_k^H a`; for real amplitudes each complex sample is
/// split into two real equations. Forgetting is applied once per symbol.
#[derive(Debug, Clone)]
pub struct PowerRlsState {
    pub inverse: CMat,
    /// Stacked amplitudes, `links` entries per user.
    pub amplitudes: CVec,
    pub alpha: f64,
    pub links: usize,
    pub domain: AmplitudeDomain,
    gains: Vec<CVec>,
    /// Largest `|a_S^H a_S - budget|` seen after any normalization.
    pub max_violation: f64,
}

impl PowerRlsState {
    pub fn new(initial: &[CVec], initial_inverse: f64, alpha: f64, domain: AmplitudeDomain) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param("alpha", "forgetting factor must lie in (0, 1]"));
        }
        let links = initial.first().map_or(0, |a| a.len());
        let dim = links * initial.len();
        let mut amplitudes = CVec::zeros(dim);
        for (k, a) in initial.iter().enumerate() {
            amplitudes.rows_mut(k * links, links).copy_from(a);
        }
        Ok(Self {
            inverse: CMat::identity(dim, dim) * Complex64::new(initial_inverse, 0.0),
            amplitudes,
            alpha,
            links,
            domain,
            gains: Vec::new(),
            max_violation: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn user(&self, k: usize) -> CVec {
        self.amplitudes.rows(k * self.links, self.links).into_owned()
    }

    pub fn users(&self) -> Vec<CVec> {
        (0..self.dim() / self.links.max(1)).map(|k| self.user(k)).collect()
    }

    pub fn set_users(&mut self, amps: &[CVec]) {
        for (k, a) in amps.iter().enumerate() {
            self.amplitudes.rows_mut(k * self.links, self.links).copy_from(a);
        }
    }

    /// Applies the forgetting factor for a new symbol and forgets stored gains.
    pub fn begin_symbol(&mut self) {
        self.inverse /= Complex64::new(self.alpha, 0.0);
        self.gains.clear();
    }

    fn equations(&self, u: &CVec, target: Complex64) -> Vec<(CVec, Complex64)> {
        if self.domain.is_real() {
            vec![
                (u.map(|z| Complex64::new(z.re, 0.0)), Complex64::new(target.re, 0.0)),
                (u.map(|z| Complex64::new(-z.im, 0.0)), Complex64::new(target.im, 0.0)),
            ]
        } else {
            vec![(u.clone(), target)]
        }
    }

    fn apply(&mut self, gain: &CVec, x: &CVec, target: Complex64) {
        let z = x.dotc(&self.amplitudes);
        let mut e = target - z;
        if self.domain.is_real() {
            e.im = 0.0;
        }
        self.amplitudes.axpy(e, gain, ONE);
    }

    /// Gain computation, covariance update and amplitude correction, followed
    /// by renormalization of the block.
    pub fn update(&mut self, step: PowerUpdate<'_>) {
        for (x, t) in self.equations(step.regressor, step.target) {
            let mut pi = CVec::zeros(self.dim());
            pi.gemv(ONE, &self.inverse, &x, ZERO);
            let denom = 1.0 + x.dotc(&pi).re;
            let gain = &pi / Complex64::new(denom, 0.0);
            self.inverse.gerc(Complex64::new(-1.0, 0.0), &gain, &pi, ONE);
            self.apply(&gain, &x, t);
            self.gains.push(gain);
        }
        self.enforce(step.block);
    }

    /// Correction with the `index`-th gain stored this symbol and a freshly
    /// computed a-priori error.
    pub fn reuse(&mut self, index: usize, step: PowerUpdate<'_>) {
        let per = if self.domain.is_real() { 2 } else { 1 };
        for (part, (x, t)) in self.equations(step.regressor, step.target).into_iter().enumerate() {
            if let Some(gain) = self.gains.get(index * per + part).cloned() {
                self.apply(&gain, &x, t);
            }
        }
        self.enforce(step.block);
    }

    /// Projects a block onto the amplitude domain and its power constraint.
    pub fn enforce(&mut self, block: &ConstraintBlock) {
        let n = self.links;
        let mut a = CVec::zeros(block.users.len() * n);
        for (bi, &k) in block.users.iter().enumerate() {
            a.rows_mut(bi * n, n).copy_from(&self.amplitudes.rows(k * n, n));
        }
        enforce_domain(&mut a, self.domain);
        normalize_power(&mut a, block.budget);
        let e: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        self.max_violation = self.max_violation.max((e - block.budget).abs());
        for (bi, &k) in block.users.iter().enumerate() {
            self.amplitudes.rows_mut(k * n, n).copy_from(&a.rows(bi * n, n));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_error_keeps_amplitudes_up_to_normalization() {
        let init = vec![CVec::from_vec(vec![c(0.6), c(0.8)])];
        let mut s = PowerRlsState::new(&init, 0.01, 0.998, AmplitudeDomain::Real).unwrap();
        let block = ConstraintBlock { users: vec![0], budget: 1.0 };
        // Regressor chosen so that v^H a equals the target exactly.
        let v = CVec::from_vec(vec![c(1.0), c(0.5)]);
        let target = v.dotc(&s.amplitudes);
        s.begin_symbol();
        s.update(PowerUpdate { regressor: &v, target, block: &block });
        assert!((s.user(0) - &init[0]).norm() < 1e-14);
    }

    #[test]
    fn constraint_holds_after_updates() {
        let init = vec![CVec::from_element(3, c(0.5)), CVec::from_element(3, c(0.5))];
        let mut s = PowerRlsState::new(&init, 0.01, 0.998, AmplitudeDomain::NonNegative).unwrap();
        let block = ConstraintBlock { users: vec![0, 1], budget: 2.7 };
        for i in 0..50 {
            s.begin_symbol();
            let v = CVec::from_fn(6, |j, _| Complex64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (j as f64).sin()));
            s.update(PowerUpdate { regressor: &v, target: Complex64::new(0.7, -0.7), block: &block });
            let e: f64 = s.amplitudes.iter().map(|z| z.norm_sqr()).sum();
            assert!((e - 2.7).abs() < 1e-10);
            assert!(s.amplitudes.iter().all(|z| z.re >= 0.0 && z.im == 0.0));
        }
        assert!(s.max_violation < 1e-10);
    }
}
