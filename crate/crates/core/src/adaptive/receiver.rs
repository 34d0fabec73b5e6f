use super::channel::{normalize_links, ChannelRlsState};
use super::power::{PowerRlsState, PowerUpdate};
use super::rals_filter_update;
use super::rls::{rls_cov_update, RlsCovarianceState};
use crate::linalg::{CMat, CVec, HermitianFactor};
use crate::mmse::{constraint_blocks, select_group, AmplitudeDomain, ConstraintBlock};
use crate::signal::{slice, SignatureMatrix};
use crate::{Error, Result};
use num_complex::Complex64;

/// Whether transmit amplitudes are adapted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    /// Amplitudes stay at their initial values.
    Frozen,
    /// Amplitudes follow the power recursion until [`RalsReceiver::freeze_power`].
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RalsConfig {
    /// Forgetting factor of the filter, channel and power recursions.
    pub alpha: f64,
    /// `R̂^{-1}[0] = initial_inverse · I`.
    pub initial_inverse: f64,
    /// Initial inverse covariance of the power recursion.
    pub power_initial_inverse: f64,
    /// Group size `G`.
    pub group_size: usize,
    /// Power/filter alternations per symbol while the power recursion runs.
    pub inner_iterations: usize,
    /// `P̂_h[0] = channel_initial_correlation · I`.
    pub channel_initial_correlation: f64,
    /// Training symbols used for the least-squares channel bootstrap.
    pub bootstrap_symbols: usize,
    pub power: PowerMode,
    pub domain: AmplitudeDomain,
    /// Rescale each link's channel estimate to unit norm.
    pub normalize_channel_links: bool,
}

impl Default for RalsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.998,
            initial_inverse: 0.01,
            power_initial_inverse: 0.01,
            group_size: 1,
            inner_iterations: 2,
            channel_initial_correlation: 0.01,
            bootstrap_symbols: 10,
            power: PowerMode::Adaptive,
            domain: AmplitudeDomain::NonNegative,
            normalize_channel_links: true,
        }
    }
}

impl RalsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", "forgetting factor must lie in (0, 1]"));
        }
        if !(self.initial_inverse > 0.0 && self.power_initial_inverse > 0.0) {
            return Err(Error::param("delta", "initial inverse covariances must be positive"));
        }
        if !(self.channel_initial_correlation > 0.0) {
            return Err(Error::param("channel_correlation", "must be positive"));
        }
        if !(1..=2).contains(&self.inner_iterations) {
            return Err(Error::param("iterations", "inner iterations must be 1 or 2"));
        }
        Ok(())
    }
}

/// Reference used for the a-priori errors of one symbol.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    Training(&'a [Complex64]),
    DecisionDirected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    /// Filter outputs `w_k^H r` before this symbol's updates.
    pub outputs: Vec<Complex64>,
    pub decisions: Vec<Complex64>,
    /// `Σ_k |d_k - z_k|²` against the reference used.
    pub squared_error: f64,
}

/// Adaptive destination receiver for the DS-CDMA network.
#[derive(Debug, Clone)]
pub struct RalsReceiver {
    cfg: RalsConfig,
    signatures: Vec<SignatureMatrix>,
    user_powers: Vec<f64>,
    links: usize,
    window: usize,
    cov: RlsCovarianceState,
    filters: Vec<CVec>,
    channels: Vec<ChannelRlsState>,
    power: PowerRlsState,
    power_frozen: bool,
    bootstrap: Vec<(CVec, Vec<Complex64>, Vec<CVec>)>,
    group: Vec<usize>,
    symbols_seen: usize,
}

impl RalsReceiver {
    /// Receiver for `links` destination-facing links starting from `initial` amplitudes.
    pub fn new(
        cfg: RalsConfig,
        signatures: Vec<SignatureMatrix>,
        user_powers: Vec<f64>,
        initial: &[CVec],
    ) -> Result<Self> {
        let users = signatures.len();
        if users == 0 || user_powers.len() != users || initial.len() != users {
            return Err(Error::shape("one signature, power and amplitude vector per user is required"));
        }
        if cfg.group_size == 0 || cfg.group_size > users {
            return Err(Error::param("G", format!("group size must lie in 1..={users}")));
        }
        cfg.validate()?;
        let links = initial[0].len();
        let window = signatures[0].rows();
        let cov = RlsCovarianceState::new(links * window, cfg.initial_inverse, cfg.alpha)?;
        let power = PowerRlsState::new(initial, cfg.power_initial_inverse, cfg.alpha, cfg.domain)?;
        let group = (0..cfg.group_size).collect();
        Ok(Self {
            filters: vec![CVec::zeros(links * window); users],
            channels: Vec::new(),
            power_frozen: cfg.power == PowerMode::Frozen,
            bootstrap: Vec::new(),
            cfg,
            signatures,
            user_powers,
            links,
            window,
            cov,
            power,
            group,
            symbols_seen: 0,
        })
    }

    pub fn users(&self) -> usize {
        self.signatures.len()
    }

    pub fn filters(&self) -> &[CVec] {
        &self.filters
    }

    /// Amplitudes the receiver believes are being transmitted.
    pub fn amplitudes(&self) -> Vec<CVec> {
        self.power.users()
    }

    /// Overrides the amplitudes (e.g. with the values fed back to the sources).
    pub fn set_amplitudes(&mut self, amps: &[CVec]) {
        self.power.set_users(amps);
    }

    /// Stops the power recursion; filters and channels keep adapting.
    pub fn freeze_power(&mut self) {
        self.power_frozen = true;
    }

    pub fn power_active(&self) -> bool {
        !self.power_frozen
    }

    /// Stacked channel estimates, once the bootstrap has completed.
    pub fn channel_estimates(&self) -> Option<Vec<CVec>> {
        (!self.channels.is_empty()).then(|| self.channels.iter().map(|c| c.estimate.clone()).collect())
    }

    pub fn group(&self) -> &[usize] {
        &self.group
    }

    /// Largest power-constraint violation after any normalization so far.
    pub fn max_constraint_violation(&self) -> f64 {
        self.power.max_violation
    }

    pub fn covariance_state(&self) -> &RlsCovarianceState {
        &self.cov
    }

    pub fn symbols_seen(&self) -> usize {
        self.symbols_seen
    }

    fn paths(&self) -> usize {
        self.signatures[0].paths()
    }

    /// Estimated link waveforms `C_k ĥ_{k,j}`, indexed `[user][link]`.
    fn estimated_waveforms(&self) -> Vec<Vec<CVec>> {
        let l = self.paths();
        self.channels
            .iter()
            .enumerate()
            .map(|(k, ch)| {
                (0..self.links)
                    .map(|j| {
                        let h: Vec<Complex64> = ch.estimate.rows(j * l, l).iter().copied().collect();
                        self.signatures[k].apply(&h)
                    })
                    .collect()
            })
            .collect()
    }

    fn block_dot(&self, x: &CVec, j: usize, y: &CVec) -> Complex64 {
        // x^H (block j of y)
        let m = self.window;
        x.iter().zip(y.rows(j * m, m).iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Joint least squares of all users' channels over the bootstrap symbols.
    fn bootstrap_channels(&mut self) {
        let (k_users, l, m, n) = (self.users(), self.paths(), self.window, self.links);
        let dim = k_users * l;
        let mut estimates = vec![CVec::zeros(n * l); k_users];
        for j in 0..n {
            let mut normal = CMat::zeros(dim, dim);
            let mut rhs = CVec::zeros(dim);
            for (r, d, amps) in &self.bootstrap {
                let mut a = CMat::zeros(m, dim);
                for k in 0..k_users {
                    let coef = d[k] * amps[k][j];
                    let c = self.signatures[k].matrix();
                    a.view_mut((0, k * l), (m, l)).copy_from(&(c * coef));
                }
                normal += a.adjoint() * &a;
                rhs += a.adjoint() * r.rows(j * m, m);
            }
            let x = HermitianFactor::new(&normal).solve(&rhs);
            for k in 0..k_users {
                estimates[k].rows_mut(j * l, l).copy_from(&x.rows(k * l, l));
            }
        }
        let norm = self.cfg.normalize_channel_links.then_some(l);
        if let Some(len) = norm {
            estimates.iter_mut().for_each(|h| normalize_links(h, len));
        }
        self.channels = estimates
            .into_iter()
            .map(|h| ChannelRlsState::with_correlation(h, self.cfg.channel_initial_correlation, self.cfg.alpha, norm))
            .collect();
        self.bootstrap.clear();
    }

    /// Processes one received vector.
    pub fn step(&mut self, r: &CVec, reference: Reference<'_>) -> Result<StepOutput> {
        let users = self.users();
        if r.len() != self.links * self.window {
            return Err(Error::shape(format!(
                "received vector has {} samples, expected {}",
                r.len(),
                self.links * self.window
            )));
        }
        let outputs: Vec<Complex64> = self.filters.iter().map(|w| w.dotc(r)).collect();
        let decisions: Vec<Complex64> = outputs.iter().map(|&z| slice(z)).collect();
        let refs: Vec<Complex64> = match reference {
            Reference::Training(b) => {
                if b.len() != users {
                    return Err(Error::shape("one training symbol per user is required"));
                }
                b.to_vec()
            }
            Reference::DecisionDirected => decisions.clone(),
        };
        let squared_error = refs.iter().zip(&outputs).map(|(d, z)| (d - z).norm_sqr()).sum();
        let amps = self.power.users();

        let gain = rls_cov_update(&mut self.cov, r).clone();
        let ready = !self.channels.is_empty();
        if ready {
            // Group selection from the RAKE outputs of the previous estimates.
            let waves = self.estimated_waveforms();
            let rake: Vec<f64> = (0..users)
                .map(|k| {
                    (0..self.links)
                        .map(|j| amps[k][j].conj() * self.block_dot(&waves[k][j], j, r))
                        .sum::<Complex64>()
                        .norm()
                })
                .collect();
            self.group = select_group(&rake, self.cfg.group_size)?;
            // Channel recursion.
            let l = self.paths();
            for k in 0..users {
                let mut proj = CVec::zeros(self.links * l);
                for j in 0..self.links {
                    let m = self.window;
                    let block: Vec<Complex64> = gain.rows(j * m, m).iter().copied().collect();
                    let c = self.signatures[k].apply_adjoint(&block);
                    let coef = (refs[k] * amps[k][j]).conj();
                    for (t, v) in c.into_iter().enumerate() {
                        proj[j * l + t] = coef * v;
                    }
                }
                self.channels[k].update_with_projection(&proj);
            }
        } else if matches!(reference, Reference::Training(_)) && self.cfg.bootstrap_symbols > 0 {
            self.bootstrap.push((r.clone(), refs.clone(), amps));
            if self.bootstrap.len() >= self.cfg.bootstrap_symbols {
                self.bootstrap_channels();
            }
        }

        let power_active = !self.power_frozen && ready;
        let iterations = if power_active { self.cfg.inner_iterations } else { 1 };
        let blocks = constraint_blocks(&self.group, &self.user_powers);
        if power_active {
            self.power.begin_symbol();
        }
        let waves = if power_active { self.estimated_waveforms() } else { Vec::new() };
        for it in 0..iterations {
            if power_active {
                for k in 0..users {
                    let block = block_of(&blocks, k);
                    let u = self.regressor(k, block, &waves, &refs);
                    let step = PowerUpdate {
                        regressor: &u,
                        target: refs[k],
                        block,
                    };
                    if it == 0 {
                        self.power.update(step);
                    } else {
                        self.power.reuse(k, step);
                    }
                }
            }
            for k in 0..users {
                let xi = refs[k] - self.filters[k].dotc(r);
                rals_filter_update(&mut self.filters[k], &gain, xi);
            }
        }
        self.symbols_seen += 1;
        Ok(StepOutput {
            outputs,
            decisions,
            squared_error,
        })
    }

    /// `v_k` restricted to the coordinates of `block`:
    /// entry `(m, j)` is `b_m^* (C_m ĥ_{m,j})^H w_{k,j}`.
    fn regressor(&self, k: usize, block: &ConstraintBlock, waves: &[Vec<CVec>], refs: &[Complex64]) -> CVec {
        let n = self.links;
        let mut u = CVec::zeros(self.users() * n);
        for &m in &block.users {
            for j in 0..n {
                let g = self.block_dot(&waves[m][j], j, &self.filters[k]);
                u[m * n + j] = refs[m].conj() * g;
            }
        }
        u
    }
}

fn block_of(blocks: &[ConstraintBlock], k: usize) -> &ConstraintBlock {
    blocks
        .iter()
        .find(|b| b.users.contains(&k))
        .expect("every user belongs to one constraint block")
}
