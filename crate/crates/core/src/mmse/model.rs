use super::filter::{select_group, CovarianceFactor};
use super::power::{enforce_domain, normalize_power, power_allocation, AmplitudeDomain, Multiplier};
use crate::coopnet::{CdmaNetwork, LinkWaveforms};
use crate::linalg::{add_outer, norm_sqr, quad_form, real_part_mat, real_part_vec, CMat, CVec, ZERO};
use crate::{Error, Result};
use num_complex::Complex64;

/// Users sharing one power constraint `Σ_{k∈users} a_k^H a_k = budget`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintBlock {
    pub users: Vec<usize>,
    pub budget: f64,
}

/// The group block (budget `Σ_{k∈S} P_{A,k}`) followed by one individual
/// block per remaining user.
pub fn constraint_blocks(group: &[usize], user_powers: &[f64]) -> Vec<ConstraintBlock> {
    let mut blocks = vec![ConstraintBlock {
        users: group.to_vec(),
        budget: group.iter().map(|&k| user_powers[k]).sum(),
    }];
    for (k, &p) in user_powers.iter().enumerate() {
        if !group.contains(&k) {
            blocks.push(ConstraintBlock {
                users: vec![k],
                budget: p,
            });
        }
    }
    blocks
}

/// Destination model with known second-order statistics: every symbol is
/// independent, unit-energy, and correctly relayed.
#[derive(Debug, Clone)]
pub struct DestinationModel {
    /// Waveforms indexed `[user][link]`.
    pub waves: Vec<Vec<LinkWaveforms>>,
    pub noise_variance: f64,
    pub isi: bool,
    pub user_powers: Vec<f64>,
}

impl DestinationModel {
    pub fn from_network(net: &CdmaNetwork) -> Self {
        Self {
            waves: net.destination_waveforms(),
            noise_variance: net.config.noise_variance,
            isi: net.config.isi,
            user_powers: net.user_powers.clone(),
        }
    }

    pub fn users(&self) -> usize {
        self.waves.len()
    }

    pub fn links(&self) -> usize {
        self.waves[0].len()
    }

    pub fn window(&self) -> usize {
        self.waves[0][0].len()
    }

    pub fn observation_len(&self) -> usize {
        self.links() * self.window()
    }

    /// Equal split of every user's power over its links.
    pub fn equal_amplitudes(&self) -> Vec<CVec> {
        let n = self.links();
        self.user_powers
            .iter()
            .map(|&p| CVec::from_element(n, Complex64::new((p / n as f64).sqrt(), 0.0)))
            .collect()
    }

    fn stacked(&self, k: usize, amps: &CVec, pick: impl Fn(&LinkWaveforms) -> &CVec) -> CVec {
        let m = self.window();
        let mut out = CVec::zeros(self.observation_len());
        for (j, w) in self.waves[k].iter().enumerate() {
            out.rows_mut(j * m, m).axpy(amps[j], pick(w), ZERO);
        }
        out
    }

    /// Effective signature `P_k a_k`, which is also `E[r b_k^*]`.
    pub fn effective(&self, k: usize, amps: &CVec) -> CVec {
        self.stacked(k, amps, |w| &w.main)
    }

    /// `E[r r^H]` for the given amplitudes.
    pub fn covariance(&self, amps: &[CVec]) -> CMat {
        let j = self.observation_len();
        let mut r = CMat::identity(j, j) * Complex64::new(self.noise_variance, 0.0);
        for (k, a) in amps.iter().enumerate() {
            add_outer(&mut r, &self.effective(k, a), 1.0);
            if self.isi {
                add_outer(&mut r, &self.stacked(k, a, |w| &w.tail), 1.0);
                add_outer(&mut r, &self.stacked(k, a, |w| &w.head), 1.0);
            }
        }
        r
    }

    /// MMSE filters of all users for the given amplitudes.
    pub fn filters(&self, amps: &[CVec]) -> Vec<CVec> {
        let f = CovarianceFactor::new(&self.covariance(amps));
        (0..self.users()).map(|k| f.filter(&self.effective(k, &amps[k])).w).collect()
    }

    /// `E|b_k - w^H r|²`.
    pub fn mse(&self, k: usize, w: &CVec, amps: &[CVec]) -> f64 {
        let r = self.covariance(amps);
        1.0 - 2.0 * w.dotc(&self.effective(k, &amps[k])).re + quad_form(&r, w)
    }

    /// Sum of all users' MSEs.
    pub fn sum_mse(&self, filters: &[CVec], amps: &[CVec]) -> f64 {
        let r = self.covariance(amps);
        filters
            .iter()
            .enumerate()
            .map(|(k, w)| 1.0 - 2.0 * w.dotc(&self.effective(k, &amps[k])).re + quad_form(&r, w))
            .sum()
    }

    /// Per-link projections of `w` onto user `m`'s waveforms.
    fn projections(&self, m: usize, w: &CVec, pick: impl Fn(&LinkWaveforms) -> &CVec) -> CVec {
        let len = self.window();
        CVec::from_iterator(
            self.links(),
            self.waves[m]
                .iter()
                .enumerate()
                .map(|(j, wave)| pick(wave).dotc(&w.rows(j * len, len).into_owned())),
        )
    }

    /// Quadratic and linear terms of `Σ_{k∈users} MSE_k` as a function of the
    /// stacked amplitudes of `users` (filters fixed).
    pub fn power_statistics(&self, filters: &[CVec], users: &[usize]) -> (CMat, CVec) {
        let n = self.links();
        let dim = users.len() * n;
        let mut r = CMat::zeros(dim, dim);
        let mut p = CVec::zeros(dim);
        for (bi, &m) in users.iter().enumerate() {
            let mut block = CMat::zeros(n, n);
            for &k in users {
                add_outer(&mut block, &self.projections(m, &filters[k], |w| &w.main), 1.0);
                if self.isi {
                    add_outer(&mut block, &self.projections(m, &filters[k], |w| &w.tail), 1.0);
                    add_outer(&mut block, &self.projections(m, &filters[k], |w| &w.head), 1.0);
                }
            }
            r.view_mut((bi * n, bi * n), (n, n)).copy_from(&block);
            p.rows_mut(bi * n, n).copy_from(&self.projections(m, &filters[m], |w| &w.main));
        }
        (r, p)
    }

    /// Power allocation for every constraint block with the filters fixed.
    pub fn allocate(
        &self,
        filters: &[CVec],
        blocks: &[ConstraintBlock],
        multiplier: Multiplier,
        domain: AmplitudeDomain,
    ) -> Result<Vec<CVec>> {
        let n = self.links();
        let mut amps = vec![CVec::zeros(n); self.users()];
        for block in blocks {
            let (mut r, mut p) = self.power_statistics(filters, &block.users);
            if domain.is_real() {
                r = real_part_mat(&r);
                p = real_part_vec(&p);
            }
            let mut a = power_allocation(&r, &p, multiplier, block.budget)?.a;
            if domain != AmplitudeDomain::Complex {
                enforce_domain(&mut a, domain);
                normalize_power(&mut a, block.budget);
            }
            for (bi, &k) in block.users.iter().enumerate() {
                amps[k] = a.rows(bi * n, n).into_owned();
            }
        }
        Ok(amps)
    }

    /// RAKE strengths `‖P_k a_k‖` used to rank users.
    pub fn strengths(&self, amps: &[CVec]) -> Vec<f64> {
        amps.iter()
            .enumerate()
            .map(|(k, a)| norm_sqr(&self.effective(k, a)).sqrt())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingOptions {
    /// Group size `G`.
    pub group_size: usize,
    pub multiplier: Multiplier,
    pub domain: AmplitudeDomain,
    /// Maximum number of (power, filter) passes.
    pub iterations: usize,
    /// Stop when amplitudes and filters change by less than this.
    pub tolerance: f64,
}

impl Default for AlternatingOptions {
    fn default() -> Self {
        Self {
            group_size: 1,
            multiplier: Multiplier::Fixed(0.025),
            domain: AmplitudeDomain::NonNegative,
            iterations: 50,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlternatingOutcome {
    pub filters: Vec<CVec>,
    pub amplitudes: Vec<CVec>,
    pub group: Vec<usize>,
    /// Sum MSE before the first pass and after each pass.
    pub sum_mse: Vec<f64>,
    /// Largest change of any amplitude or filter in the last pass.
    pub residual: f64,
    pub converged: bool,
}

/// Alternates power allocation and MMSE filtering from the equal split.
pub fn alternating_optimize(model: &DestinationModel, opts: &AlternatingOptions) -> Result<AlternatingOutcome> {
    alternating_optimize_from(model, model.equal_amplitudes(), opts)
}

/// Alternates power allocation and MMSE filtering from `initial` amplitudes.
///
/// The group is ranked once from the initial amplitudes.
pub fn alternating_optimize_from(
    model: &DestinationModel,
    initial: Vec<CVec>,
    opts: &AlternatingOptions,
) -> Result<AlternatingOutcome> {
    if initial.len() != model.users() || initial.iter().any(|a| a.len() != model.links()) {
        return Err(Error::shape("initial amplitudes do not match the model"));
    }
    let group = select_group(&model.strengths(&initial), opts.group_size)?;
    let blocks = constraint_blocks(&group, &model.user_powers);
    let mut amps = initial;
    let mut filters = model.filters(&amps);
    let mut history = vec![model.sum_mse(&filters, &amps)];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..opts.iterations {
        let new_amps = model.allocate(&filters, &blocks, opts.multiplier, opts.domain)?;
        let new_filters = model.filters(&new_amps);
        residual = change(&amps, &new_amps).max(change(&filters, &new_filters));
        amps = new_amps;
        filters = new_filters;
        history.push(model.sum_mse(&filters, &amps));
        if residual < opts.tolerance {
            converged = true;
            break;
        }
    }
    Ok(AlternatingOutcome {
        filters,
        amplitudes: amps,
        group,
        sum_mse: history,
        residual,
        converged,
    })
}

fn change(a: &[CVec], b: &[CVec]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| norm_sqr(&(x - y)).sqrt())
        .fold(0.0, f64::max)
}
