//! Discrete stochastic search with state occupation probabilities.

use crate::{Error, Result};

/// Direction of the comparison in the tracker update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Track the largest cost (relay removal).
    Maximize,
    /// Track the smallest cost (antenna patterns).
    Minimize,
}

impl Objective {
    /// Strict improvement of `candidate` over `incumbent`.
    pub fn improves(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Objective::Maximize => candidate > incumbent,
            Objective::Minimize => candidate < incumbent,
        }
    }
}

/// Probability vector over a candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct SopVector {
    probs: Vec<f64>,
}

impl SopVector {
    /// Unit mass on `start`.
    pub fn new(len: usize, start: usize) -> Result<Self> {
        if start >= len {
            return Err(Error::param("start", format!("index {start} outside a set of {len}")));
        }
        let mut probs = vec![0.0; len];
        probs[start] = 1.0;
        Ok(Self { probs })
    }

    /// `π ← π + μ (e_state − π)`.
    pub fn update(&mut self, state: usize, mu: f64) {
        for (i, p) in self.probs.iter_mut().enumerate() {
            let target = if i == state { 1.0 } else { 0.0 };
            *p += mu * (target - *p);
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Distance from the simplex: `|Σπ − 1|` or the most negative entry.
    pub fn simplex_defect(&self) -> f64 {
        let sum: f64 = self.probs.iter().sum();
        let neg = self.probs.iter().fold(0.0f64, |m, &p| m.max(-p));
        (sum - 1.0).abs().max(neg)
    }
}

/// State of one discrete stochastic search.
#[derive(Debug, Clone, PartialEq)]
pub struct DsaState {
    pub objective: Objective,
    /// Current optimum (argmax of the SOP vector).
    pub current: usize,
    /// Worst (maximizing) or best (minimizing) member seen by the comparisons.
    pub tracker: usize,
    pub sop: SopVector,
    /// Iteration counter `i`, starting at 1.
    pub iteration: usize,
}

impl DsaState {
    pub fn new(len: usize, start: usize, objective: Objective) -> Result<Self> {
        Ok(Self {
            objective,
            current: start,
            tracker: start,
            sop: SopVector::new(len, start)?,
            iteration: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.sop.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sop.probs.is_empty()
    }

    /// One iteration with the drawn `candidate`; `cost` evaluates a member.
    pub fn step(&mut self, candidate: usize, mut cost: impl FnMut(usize) -> f64) {
        let c = cost(candidate);
        let t = cost(self.tracker);
        if self.objective.improves(c, t) {
            self.tracker = candidate;
        }
        self.iteration += 1;
        self.sop.update(self.tracker, 1.0 / self.iteration as f64);
        if self.sop.get(self.tracker) > self.sop.get(self.current) {
            self.current = self.tracker;
        }
    }
}

/// RS iteration: tracks the highest-MSE relay set.
pub fn dsa_rs_step(state: &mut DsaState, candidate: usize, cost: impl FnMut(usize) -> f64) {
    debug_assert_eq!(state.objective, Objective::Maximize);
    state.step(candidate, cost);
}

/// TDS iteration: tracks the lowest-MSE pattern.
pub fn dsa_tds_step(state: &mut DsaState, candidate: usize, cost: impl FnMut(usize) -> f64) {
    debug_assert_eq!(state.objective, Objective::Minimize);
    state.step(candidate, cost);
}
