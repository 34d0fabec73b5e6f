//! Transmit diversity selection (TDS) and relay selection (RS) for the MIMO
//! relay network.
//!
//! A TDS pattern switches each of the `n_r K` relay transmit antennas on or
//! off; antenna `j K + k` is antenna `k` of relay `j` and carries stream `k`.
//! RS drops the relay (or relay subset) with the largest first-phase MSE and
//! removes every pattern that uses it.

mod cost;
mod dsa;

pub use cost::{MimoInstance, SmoothedCosts};
pub use dsa::{dsa_rs_step, dsa_tds_step, DsaState, Objective, SopVector};

use crate::{Error, Result};

/// 0/1 activation of the relay transmit antennas.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TdsPattern {
    active: Vec<bool>,
}

impl TdsPattern {
    pub fn new(active: Vec<bool>) -> Self {
        Self { active }
    }

    /// Pattern with the listed antennas active.
    pub fn from_indices(antennas: usize, on: &[usize]) -> Result<Self> {
        let mut active = vec![false; antennas];
        for &a in on {
            if a >= antennas {
                return Err(Error::param("pattern", format!("antenna {a} out of range 0..{antennas}")));
            }
            active[a] = true;
        }
        Ok(Self { active })
    }

    /// Every antenna active.
    pub fn all(antennas: usize) -> Self {
        Self {
            active: vec![true; antennas],
        }
    }

    pub fn antennas(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, antenna: usize) -> bool {
        self.active[antenna]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&a| self.active[a]).collect()
    }

    /// Whether any antenna of relay `relay` transmits.
    pub fn uses_relay(&self, relay: usize, streams: usize) -> bool {
        self.active[relay * streams..(relay + 1) * streams].iter().any(|&a| a)
    }
}

/// Candidate sets of the selection problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSets {
    pub relays: usize,
    pub streams: usize,
    pub k_sub: usize,
    /// All patterns with `K_sub` active antennas, lexicographic in the active indices.
    pub patterns: Vec<TdsPattern>,
    /// RS candidates: relay subsets of the removal size.
    pub relay_sets: Vec<Vec<usize>>,
}

/// All `C(n_r K, K_sub)` patterns in canonical order, with single-relay RS candidates.
pub fn enumerate_tds(relays: usize, streams: usize, k_sub: usize) -> Result<CandidateSets> {
    let n = relays * streams;
    if k_sub > n {
        return Err(Error::param("K_sub", format!("K_sub = {k_sub} exceeds the {n} relay antennas")));
    }
    let patterns = combinations(n, k_sub)
        .into_iter()
        .map(|c| TdsPattern::from_indices(n, &c))
        .collect::<Result<_>>()?;
    Ok(CandidateSets {
        relays,
        streams,
        k_sub,
        patterns,
        relay_sets: combinations(relays, 1.min(relays)),
    })
}

/// RS candidates removing `remove` relays at once.
pub fn relay_subsets(relays: usize, remove: usize) -> Result<Vec<Vec<usize>>> {
    if remove == 0 || remove > relays {
        return Err(Error::param("removed_relays", format!("must lie in 1..={relays}")));
    }
    Ok(combinations(relays, remove))
}

/// `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Patterns that leave every relay in `removed` silent.
pub fn set_reduction(patterns: &[TdsPattern], removed: &[usize], streams: usize) -> Vec<TdsPattern> {
    patterns
        .iter()
        .filter(|p| removed.iter().all(|&j| !p.uses_relay(j, streams)))
        .cloned()
        .collect()
}

/// One bit per relay antenna.
pub fn feedback_bits(pattern: &TdsPattern) -> Vec<bool> {
    pattern.active.clone()
}

/// Inverse of [`feedback_bits`].
pub fn decode_feedback(bits: &[bool]) -> TdsPattern {
    TdsPattern::new(bits.to_vec())
}

/// Index of the lowest-cost member of `set`; ties go to the earliest.
pub fn exhaustive_tds(set: &[TdsPattern], mut cost: impl FnMut(&TdsPattern) -> f64) -> Result<usize> {
    argbest(set.len(), |i| cost(&set[i]), Objective::Minimize)
}

/// Index of the highest-MSE relay set; ties go to the earliest.
pub fn exhaustive_rs(candidates: &[Vec<usize>], mut cost: impl FnMut(&[usize]) -> f64) -> Result<usize> {
    argbest(candidates.len(), |i| cost(&candidates[i]), Objective::Maximize)
}

fn argbest(n: usize, mut cost: impl FnMut(usize) -> f64, objective: Objective) -> Result<usize> {
    if n == 0 {
        return Err(Error::param("candidates", "the candidate set is empty"));
    }
    let mut best = 0;
    let mut best_cost = cost(0);
    for i in 1..n {
        let c = cost(i);
        if objective.improves(c, best_cost) {
            best = i;
            best_cost = c;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_counts() {
        assert_eq!(enumerate_tds(2, 2, 2).unwrap().patterns.len(), 6);
        assert_eq!(enumerate_tds(1, 2, 2).unwrap().patterns.len(), 1);
        assert_eq!(enumerate_tds(4, 2, 2).unwrap().patterns.len(), 28);
        assert!(enumerate_tds(1, 2, 3).is_err());
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let sets = enumerate_tds(2, 2, 2).unwrap();
        let idx: Vec<Vec<usize>> = sets.patterns.iter().map(|p| p.active_indices()).collect();
        assert_eq!(idx, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn reduction_sizes() {
        let sets = enumerate_tds(2, 2, 2).unwrap();
        let reduced = set_reduction(&sets.patterns, &[0], 2);
        assert_eq!(reduced.len(), 1);
        assert_eq!(set_reduction(&reduced, &[0], 2), reduced);
        let big = enumerate_tds(10, 2, 2).unwrap();
        assert_eq!(set_reduction(&big.patterns, &[0, 1, 2, 3], 2).len(), 66);
    }

    #[test]
    fn feedback_round_trip() {
        let p = TdsPattern::from_indices(20, &[3, 17]).unwrap();
        let bits = feedback_bits(&p);
        assert_eq!(bits.len(), 20);
        assert_eq!(decode_feedback(&bits), p);
        assert!(feedback_bits(&TdsPattern::all(4)).iter().all(|&b| b));
    }

    #[test]
    fn exhaustive_ties_and_empty() {
        let set = enumerate_tds(2, 2, 2).unwrap().patterns;
        assert_eq!(exhaustive_tds(&set, |_| 1.0).unwrap(), 0);
        assert_eq!(exhaustive_tds(&set[2..3], |_| 5.0).unwrap(), 0);
        assert!(exhaustive_tds(&[], |_| 0.0).is_err());
        assert_eq!(exhaustive_rs(&[vec![0], vec![1]], |_| 2.0).unwrap(), 0);
    }
}
