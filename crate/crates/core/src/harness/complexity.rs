//! Closed-form operation counts per received symbol.

use crate::{Error, Result};

/// Complex additions and multiplications of one recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub additions: u64,
    pub multiplications: u64,
}

impl std::ops::Add for OpCount {
    type Output = OpCount;
    fn add(self, o: OpCount) -> OpCount {
        OpCount {
            additions: self.additions + o.additions,
            multiplications: self.multiplications + o.multiplications,
        }
    }
}

impl std::ops::Mul<u64> for OpCount {
    type Output = OpCount;
    fn mul(self, k: u64) -> OpCount {
        OpCount {
            additions: self.additions * k,
            multiplications: self.multiplications * k,
        }
    }
}

/// Dimensions entering the counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    /// Observation length `J`.
    pub j: u64,
    /// Users `K`.
    pub k: u64,
    /// Relays `n_r`.
    pub nr: u64,
    /// Paths `L`.
    pub l: u64,
    /// Window `M`.
    pub m: u64,
    /// Stacked channel length `Q`.
    pub q: u64,
}

impl Dimensions {
    /// DS-CDMA dimensions from `K`, `n_r`, `N` and `L`.
    pub fn cdma(k: u64, nr: u64, n: u64, l: u64) -> Self {
        let m = n + l - 1;
        Self {
            j: (nr + 1) * m,
            k,
            nr,
            l,
            m,
            q: (nr + 1) * l,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.j != (self.nr + 1) * self.m || self.q != (self.nr + 1) * self.l {
            return Err(Error::param(
                "dimensions",
                format!("need J = (n_r+1)M and Q = (n_r+1)L, got {self:?}"),
            ));
        }
        if self.k == 0 || self.l == 0 || self.m < self.l {
            return Err(Error::param("dimensions", "K and L must be positive and M >= L"));
        }
        Ok(())
    }
}

/// Joint receive-filter recursion for all users (`G = K`).
pub fn filter_joint(d: &Dimensions) -> OpCount {
    let (j, k) = (d.j, d.k);
    OpCount {
        additions: 2 * j * j + 2 * k * j - j + 1,
        multiplications: 3 * j * j + 2 * k * j + 3 * j + 1,
    }
}

/// Joint power-allocation recursion (`G = K`).
pub fn power_joint(d: &Dimensions) -> OpCount {
    let x = d.k * (d.nr + 1);
    OpCount {
        additions: 3 * d.k * x + x * (d.l - 1) + d.k * d.m * (d.nr + 1) + d.k * x + 6 * x * x + 3 * x + d.nr + 2,
        multiplications: d.k * x * x + 4 * x * x + (d.k + d.l) * x * x - x * x + d.k * d.m * d.q + d.nr,
    }
}

/// Joint channel recursion (`G = K`).
pub fn channel_joint(d: &Dimensions) -> OpCount {
    let kq = d.k * d.q;
    let x = d.k * (d.nr + 1);
    OpCount {
        additions: 5 * kq * kq + 5 * kq + 3,
        multiplications: 5 * x * x + 6 * kq + 1,
    }
}

/// Per-user receive-filter recursion (`G = 1`).
pub fn filter_user(d: &Dimensions) -> OpCount {
    let j = d.j;
    OpCount {
        additions: 2 * j * j + j + 1,
        multiplications: 3 * j * j + 5 * j + 1,
    }
}

/// Per-user power-allocation recursion (`G = 1`).
pub fn power_user(d: &Dimensions) -> OpCount {
    let n = d.nr + 1;
    OpCount {
        additions: 2 * n * n + 3 * n + d.j * d.l + d.q - 3,
        multiplications: 3 * n * n + 7 * n + d.j * d.l + d.q + 3,
    }
}

/// Per-user channel recursion (`G = 1`).
pub fn channel_user(d: &Dimensions) -> OpCount {
    let n = d.nr + 1;
    OpCount {
        additions: 2 * d.q * d.q + 5 * d.m * d.q + 3 - 5 * n,
        multiplications: 6 * d.q * d.q + d.m * d.q + 4 * n + 1,
    }
}

/// Schemes whose per-symbol cost is tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityScheme {
    /// Group constraint over all users (uplink).
    JpaisGlobal,
    /// Individual constraints, counted for all `K` users.
    JpaisIndividual,
    CisUplink,
    CisDownlink,
    NcisUplink,
    NcisDownlink,
}

impl ComplexityScheme {
    pub const ALL: [ComplexityScheme; 6] = [
        ComplexityScheme::JpaisGlobal,
        ComplexityScheme::JpaisIndividual,
        ComplexityScheme::CisUplink,
        ComplexityScheme::CisDownlink,
        ComplexityScheme::NcisUplink,
        ComplexityScheme::NcisDownlink,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ComplexityScheme::JpaisGlobal => "jpais_global",
            ComplexityScheme::JpaisIndividual => "jpais_individual",
            ComplexityScheme::CisUplink => "cis_uplink",
            ComplexityScheme::CisDownlink => "cis_downlink",
            ComplexityScheme::NcisUplink => "ncis_uplink",
            ComplexityScheme::NcisDownlink => "ncis_downlink",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityReport {
    pub scheme: ComplexityScheme,
    /// Named recursions and their counts.
    pub recursions: Vec<(&'static str, OpCount)>,
    pub total: OpCount,
}

/// Per-symbol operation count of a scheme.
pub fn complexity_count(scheme: ComplexityScheme, d: &Dimensions) -> Result<ComplexityReport> {
    d.validate()?;
    let direct = Dimensions {
        nr: 0,
        j: d.m,
        q: d.l,
        ..*d
    };
    let recursions: Vec<(&'static str, OpCount)> = match scheme {
        ComplexityScheme::JpaisGlobal => vec![("W", filter_joint(d)), ("a_T", power_joint(d)), ("h", channel_joint(d))],
        ComplexityScheme::JpaisIndividual => vec![
            ("w_k", filter_user(d) * d.k),
            ("a_k", power_user(d) * d.k),
            ("h_k", channel_user(d) * d.k),
        ],
        ComplexityScheme::CisUplink => vec![("W", filter_joint(d))],
        ComplexityScheme::CisDownlink => vec![("w_k", filter_user(d) * d.k)],
        ComplexityScheme::NcisUplink => vec![("W", filter_joint(&direct))],
        ComplexityScheme::NcisDownlink => vec![("w_k", filter_user(&direct) * d.k)],
    };
    let total = recursions.iter().fold(OpCount::default(), |acc, (_, c)| acc + *c);
    Ok(ComplexityReport {
        scheme,
        recursions,
        total,
    })
}

/// Multiplication counts per time instant of relay/antenna selection at the
/// destination.
///
/// Convention: designing MMSE reception for one pattern costs `J³ + K J²`
/// multiplications (inversion plus `K` filters); a relay's MSE costs the same
/// with `M` in place of `J`; one iterative step evaluates two patterns with
/// recursively updated filters at `3J² + K J` each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionComplexity {
    pub exhaustive_tds: f64,
    pub exhaustive_tds_rs: f64,
    pub iterative_tds: f64,
    pub iterative_tds_rs: f64,
}

pub fn selection_complexity(relays: u64, streams: u64, k_sub: u64, removed: u64, antennas: u64) -> SelectionComplexity {
    let j = (2 * antennas) as f64;
    let k = streams as f64;
    let m = antennas as f64;
    let design = j.powi(3) + k * j * j;
    let relay_design = m.powi(3) + k * m * m;
    let recursive = 3.0 * j * j + k * j;
    let full = binomial(relays * streams, k_sub) as f64;
    let reduced = binomial((relays - removed.min(relays)) * streams, k_sub) as f64;
    SelectionComplexity {
        exhaustive_tds: full * design,
        exhaustive_tds_rs: reduced * design + relays as f64 * relay_design,
        iterative_tds: 2.0 * recursive,
        iterative_tds_rs: 2.0 * recursive + 2.0 * (3.0 * m * m + k * m),
    }
}

/// `n choose k`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_entry_at_j60() {
        let d = Dimensions::cdma(8, 2, 16, 5);
        assert_eq!(d.j, 60);
        assert_eq!(filter_user(&d).additions, 7261);
    }

    #[test]
    fn inconsistent_dimensions_are_rejected() {
        let mut d = Dimensions::cdma(8, 2, 16, 5);
        d.j = 59;
        assert!(complexity_count(ComplexityScheme::CisUplink, &d).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(20, 2), 190);
        assert_eq!(binomial(12, 2), 66);
        assert_eq!(binomial(3, 5), 0);
    }
}
