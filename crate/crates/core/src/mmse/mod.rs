//! Known-statistics designs: MMSE receive filters, group power allocation,
//! alternating optimization and the MMSE channel estimator.
//!
//! These routines are the reference the adaptive algorithms are measured
//! against.

mod filter;
mod model;
mod power;

pub use filter::{
    mmse_channel_estimate, mmse_filter, rake_statistic, select_group, CovarianceFactor, ReceiveFilter,
};
pub use model::{
    alternating_optimize, alternating_optimize_from, constraint_blocks, AlternatingOptions, AlternatingOutcome,
    ConstraintBlock, DestinationModel,
};
pub use power::{enforce_domain, normalize_power, power_allocation, AmplitudeDomain, Multiplier, PowerAllocation};
