//! Monte-Carlo experiments, feedback transport and complexity accounting.

mod cdma;
mod complexity;
mod config;
mod curve;
mod experiment;
mod feedback;
mod mimo;

pub use cdma::{run_packet, run_scheme, CdmaParams, PacketRealization, Scheme, SchemeRun};
pub use complexity::{
    binomial, channel_joint, channel_user, complexity_count, filter_joint, filter_user, power_joint, power_user,
    selection_complexity, ComplexityReport, ComplexityScheme, Dimensions, OpCount, SelectionComplexity,
};
pub use config::{BerSweep, ChannelKnowledge, SimConfig};
pub use curve::{format_sig, mean_and_se, paired_difference, BerCurve, BerPoint, SchemeStats, SweepVariable};
pub use experiment::{
    map_runs, mimo_label, mimo_variants, run_ber_experiment, run_fading_sweep, run_feedback_error_sweep,
    run_mimo_tds_experiment, scheme_columns, CdmaExperiment, CdmaPoint, MimoExperiment, MimoPoint,
};
pub use feedback::{
    bsc_transmit, dequantize_power_vector, group_feedback_bits, individual_feedback_bits, quantize_power_vector,
    reconstruction_levels, tds_feedback_bits, FeedbackPacket,
};
pub use mimo::{run_mimo_packet, run_mimo_scheme, MimoPacket, MimoParams, MimoRun, MimoScheme};
