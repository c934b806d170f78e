//! Couplings of GMCs over the pieces of an interval partition.

pub mod concat;
pub mod iota;
pub mod naimark;
pub mod partition;

pub use concat::{concatenation_check, concatenation_check_matrices, ConcatenationReport, ConcatenationSetup, EndpointFn};
pub use iota::{
    coupled_noise, coupling_isometry, direct_sum_factor, refinement_consistency, CouplingIsometry, DirectSumFactor,
};
pub use naimark::{naimark_projection_check, partition_check, projection_decay, NaimarkReport};
pub use partition::{piece_factors, IntervalPartition};
