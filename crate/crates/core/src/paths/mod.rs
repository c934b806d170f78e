//! Discrete path-space measures on the lazy walk lattice.

pub mod annealed;
pub mod bridge;
pub mod disorder;
pub mod ensemble;
pub mod intersection;
pub mod io;
pub mod polymer;
pub mod walk;

pub use annealed::{
    annealed_second_moment_trial, pair_tilt_average, partition_samples, second_moment_samples, MomentEstimate,
    MomentEstimator, PolymerParams, ReferencePairs,
};
pub use bridge::{bridge_concatenate, BridgeMode};
pub use disorder::{gibbs_reweight, polymer_gibbs_reweight, CriticalWindow, DisorderField, WindowCalibration};
pub use ensemble::{
    cell_area, marginal, sample_reference_walks, spatial_scale, to_continuum, EnsembleMeta, PointConfiguration, StartBox,
    WeightedPathEnsemble,
};
pub use intersection::{coincidence_pairs, intersection_matrix, IntersectionMatrix, IntersectionMode, LatticeScale};
pub use walk::{collision_probability, expected_coincidences, transition_probability, LatticePath, Site, TransitionTable};
pub use polymer::{quenched_overlap, quenched_polymer, quenched_polymer_planted, PolymerDomain, PolymerOverlap, QuenchedSolution};
