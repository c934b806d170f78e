//! The analytic side: `j^θ`, diagrams, the two-particle delta-Bose kernel and
//! the variance functionals.

pub mod diagrams;
pub mod jfun;
pub mod pairing;
pub mod semigroup;
pub mod variance;

pub use jfun::{
    j_convolution_power, j_resummed, j_theta, j_theta_mass, j_theta_scaled_log, JKernel, JThetaTable, ResummedValue,
    ThetaParams, Truncation,
};
pub use diagrams::{count_diagrams, enumerate_diagrams, Diagram, DiagramIter, Pair};
pub use pairing::{moment2_pairing, PairedMoment};
pub use semigroup::{centered_moment2, semigroup2, HeatInTime, Point, TwoParticle};
pub use variance::{pair_overlap, variance_functionals, Bump, GaussianProfile, VarianceFunctionals};
