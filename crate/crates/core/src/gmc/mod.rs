//! Finite-dimensional conditional Gaussian multiplicative chaos over path ensembles.

pub mod factor;
pub mod flow;
pub mod isometry;
pub mod kahane;

pub use factor::{spectral_factorize, spectral_factorize_matrix, FactorMap, SpectralFactor, WeightedInnerProduct, EIGEN_CLAMP};
pub use flow::{gmc_flow, gmc_flow_with_rng, validate_grid, GmcFlow};
pub use isometry::{
    embed_factor, max_abs_diff, partial_isometry, pseudo_inverse, range_projector, EmbeddedFactor, GRAM_TOLERANCE, RANK_CUTOFF,
};
pub use kahane::{
    expected_factors, gmc_moment_oracle, kahane_exponents, kahane_gmc, kahane_weights, shamov_shift_check, GMCRealization,
    GaussianDraw, EXPONENT_GUARD,
};
