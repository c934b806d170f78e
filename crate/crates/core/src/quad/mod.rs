//! Deterministic numerical kernels: special functions, heat kernels and adaptive
//! quadrature for singular integrands on half-lines and time simplices.

pub mod adaptive;
pub mod heat;
pub mod kernel;
pub mod simplex;
pub mod special;
pub mod table;

pub use adaptive::{integrate, QuadSettings, QuadratureResult};
pub use heat::heat_kernel;
pub use kernel::{integrate_semi_infinite, integrate_to, FnKernel, Kernel, SingularityProfile};
pub use simplex::{convolve_scaled_log, simplex_convolve, simplex_convolve_grid, Convolution};
pub use special::{bessel_k0, gamma, ln_gamma};
pub use table::GridKernel;
