//! The GMC flow in the strength parameter, driven by Brownian coefficients.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::factor::FactorMap;
use super::kahane::{kahane_weights, GMCRealization, GaussianDraw};
use crate::error::{domain, Result};
use crate::rng::SeedStreams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmcFlow {
    pub a_grid: Vec<f64>,
    pub realizations: Vec<GMCRealization>,
    /// `ξ(a_k)`, the Brownian coefficients at each grid point.
    pub noise: Vec<Vec<f64>>,
}

impl GmcFlow {
    /// `M(a_k) f` along the grid.
    pub fn pair(&self, f: &[f64]) -> Vec<f64> {
        self.realizations.iter().map(|r| r.pair(f)).collect()
    }
}

pub fn validate_grid(a_grid: &[f64]) -> Result<()> {
    if a_grid.first() != Some(&0.0) {
        return domain("the strength grid must start at 0");
    }
    if a_grid.windows(2).any(|w| !(w[1] > w[0])) || a_grid.iter().any(|a| !a.is_finite()) {
        return domain("the strength grid must be strictly increasing");
    }
    Ok(())
}

pub fn gmc_flow_with_rng<R: Rng + ?Sized>(base_weights: &[f64], y: &FactorMap, a_grid: &[f64], rng: &mut R) -> Result<GmcFlow> {
    validate_grid(a_grid)?;
    let k = y.rank();
    let mut xi = vec![0.0; k];
    let mut realizations = Vec::with_capacity(a_grid.len());
    let mut noise = Vec::with_capacity(a_grid.len());
    let mut prev = 0.0;
    for &a in a_grid {
        let sd = (a - prev).sqrt();
        if a > prev {
            for x in xi.iter_mut() {
                *x += sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        prev = a;
        realizations.push(kahane_weights(base_weights, y, &GaussianDraw::new(a, xi.clone())?)?);
        noise.push(xi.clone());
    }
    Ok(GmcFlow { a_grid: a_grid.to_vec(), realizations, noise })
}

/// Flow number `index` of the `flow` stream of `seed`.
pub fn gmc_flow(base_weights: &[f64], y: &FactorMap, a_grid: &[f64], seed: u64, index: u64) -> Result<GmcFlow> {
    let mut rng = SeedStreams::new(seed).stream("flow", index);
    gmc_flow_with_rng(base_weights, y, a_grid, &mut rng)
}
