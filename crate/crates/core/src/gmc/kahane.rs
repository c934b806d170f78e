//! Kahane's exponential weights for a finite factor, their moments and Shamov's shift identity.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::factor::{FactorMap, SpectralFactor};
use crate::error::{domain, Error, Result};
use crate::paths::WeightedPathEnsemble;
use nalgebra::DMatrix;

/// Exponents beyond this magnitude are reported instead of evaluated.
pub const EXPONENT_GUARD: f64 = 600.0;

/// Upper bound on the number of tuples summed by the moment oracle.
pub const MAX_ORACLE_TUPLES: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDraw {
    pub strength: f64,
    pub components: Vec<f64>,
}

impl GaussianDraw {
    pub fn new(strength: f64, components: Vec<f64>) -> Result<Self> {
        if !(strength >= 0.0) || !strength.is_finite() {
            return domain(format!("strength {strength} must be finite and nonnegative"));
        }
        Ok(GaussianDraw { strength, components })
    }

    pub fn zero(strength: f64, k: usize) -> Result<Self> {
        GaussianDraw::new(strength, vec![0.0; k])
    }

    /// iid `N(0, a)` components.
    pub fn sample<R: Rng + ?Sized>(strength: f64, k: usize, rng: &mut R) -> Result<Self> {
        let sd = strength.max(0.0).sqrt();
        let components = (0..k).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
        GaussianDraw::new(strength, components)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GMCRealization {
    pub base_weights: Vec<f64>,
    pub new_weights: Vec<f64>,
    /// `Σ_j ξ_j Y e_j(i) − (a/2) Σ_j (Y e_j(i))²`.
    pub exponents: Vec<f64>,
}

impl GMCRealization {
    /// `Σ_i M_i f_i`.
    pub fn pair(&self, f: &[f64]) -> f64 {
        self.new_weights.iter().zip(f).map(|(m, x)| m * x).sum()
    }
}

/// Kahane exponents for every path.
pub fn kahane_exponents(y: &FactorMap, draw: &GaussianDraw) -> Result<Vec<f64>> {
    if draw.len() != y.rank() {
        return Err(Error::DimensionMismatch { expected: y.rank(), found: draw.len() });
    }
    let half_a = 0.5 * draw.strength;
    let mut out = Vec::with_capacity(y.paths());
    for i in 0..y.paths() {
        let mut lin = 0.0;
        let mut sq = 0.0;
        for j in 0..y.rank() {
            let v = y.y[(i, j)];
            lin += draw.components[j] * v;
            sq += v * v;
        }
        let e = lin - half_a * sq;
        if !(e.abs() <= EXPONENT_GUARD) {
            return Err(Error::Overflow(format!("Kahane exponent {e} at path {i} exceeds the guard {EXPONENT_GUARD}")));
        }
        out.push(e);
    }
    Ok(out)
}

pub fn kahane_weights(base_weights: &[f64], y: &FactorMap, draw: &GaussianDraw) -> Result<GMCRealization> {
    if base_weights.len() != y.paths() {
        return Err(Error::DimensionMismatch { expected: y.paths(), found: base_weights.len() });
    }
    let exponents = kahane_exponents(y, draw)?;
    let new_weights = base_weights.iter().zip(&exponents).map(|(w, e)| w * e.exp()).collect();
    Ok(GMCRealization { base_weights: base_weights.to_vec(), new_weights, exponents })
}

/// The GMC of the ensemble's weights under the standard factor `Y e_j = √λ_j φ_j`.
pub fn kahane_gmc(base: &WeightedPathEnsemble, factor: &SpectralFactor, draw: &GaussianDraw) -> Result<GMCRealization> {
    kahane_weights(base.weights(), &factor.factor_map(), draw)
}

/// Closed-form `E_ξ` of each weight factor: `exp((a/2)|Y_i|² − (a/2)|Y_i|²)`.
pub fn expected_factors(y: &FactorMap, strength: f64) -> Vec<f64> {
    y.row_norms2().iter().map(|s| (0.5 * strength * s - 0.5 * strength * s).exp()).collect()
}

/// `Σ_{i₁..i_n} ∏ μ_{i_k} · exp(a Σ_{k<l} K_{i_k i_l}) · f(i₁..i_n)`.
pub fn gmc_moment_oracle(
    masses: &[f64],
    kernel: &DMatrix<f64>,
    strength: f64,
    n: usize,
    f: &dyn Fn(&[usize]) -> f64,
) -> Result<f64> {
    let m = masses.len();
    if kernel.nrows() != m || kernel.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, found: kernel.nrows() });
    }
    if n == 0 || n > 4 {
        return Err(Error::Guard(format!("moment order {n} outside 1..=4")));
    }
    let tuples = (m as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if tuples > MAX_ORACLE_TUPLES {
        return Err(Error::Guard(format!("{tuples} tuples exceed {MAX_ORACLE_TUPLES}")));
    }
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    if m == 0 {
        return Ok(0.0);
    }
    loop {
        let mut mass = 1.0;
        let mut pairs = 0.0;
        for k in 0..n {
            mass *= masses[idx[k]];
            for l in (k + 1)..n {
                pairs += kernel[(idx[k], idx[l])];
            }
        }
        total += mass * (strength * pairs).exp() * f(&idx);
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `max_i |M[ξ+h]_i − M[ξ]_i e^{(Yh)_i}| / (M[ξ]_i e^{(Yh)_i})`.
pub fn shamov_shift_check(base_weights: &[f64], y: &FactorMap, draw: &GaussianDraw, h: &[f64]) -> Result<f64> {
    if h.len() != y.rank() {
        return Err(Error::DimensionMismatch { expected: y.rank(), found: h.len() });
    }
    let shifted = GaussianDraw::new(draw.strength, draw.components.iter().zip(h).map(|(x, d)| x + d).collect())?;
    let lhs = kahane_weights(base_weights, y, &shifted)?;
    let rhs = kahane_weights(base_weights, y, draw)?;
    let mut worst: f64 = 0.0;
    for i in 0..y.paths() {
        let yh: f64 = (0..y.rank()).map(|j| y.y[(i, j)] * h[j]).sum();
        let r = rhs.new_weights[i] * yh.exp();
        let l = lhs.new_weights[i];
        if r == 0.0 && l == 0.0 {
            continue;
        }
        worst = worst.max((l - r).abs() / r.abs().max(l.abs()));
    }
    Ok(worst)
}
