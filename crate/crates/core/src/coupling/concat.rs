//! Concatenation across a gap: conditioning the coupled big-window GMC on the outer noises.
//!
//! The big window is cut into `I₁ = (s₁, t₁]`, the gap `I_c = (t₁, s₂]` and `I₂ = (s₂, t₂]`.
//! The big GMC is driven by `ξ_big = ι*(ξ₁ ⊕ ξ_c ⊕ ξ₂)`. Given `ξ₁, ξ₂` the exponent of path
//! `p` is Gaussian in `ξ_c`, so
//! `E[M_big(p) | ξ₁, ξ₂] = μ_p exp(⟨Y_big(p), ι₁*ξ₁ + ι₂*ξ₂⟩ + (a/2)|ι_c Y_big(p)|² − (a/2)|Y_big(p)|²)`.
//! The other side is the bridge concatenation of the GMCs over the left and right ensembles,
//! whose draws are carried to `ξ₁, ξ₂` by the partial isometries between their lifted
//! factors and the piece factors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::iota::{coupling_isometry, direct_sum_factor};
use crate::error::{Error, Result};
use crate::gmc::{
    kahane_weights, partial_isometry, spectral_factorize_matrix, FactorMap, GaussianDraw, WeightedInnerProduct,
    EXPONENT_GUARD,
};
use crate::paths::{bridge_concatenate, intersection_matrix, BridgeMode, IntersectionMode, WeightedPathEnsemble};
use crate::rng::SeedStreams;

/// Endpoint test function `f(X(s₁), X(t₂))` in continuum coordinates.
pub type EndpointFn = dyn Fn([f64; 2], [f64; 2]) -> f64 + Sync;

/// Matrix data of a concatenation: left and right ensembles and the pairs joined across the gap.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatenationSetup {
    pub left_masses: Vec<f64>,
    pub right_masses: Vec<f64>,
    /// `(l, r)` for each big path.
    pub pairs: Vec<(usize, usize)>,
    /// Bridge factor of each big path; positive.
    pub gap_factors: Vec<f64>,
    /// Intersection kernels of the left ensemble over `I₁`, the right over `I₂`, and the big
    /// ensemble over the gap.
    pub k_left: DMatrix<f64>,
    pub k_right: DMatrix<f64>,
    pub k_middle: DMatrix<f64>,
}

impl ConcatenationSetup {
    pub fn big_masses(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .zip(&self.gap_factors)
            .map(|(&(l, r), g)| self.left_masses[l] * self.right_masses[r] * g)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let (nl, nr, np) = (self.left_masses.len(), self.right_masses.len(), self.pairs.len());
        if self.gap_factors.len() != np {
            return Err(Error::DimensionMismatch { expected: np, found: self.gap_factors.len() });
        }
        for (k, n) in [(&self.k_left, nl), (&self.k_right, nr), (&self.k_middle, np)] {
            if k.nrows() != n || k.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: k.nrows() });
            }
        }
        if self.pairs.iter().any(|&(l, r)| l >= nl || r >= nr) {
            return Err(Error::Domain("pair index outside the outer ensembles".into()));
        }
        if self.gap_factors.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::Domain("bridge factors must be positive".into()));
        }
        Ok(())
    }

    fn lift(&self, k: &DMatrix<f64>, side: usize) -> DMatrix<f64> {
        let idx = |p: usize| if side == 0 { self.pairs[p].0 } else { self.pairs[p].1 };
        let n = self.pairs.len();
        DMatrix::from_fn(n, n, |p, q| k[(idx(p), idx(q))])
    }

    fn lift_rows(&self, y: &FactorMap, side: usize) -> FactorMap {
        let idx = |p: usize| if side == 0 { self.pairs[p].0 } else { self.pairs[p].1 };
        FactorMap::new(DMatrix::from_fn(self.pairs.len(), y.rank(), |p, j| y.y[(idx(p), j)]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcatenationReport {
    /// Max relative discrepancy over the battery.
    pub discrepancy: f64,
    /// Conditional expectation of the coupled big GMC, per test function.
    pub conditional: Vec<f64>,
    /// Bridge-concatenated product of the outer GMCs, per test function.
    pub concatenated: Vec<f64>,
    /// `max |Y_big − Y_sum ι|` of the three-piece coupling.
    pub factor_error: f64,
    pub left_draw: Vec<f64>,
    pub right_draw: Vec<f64>,
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// The check on explicit matrices. `battery[k][p]` is test function `k` on big path `p`.
/// Outer draws come from the `"gmc"` streams of `seed`.
pub fn concatenation_check_matrices(
    setup: &ConcatenationSetup,
    strength: f64,
    seed: u64,
    battery: &[Vec<f64>],
) -> Result<ConcatenationReport> {
    setup.validate()?;
    let np = setup.pairs.len();
    if let Some(f) = battery.iter().find(|f| f.len() != np) {
        return Err(Error::DimensionMismatch { expected: np, found: f.len() });
    }
    let big_masses = setup.big_masses();
    let left = spectral_factorize_matrix(&setup.k_left, &WeightedInnerProduct::new(setup.left_masses.clone())?)?.factor_map();
    let right =
        spectral_factorize_matrix(&setup.k_right, &WeightedInnerProduct::new(setup.right_masses.clone())?)?.factor_map();
    let big_product = WeightedInnerProduct::new(big_masses.clone())?;
    let k1 = setup.lift(&setup.k_left, 0);
    let k2 = setup.lift(&setup.k_right, 1);
    let kc = &setup.k_middle;
    let k_big = &k1 + kc + &k2;
    let pieces = [&k1, kc, &k2]
        .iter()
        .map(|k| Ok(spectral_factorize_matrix(k, &big_product)?.factor_map()))
        .collect::<Result<Vec<FactorMap>>>()?;
    let y_big = spectral_factorize_matrix(&k_big, &big_product)?.factor_map();
    let sum = direct_sum_factor(&pieces, &k_big)?;
    let iota = coupling_isometry(&y_big, &sum)?;

    let streams = SeedStreams::new(seed);
    let xi_left = GaussianDraw::sample(strength, left.rank(), &mut streams.stream("gmc", 0))?;
    let xi_right = GaussianDraw::sample(strength, right.rank(), &mut streams.stream("gmc", 1))?;
    let iota_left = partial_isometry(&pieces[0], &setup.lift_rows(&left, 0))?;
    let iota_right = partial_isometry(&pieces[2], &setup.lift_rows(&right, 1))?;
    let xi1 = iota_left.transpose() * DVector::from_column_slice(&xi_left.components);
    let xi2 = iota_right.transpose() * DVector::from_column_slice(&xi_right.components);

    let mean = iota.block(0).transpose() * xi1 + iota.block(2).transpose() * xi2;
    let linear = &y_big.y * mean;
    let middle = &y_big.y * iota.block(1).transpose();
    let norms = y_big.row_norms2();
    let half_a = 0.5 * strength;
    let mut conditional_weights = Vec::with_capacity(np);
    for p in 0..np {
        let e = linear[p] + half_a * middle.row(p).norm_squared() - half_a * norms[p];
        if !(e.abs() <= EXPONENT_GUARD) {
            return Err(Error::Overflow(format!("conditional exponent {e} at path {p}")));
        }
        conditional_weights.push(big_masses[p] * e.exp());
    }

    let ml = kahane_weights(&setup.left_masses, &left, &xi_left)?;
    let mr = kahane_weights(&setup.right_masses, &right, &xi_right)?;
    let concatenated_weights: Vec<f64> = setup
        .pairs
        .iter()
        .zip(&setup.gap_factors)
        .map(|(&(l, r), g)| ml.new_weights[l] * mr.new_weights[r] * g)
        .collect();

    let pair = |w: &[f64], f: &[f64]| w.iter().zip(f).map(|(a, b)| a * b).sum::<f64>();
    let conditional: Vec<f64> = battery.iter().map(|f| pair(&conditional_weights, f)).collect();
    let concatenated: Vec<f64> = battery.iter().map(|f| pair(&concatenated_weights, f)).collect();
    let discrepancy = conditional.iter().zip(&concatenated).map(|(a, b)| relative(*a, *b)).fold(0.0, f64::max);
    Ok(ConcatenationReport {
        discrepancy,
        conditional,
        concatenated,
        factor_error: iota.factor_error,
        left_draw: xi_left.components,
        right_draw: xi_right.components,
    })
}

/// Joins `left` and `right` by sampled bridges across `gap` and runs the check with the
/// endpoint battery. The bridge stream and the GMC streams both derive from `seed`.
pub fn concatenation_check(
    left: &WeightedPathEnsemble,
    right: &WeightedPathEnsemble,
    gap: i64,
    mode: IntersectionMode,
    strength: f64,
    seed: u64,
    battery: &[&EndpointFn],
) -> Result<ConcatenationReport> {
    let streams = SeedStreams::new(seed);
    let big = bridge_concatenate(left, right, gap, BridgeMode::FullPaths { seed: streams.derive("bridge", 0) })?;
    let parents = big.meta.parents.clone().ok_or_else(|| Error::Guard("concatenation lost its parent indices".into()))?;
    let pairs: Vec<(usize, usize)> = parents.iter().map(|&(l, r)| (l as usize, r as usize)).collect();
    let gap_factors: Vec<f64> = pairs
        .iter()
        .zip(big.weights())
        .map(|(&(l, r), w)| w / (left.weights()[l] * right.weights()[r]))
        .collect();
    let (s1, t1) = left.window();
    let (s2, t2) = right.window();
    let setup = ConcatenationSetup {
        left_masses: left.weights().to_vec(),
        right_masses: right.weights().to_vec(),
        pairs,
        gap_factors,
        k_left: intersection_matrix(left, (s1, t1), mode)?.entries().clone(),
        k_right: intersection_matrix(right, (s2, t2), mode)?.entries().clone(),
        k_middle: intersection_matrix(&big, (t1, s2), mode)?.entries().clone(),
    };
    let values: Vec<Vec<f64>> = battery
        .iter()
        .map(|f| {
            (0..big.len())
                .map(|p| f(big.position(p, s1).expect("in window"), big.position(p, t2).expect("in window")))
                .collect()
        })
        .collect();
    concatenation_check_matrices(&setup, strength, streams.derive("gmc", 0), &values)
}
