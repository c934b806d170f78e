//! Partial isometries between factorizations of one kernel, and embedding of eigenvectors.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::factor::{FactorMap, SpectralFactor};
use crate::error::{Error, Result};
use crate::paths::{intersection_matrix, IntersectionMode, LatticePath, Site, WeightedPathEnsemble};

/// Tolerance on `Y1 Y1* = Y2 Y2*`, relative to the kernel scale.
pub const GRAM_TOLERANCE: f64 = 1e-8;

/// Relative singular-value cutoff for pseudo-inverses.
pub const RANK_CUTOFF: f64 = 1e-10;

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    svd.pseudo_inverse(RANK_CUTOFF * top).expect("both factors computed")
}

/// Orthogonal projector onto the range of `m`.
pub fn range_projector(m: &DMatrix<f64>) -> DMatrix<f64> {
    m * pseudo_inverse(m)
}

/// `ι` with `Y1 = Y2 ι`, `ι(Y1* ψ) = Y2* ψ` and `ι = 0` on `null(Y1)`.
pub fn partial_isometry(y1: &FactorMap, y2: &FactorMap) -> Result<DMatrix<f64>> {
    if y1.paths() != y2.paths() {
        return Err(Error::DimensionMismatch { expected: y1.paths(), found: y2.paths() });
    }
    let k1 = y1.kernel();
    let k2 = y2.kernel();
    let scale = k1.amax().max(k2.amax()).max(1.0);
    let gap = max_abs_diff(&k1, &k2);
    if gap > GRAM_TOLERANCE * scale {
        return Err(Error::GramMismatch(gap));
    }
    Ok(pseudo_inverse(&y2.y) * &y1.y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedFactor {
    pub eigenvalues: Vec<f64>,
    /// `table[k][p]`: the extended eigenvector `k` at big-ensemble path `p`.
    pub table: Vec<Vec<f64>>,
    /// Index of each big path's restriction in the small ensemble.
    pub matches: Vec<usize>,
    /// `max |Σ λ_k ẽφ_k ẽφ_k^T − L₁|` over the small window.
    pub discrepancy: f64,
}

fn path_key(p: &LatticePath) -> (i64, Vec<Site>) {
    (p.start_time(), p.positions().to_vec())
}

/// Extends the eigenvectors of `small` (a factor on `small_ens`) to the paths of `big` through
/// `φ_k(p) = λ_k^{-1} Σ_{p'} μ(p') k(p, p') φ_k(p')`, with `k` the intersection kernel over the
/// small window evaluated between restricted big paths and small paths.
pub fn embed_factor(
    small: &SpectralFactor,
    small_ens: &WeightedPathEnsemble,
    big: &WeightedPathEnsemble,
    mode: IntersectionMode,
) -> Result<EmbeddedFactor> {
    let (s, t) = small_ens.window();
    if small.paths() != small_ens.len() {
        return Err(Error::DimensionMismatch { expected: small_ens.len(), found: small.paths() });
    }
    if big.meta.lattice_n != small_ens.meta.lattice_n {
        return Err(Error::Guard("ensembles live on different horizons".into()));
    }
    let restricted = big.restrict(s, t)?;
    let index: HashMap<(i64, Vec<Site>), usize> =
        small_ens.paths().iter().enumerate().map(|(i, p)| (path_key(p), i)).collect();
    let matches = restricted
        .paths()
        .iter()
        .enumerate()
        .map(|(p, path)| {
            index.get(&path_key(path)).copied().ok_or_else(|| Error::SupportMismatch(format!("restriction of big path {p} is not in the small ensemble")))
        })
        .collect::<Result<Vec<_>>>()?;

    let n0 = small_ens.len();
    let n1 = big.len();
    let mut combined_paths = small_ens.paths().to_vec();
    combined_paths.extend_from_slice(restricted.paths());
    let combined = WeightedPathEnsemble::new_unchecked(combined_paths, vec![0.0; n0 + n1], (s, t), restricted.meta.clone());
    let full = intersection_matrix(&combined, (s, t), mode)?;
    let k = full.entries();

    let masses = small.weighted_product.masses();
    let table: Vec<Vec<f64>> = small
        .eigenvalues
        .iter()
        .zip(&small.eigenvectors)
        .map(|(lambda, phi)| {
            (0..n1)
                .map(|p| (0..n0).map(|q| masses[q] * k[(n0 + p, q)] * phi[q]).sum::<f64>() / lambda)
                .collect()
        })
        .collect();

    let direct = intersection_matrix(&restricted, (s, t), mode)?;
    let mut discrepancy: f64 = 0.0;
    for p in 0..n1 {
        for q in 0..n1 {
            let rec: f64 = small.eigenvalues.iter().zip(&table).map(|(l, e)| l * e[p] * e[q]).sum();
            discrepancy = discrepancy.max((rec - direct.get(p, q)).abs());
        }
    }
    Ok(EmbeddedFactor { eigenvalues: small.eigenvalues.clone(), table, matches, discrepancy })
}
