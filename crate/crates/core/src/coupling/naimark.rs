//! The partition projections on the universal coefficient space.
//!
//! The universal space is the direct sum of the piece coefficient spaces. Big-window
//! coefficients enter it through `ι`, and the operator of a window made of pieces `I` is
//! recovered as `Y_big ι* P_I ι Y_big*`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::iota::{coupling_isometry, direct_sum_factor, CouplingIsometry, DirectSumFactor};
use super::partition::{piece_factors, IntervalPartition};
use crate::error::{Error, Result};
use crate::gmc::{max_abs_diff, spectral_factorize, FactorMap, WeightedInnerProduct};
use crate::paths::{intersection_matrix, IntersectionMode, WeightedPathEnsemble};

fn block_projector(iota: &CouplingIsometry, pieces: &Range<usize>) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(iota.codomain_dim(), iota.codomain_dim());
    for k in pieces.clone() {
        for i in iota.blocks[k].clone() {
            p[(i, i)] = 1.0;
        }
    }
    p
}

/// `max |K_window − Y_big ι* P ι Y_big*|` in kernel-matrix form, `P` projecting onto the
/// coefficient blocks of `pieces`.
pub fn naimark_projection_check(
    big: &FactorMap,
    iota: &CouplingIsometry,
    pieces: Range<usize>,
    window_kernel: &DMatrix<f64>,
) -> Result<f64> {
    if pieces.end > iota.blocks.len() {
        return Err(Error::InvalidWindow(format!("pieces {pieces:?} outside a {}-piece partition", iota.blocks.len())));
    }
    if window_kernel.nrows() != big.paths() {
        return Err(Error::DimensionMismatch { expected: big.paths(), found: window_kernel.nrows() });
    }
    let w = block_projector(iota, &pieces) * &iota.matrix * big.y.transpose();
    let rebuilt = (&iota.matrix * big.y.transpose()).transpose() * w;
    Ok(max_abs_diff(&rebuilt, window_kernel))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaimarkReport {
    pub gram_error: f64,
    pub isometry_error: f64,
    pub factor_error: f64,
    pub range_error: f64,
    pub naimark_discrepancy: f64,
}

struct Coupled {
    big: FactorMap,
    iota: CouplingIsometry,
    sum: DirectSumFactor,
}

fn couple(
    ensemble: &WeightedPathEnsemble,
    partition: &IntervalPartition,
    mode: IntersectionMode,
    weights: &WeightedInnerProduct,
) -> Result<Coupled> {
    let big_kernel = intersection_matrix(ensemble, partition.big_window(), mode)?;
    let big = spectral_factorize(&big_kernel, weights)?.factor_map();
    let pieces: Vec<FactorMap> = piece_factors(ensemble, partition, mode, weights)?.iter().map(|f| f.factor_map()).collect();
    let sum = direct_sum_factor(&pieces, big_kernel.entries())?;
    let iota = coupling_isometry(&big, &sum)?;
    Ok(Coupled { big, iota, sum })
}

/// Builds the coupling for `partition` and checks the projection identity on `subwindow`,
/// which must be a union of consecutive pieces.
pub fn partition_check(
    ensemble: &WeightedPathEnsemble,
    partition: &IntervalPartition,
    subwindow: (i64, i64),
    mode: IntersectionMode,
    weights: &WeightedInnerProduct,
) -> Result<NaimarkReport> {
    let pieces = partition
        .cover(subwindow)
        .ok_or_else(|| Error::InvalidWindow(format!("{subwindow:?} is not a union of partition pieces")))?;
    let c = couple(ensemble, partition, mode, weights)?;
    let window_kernel = intersection_matrix(ensemble, subwindow, mode)?;
    Ok(NaimarkReport {
        gram_error: c.sum.gram_error,
        isometry_error: c.iota.isometry_error,
        factor_error: c.iota.factor_error,
        range_error: c.iota.range_error,
        naimark_discrepancy: naimark_projection_check(&c.big, &c.iota, pieces, window_kernel.entries())?,
    })
}

/// `‖P_w ι Y_big* ψ‖` for each window `w` of a nested family inside the ensemble window,
/// with `Y* ψ = Y^T D ψ` in the weighted inner product.
pub fn projection_decay(
    ensemble: &WeightedPathEnsemble,
    windows: &[(i64, i64)],
    mode: IntersectionMode,
    weights: &WeightedInnerProduct,
    psi: &[f64],
) -> Result<Vec<f64>> {
    if psi.len() != ensemble.len() {
        return Err(Error::DimensionMismatch { expected: ensemble.len(), found: psi.len() });
    }
    let big_window = ensemble.window();
    let d_psi = DVector::from_iterator(psi.len(), psi.iter().zip(weights.masses()).map(|(a, m)| a * m));
    windows
        .iter()
        .map(|&w| {
            let cuts: Vec<i64> = [w.0, w.1].into_iter().filter(|c| *c > big_window.0 && *c < big_window.1).collect();
            let partition = IntervalPartition::from_cuts(big_window, &cuts)?;
            let pieces = partition.cover(w).ok_or_else(|| Error::InvalidWindow(format!("{w:?} outside {big_window:?}")))?;
            let c = couple(ensemble, &partition, mode, weights)?;
            let v = block_projector(&c.iota, &pieces) * &c.iota.matrix * (c.big.y.transpose() * &d_psi);
            Ok(v.norm())
        })
        .collect()
}
