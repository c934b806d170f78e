//! Direct sums of piece factors and the coupling isometry `ι` with `Y_big = Y_sum ι`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gmc::{max_abs_diff, partial_isometry, range_projector, FactorMap, GaussianDraw, GRAM_TOLERANCE};

/// `Y_sum = [Y_1 | … | Y_k]`: piece coefficients side by side, one row per path.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSumFactor {
    pub map: FactorMap,
    /// Columns of `map` belonging to each piece.
    pub blocks: Vec<Range<usize>>,
    /// `max |Y_sum Y_sum* − K_big|`.
    pub gram_error: f64,
}

impl DirectSumFactor {
    pub fn block(&self, k: usize) -> FactorMap {
        let r = &self.blocks[k];
        FactorMap::new(self.map.y.columns(r.start, r.len()).into_owned())
    }

    pub fn dim(&self) -> usize {
        self.map.rank()
    }
}

/// Stacks the piece factors and checks that their Grams add up to `big_kernel`.
pub fn direct_sum_factor(pieces: &[FactorMap], big_kernel: &DMatrix<f64>) -> Result<DirectSumFactor> {
    let n = big_kernel.nrows();
    if let Some(p) = pieces.iter().find(|p| p.paths() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: p.paths() });
    }
    let dim: usize = pieces.iter().map(|p| p.rank()).sum();
    let mut y = DMatrix::zeros(n, dim);
    let mut blocks = Vec::with_capacity(pieces.len());
    let mut at = 0;
    for p in pieces {
        y.columns_mut(at, p.rank()).copy_from(&p.y);
        blocks.push(at..at + p.rank());
        at += p.rank();
    }
    let map = FactorMap::new(y);
    let gram_error = max_abs_diff(&map.kernel(), big_kernel);
    let scale = big_kernel.amax().max(1.0);
    if gram_error > GRAM_TOLERANCE * scale {
        return Err(Error::Additivity(format!("piece Grams miss the big kernel by {gram_error:e}")));
    }
    Ok(DirectSumFactor { map, blocks, gram_error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingIsometry {
    /// `ι`, from big coefficients to the direct sum of piece coefficients.
    pub matrix: DMatrix<f64>,
    pub blocks: Vec<Range<usize>>,
    /// `max |ι*ι − P|`, `P` the projector onto `null(Y_big)^⊥`.
    pub isometry_error: f64,
    /// `max |Y_big − Y_sum ι|`.
    pub factor_error: f64,
    /// Largest component of `ι`'s range outside `⊕ null(Y_k)^⊥`.
    pub range_error: f64,
}

impl CouplingIsometry {
    /// Rows of `ι` for piece `k`.
    pub fn block(&self, k: usize) -> DMatrix<f64> {
        let r = &self.blocks[k];
        self.matrix.rows(r.start, r.len()).into_owned()
    }

    pub fn domain_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn coupling_isometry(big: &FactorMap, sum: &DirectSumFactor) -> Result<CouplingIsometry> {
    let matrix = partial_isometry(big, &sum.map)?;
    let p = range_projector(&big.y.transpose());
    let isometry_error = max_abs_diff(&(matrix.transpose() * &matrix), &p);
    let factor_error = max_abs_diff(&big.y, &(&sum.map.y * &matrix));
    let mut range_error: f64 = 0.0;
    for (k, r) in sum.blocks.iter().enumerate() {
        let yk = sum.block(k).y;
        let rows = matrix.rows(r.start, r.len()).into_owned();
        range_error = range_error.max(max_abs_diff(&(range_projector(&yk.transpose()) * &rows), &rows));
    }
    Ok(CouplingIsometry { matrix, blocks: sum.blocks.clone(), isometry_error, factor_error, range_error })
}

/// `ξ_big = ι* (ξ_1 ⊕ … ⊕ ξ_k)`: the big-window draw read off independent piece draws.
pub fn coupled_noise(piece_draws: &[GaussianDraw], iota: &CouplingIsometry) -> Result<GaussianDraw> {
    if piece_draws.len() != iota.blocks.len() {
        return Err(Error::DimensionMismatch { expected: iota.blocks.len(), found: piece_draws.len() });
    }
    let strength = piece_draws.first().map_or(0.0, |d| d.strength);
    let mut stacked = Vec::with_capacity(iota.codomain_dim());
    for (d, r) in piece_draws.iter().zip(&iota.blocks) {
        if d.len() != r.len() {
            return Err(Error::DimensionMismatch { expected: r.len(), found: d.len() });
        }
        if d.strength != strength {
            return Err(Error::Guard("piece draws carry different strengths".into()));
        }
        stacked.extend_from_slice(&d.components);
    }
    let xi = iota.matrix.transpose() * DVector::from_vec(stacked);
    GaussianDraw::new(strength, xi.as_slice().to_vec())
}

/// `max |ι_fine − (⊕_k ι_k) ι_coarse|` where `ι_k` couples coarse piece `k` to its fine pieces.
/// `fine[k]` lists the fine piece factors inside coarse piece `k`.
pub fn refinement_consistency(big: &FactorMap, coarse: &[FactorMap], fine: &[Vec<FactorMap>]) -> Result<f64> {
    if coarse.len() != fine.len() {
        return Err(Error::DimensionMismatch { expected: coarse.len(), found: fine.len() });
    }
    let big_kernel = big.kernel();
    let coarse_sum = direct_sum_factor(coarse, &big_kernel)?;
    let iota_coarse = coupling_isometry(big, &coarse_sum)?;
    let all_fine: Vec<FactorMap> = fine.iter().flatten().cloned().collect();
    let iota_fine = coupling_isometry(big, &direct_sum_factor(&all_fine, &big_kernel)?)?;

    let mut block = DMatrix::zeros(iota_fine.codomain_dim(), iota_coarse.codomain_dim());
    let mut row = 0;
    for (k, (c, f)) in coarse.iter().zip(fine).enumerate() {
        let iota_k = coupling_isometry(c, &direct_sum_factor(f, &c.kernel())?)?;
        let col = coarse_sum.blocks[k].start;
        block.view_mut((row, col), (iota_k.codomain_dim(), iota_k.domain_dim())).copy_from(&iota_k.matrix);
        row += iota_k.codomain_dim();
    }
    Ok(max_abs_diff(&iota_fine.matrix, &(block * &iota_coarse.matrix)))
}
