//! Internally disjoint windows covering a big window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmc::{spectral_factorize, SpectralFactor, WeightedInnerProduct};
use crate::paths::{intersection_matrix, IntersectionMode, WeightedPathEnsemble};

/// Consecutive windows `(s_0, s_1], (s_1, s_2], …` with `s_0 = s`, last end `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalPartition {
    big_window: (i64, i64),
    pieces: Vec<(i64, i64)>,
}

impl IntervalPartition {
    pub fn new(big_window: (i64, i64), mut pieces: Vec<(i64, i64)>) -> Result<Self> {
        if big_window.1 <= big_window.0 {
            return Err(Error::InvalidWindow(format!("{big_window:?}")));
        }
        if pieces.is_empty() {
            return Err(Error::InvalidWindow("a partition needs at least one piece".into()));
        }
        pieces.sort();
        let mut at = big_window.0;
        for &(s, t) in &pieces {
            if s != at || t <= s {
                return Err(Error::InvalidWindow(format!(
                    "pieces {pieces:?} are not internally disjoint windows covering {big_window:?}"
                )));
            }
            at = t;
        }
        if at != big_window.1 {
            return Err(Error::InvalidWindow(format!("pieces {pieces:?} do not cover {big_window:?}")));
        }
        Ok(IntervalPartition { big_window, pieces })
    }

    /// Cut points `s < c_1 < … < t`.
    pub fn from_cuts(big_window: (i64, i64), cuts: &[i64]) -> Result<Self> {
        let mut points = vec![big_window.0];
        points.extend_from_slice(cuts);
        points.push(big_window.1);
        IntervalPartition::new(big_window, points.windows(2).map(|w| (w[0], w[1])).collect())
    }

    /// `2^levels` equal pieces; the window length must be divisible.
    pub fn dyadic(big_window: (i64, i64), levels: u32) -> Result<Self> {
        let k = 1i64 << levels;
        let len = big_window.1 - big_window.0;
        if len <= 0 || len % k != 0 {
            return Err(Error::InvalidWindow(format!("{big_window:?} cannot be split into {k} equal pieces")));
        }
        let h = len / k;
        IntervalPartition::new(big_window, (0..k).map(|i| (big_window.0 + i * h, big_window.0 + (i + 1) * h)).collect())
    }

    pub fn big_window(&self) -> (i64, i64) {
        self.big_window
    }

    pub fn pieces(&self) -> &[(i64, i64)] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Indices of the consecutive pieces whose union is `window`, if any.
    pub fn cover(&self, window: (i64, i64)) -> Option<std::ops::Range<usize>> {
        let a = self.pieces.iter().position(|p| p.0 == window.0)?;
        let b = self.pieces.iter().position(|p| p.1 == window.1)?;
        (a <= b).then_some(a..b + 1)
    }

    /// For each piece of `self`, the range of pieces of `fine` inside it.
    pub fn refined_by(&self, fine: &IntervalPartition) -> Result<Vec<std::ops::Range<usize>>> {
        if fine.big_window != self.big_window {
            return Err(Error::InvalidWindow("partitions of different windows".into()));
        }
        self.pieces
            .iter()
            .map(|&p| fine.cover(p).ok_or_else(|| Error::InvalidWindow(format!("piece {p:?} is not a union of fine pieces"))))
            .collect()
    }
}

/// Standard factor of each piece's intersection operator on the big ensemble.
pub fn piece_factors(
    ensemble: &WeightedPathEnsemble,
    partition: &IntervalPartition,
    mode: IntersectionMode,
    weights: &WeightedInnerProduct,
) -> Result<Vec<SpectralFactor>> {
    partition.pieces().iter().map(|&w| spectral_factorize(&intersection_matrix(ensemble, w, mode)?, weights)).collect()
}
