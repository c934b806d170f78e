//! Pairwise intersection local times over a time window `(s, t]`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ensemble::{spatial_scale, WeightedPathEnsemble};
use super::walk::expected_coincidences;
use crate::error::{domain, Error, Result};

/// Per-coincidence weight in lattice mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeScale {
    /// `π / log N`: the expected coincidence count of two walks is about one.
    #[default]
    ErdosTaylor,
    /// `π / (log N)²`: the lattice limit of the `ε²|log ε|²` normalization with `ε² ≈ 4/(πN)`.
    Continuum,
    /// `1 / ((R_N + 1) log N)` with the exact expected coincidence count `R_N`. Under the
    /// renewal window `e^{β²} ≈ 1 + 1/R_N`, so a tilt of `a` times this per coincidence moves
    /// `e^{β²} − 1` by `a/(R_N log N)`, which is a shift `θ → θ + a`.
    Renewal,
}

impl LatticeScale {
    pub fn factor(&self, n: u64) -> Result<f64> {
        if n < 2 {
            return domain("lattice normalization needs N ≥ 2");
        }
        let log_n = (n as f64).ln();
        Ok(match self {
            LatticeScale::ErdosTaylor => std::f64::consts::PI / log_n,
            LatticeScale::Continuum => std::f64::consts::PI / (log_n * log_n),
            LatticeScale::Renewal => 1.0 / ((expected_coincidences(n) + 1.0) * log_n),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IntersectionMode {
    Lattice(LatticeScale),
    /// Indicator of `|x − x̃| ≤ ε` in diffusive units.
    Epsilon(f64),
}

impl Default for IntersectionMode {
    fn default() -> Self {
        IntersectionMode::Lattice(LatticeScale::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionMatrix {
    entries: DMatrix<f64>,
    counts: Option<DMatrix<u64>>,
    window: (i64, i64),
    normalization: f64,
}

impl IntersectionMatrix {
    /// Wraps an arbitrary kernel matrix; checked for symmetry and nonnegativity.
    pub fn from_entries(entries: DMatrix<f64>, window: (i64, i64)) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: entries.ncols() });
        }
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = entries[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return domain(format!("kernel entry ({i}, {j}) = {v}"));
                }
                asym = asym.max((v - entries[(j, i)]).abs());
            }
        }
        if asym > 0.0 {
            return Err(Error::Asymmetric(asym));
        }
        Ok(IntersectionMatrix { entries, counts: None, window, normalization: 1.0 })
    }

    fn from_counts(counts: DMatrix<u64>, window: (i64, i64), normalization: f64) -> Self {
        let entries = counts.map(|c| c as f64 * normalization);
        IntersectionMatrix { entries, counts: Some(counts), window, normalization }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Raw coincidence counts, when the matrix came from an ensemble.
    pub fn counts(&self) -> Option<&DMatrix<u64>> {
        self.counts.as_ref()
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }
}

/// `L_ij` over times `u ∈ (s, t]`. The diagonal counts every time in the window.
pub fn intersection_matrix(ensemble: &WeightedPathEnsemble, window: (i64, i64), mode: IntersectionMode) -> Result<IntersectionMatrix> {
    let (es, et) = ensemble.window();
    let (s, t) = window;
    if s < es || t > et || t < s {
        return Err(Error::InvalidWindow(format!("({s}, {t}] not inside ({es}, {et}]")));
    }
    ensemble.check_real_positions(s + 1, t)?;
    let n_lat = ensemble.meta.lattice_n;
    let m = ensemble.len();
    let mut counts = DMatrix::<u64>::zeros(m, m);
    for i in 0..m {
        counts[(i, i)] = (t - s) as u64;
    }
    let normalization = match mode {
        IntersectionMode::Lattice(scale) => {
            let norm = scale.factor(n_lat)?;
            let mut keyed: Vec<(u64, u32)> = Vec::with_capacity(m);
            for u in (s + 1)..=t {
                keyed.clear();
                for (i, p) in ensemble.paths().iter().enumerate() {
                    let z = p.at(u).expect("path spans window");
                    keyed.push((((z[0] as u32 as u64) << 32) | z[1] as u32 as u64, i as u32));
                }
                keyed.sort_unstable();
                let mut a = 0;
                while a < keyed.len() {
                    let mut b = a + 1;
                    while b < keyed.len() && keyed[b].0 == keyed[a].0 {
                        b += 1;
                    }
                    for x in a..b {
                        for y in (x + 1)..b {
                            let (i, j) = (keyed[x].1 as usize, keyed[y].1 as usize);
                            counts[(i, j)] += 1;
                            counts[(j, i)] += 1;
                        }
                    }
                    a = b;
                }
            }
            norm
        }
        IntersectionMode::Epsilon(eps) => {
            if !(eps > 0.0) || eps >= 1.0 {
                return domain(format!("ε = {eps} must lie in (0, 1)"));
            }
            let radius = eps / spatial_scale(n_lat);
            let r2 = radius * radius;
            let cell = radius.ceil().max(1.0) as i64;
            let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
            for u in (s + 1)..=t {
                grid.clear();
                let pos: Vec<[i32; 2]> = ensemble.paths().iter().map(|p| p.at(u).expect("path spans window")).collect();
                for (i, z) in pos.iter().enumerate() {
                    grid.entry(((z[0] as i64).div_euclid(cell), (z[1] as i64).div_euclid(cell))).or_default().push(i);
                }
                for (i, z) in pos.iter().enumerate() {
                    let (cx, cy) = ((z[0] as i64).div_euclid(cell), (z[1] as i64).div_euclid(cell));
                    for dx in -1..=1 {
                        for dy in -1..=1 {
                            if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                                for &j in bucket {
                                    if j <= i {
                                        continue;
                                    }
                                    let ex = (pos[j][0] - z[0]) as f64;
                                    let ey = (pos[j][1] - z[1]) as f64;
                                    if ex * ex + ey * ey <= r2 {
                                        counts[(i, j)] += 1;
                                        counts[(j, i)] += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let le = eps.ln();
            1.0 / (n_lat as f64 * eps * eps * le * le)
        }
    };
    Ok(IntersectionMatrix::from_counts(counts, window, normalization))
}

/// Off-diagonal coincidence counts `(i, j, #{u ∈ (s, t] : X_i(u) = X_j(u)})` with `i < j`,
/// listing only pairs that meet.
pub fn coincidence_pairs(ensemble: &WeightedPathEnsemble, window: (i64, i64)) -> Result<Vec<(u32, u32, u32)>> {
    let (es, et) = ensemble.window();
    let (s, t) = window;
    if s < es || t > et || t < s {
        return Err(Error::InvalidWindow(format!("({s}, {t}] not inside ({es}, {et}]")));
    }
    ensemble.check_real_positions(s + 1, t)?;
    let mut tally: HashMap<(u32, u32), u32> = HashMap::new();
    let mut keyed: Vec<(u64, u32)> = Vec::with_capacity(ensemble.len());
    for u in (s + 1)..=t {
        keyed.clear();
        for (i, p) in ensemble.paths().iter().enumerate() {
            let z = p.at(u).expect("path spans window");
            keyed.push((((z[0] as u32 as u64) << 32) | z[1] as u32 as u64, i as u32));
        }
        keyed.sort_unstable();
        let mut a = 0;
        while a < keyed.len() {
            let mut b = a + 1;
            while b < keyed.len() && keyed[b].0 == keyed[a].0 {
                b += 1;
            }
            for x in a..b {
                for y in (x + 1)..b {
                    let (i, j) = (keyed[x].1, keyed[y].1);
                    *tally.entry((i.min(j), i.max(j))).or_default() += 1;
                }
            }
            a = b;
        }
    }
    let mut out: Vec<(u32, u32, u32)> = tally.into_iter().map(|((i, j), c)| (i, j, c)).collect();
    out.sort_unstable();
    Ok(out)
}
