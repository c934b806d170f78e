//! Weighted path ensembles: finite stand-ins for path measures on a time window.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::walk::{LatticePath, Site};
use crate::error::{domain, Error, Result};
use crate::rng::SeedStreams;

/// Inclusive lattice rectangle of start sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartBox {
    pub x: (i32, i32),
    pub y: (i32, i32),
}

impl StartBox {
    pub fn new(x: (i32, i32), y: (i32, i32)) -> Result<Self> {
        if x.0 > x.1 || y.0 > y.1 {
            return domain("empty start box");
        }
        Ok(StartBox { x, y })
    }

    /// Lattice box covering `[−half, half]²` in diffusive units at horizon `n`.
    pub fn centered(half: f64, n: u64) -> Result<Self> {
        if !(half >= 0.0) {
            return domain("box half-width must be nonnegative");
        }
        let h = (half / spatial_scale(n)).floor() as i32;
        StartBox::new((-h, h), (-h, h))
    }

    pub fn sites(&self) -> u64 {
        (self.x.1 - self.x.0 + 1) as u64 * (self.y.1 - self.y.0 + 1) as u64
    }

    /// Lebesgue area in diffusive units: one site covers `4/N`.
    pub fn area(&self, n: u64) -> f64 {
        self.sites() as f64 * cell_area(n)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Site {
        [rng.random_range(self.x.0..=self.x.1), rng.random_range(self.y.0..=self.y.1)]
    }
}

/// Diffusive position of lattice site `z` at horizon `n`: `x = 2z/√N`, so the lazy walk
/// run for `N` steps has unit variance per coordinate.
pub fn spatial_scale(n: u64) -> f64 {
    2.0 / (n as f64).sqrt()
}

pub fn cell_area(n: u64) -> f64 {
    4.0 / n as f64
}

pub fn to_continuum(z: Site, n: u64) -> [f64; 2] {
    let c = spatial_scale(n);
    [z[0] as f64 * c, z[1] as f64 * c]
}

/// Normalization record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    /// Lattice horizon `N`: `N` steps correspond to unit diffusive time.
    pub lattice_n: u64,
    /// Inverse temperature of the last Gibbs reweighting (0 for reference ensembles).
    pub beta: f64,
    pub theta: Option<f64>,
    pub disorder_seed: Option<u64>,
    /// Rate `c` of the localization weight `exp(−c|x(s)|)` used for the localized masses.
    pub localization_rate: f64,
    /// Time ranges (exclusive ends) whose positions are placeholders from weight-only bridging.
    pub placeholder: Vec<(i64, i64)>,
    /// `(left, right)` indices after a concatenation.
    pub parents: Option<Vec<(u32, u32)>>,
}

impl EnsembleMeta {
    pub fn reference(lattice_n: u64) -> Self {
        EnsembleMeta {
            lattice_n,
            beta: 0.0,
            theta: None,
            disorder_seed: None,
            localization_rate: 1.0,
            placeholder: Vec::new(),
            parents: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPathEnsemble {
    paths: Vec<LatticePath>,
    weights: Vec<f64>,
    window: (i64, i64),
    pub meta: EnsembleMeta,
}

impl WeightedPathEnsemble {
    pub fn new(paths: Vec<LatticePath>, weights: Vec<f64>, window: (i64, i64), meta: EnsembleMeta) -> Result<Self> {
        if paths.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: paths.len(), found: weights.len() });
        }
        if window.1 < window.0 {
            return Err(Error::InvalidWindow(format!("({}, {})", window.0, window.1)));
        }
        if meta.lattice_n == 0 {
            return domain("lattice horizon must be positive");
        }
        for (k, p) in paths.iter().enumerate() {
            if p.start_time() != window.0 || p.end_time() != window.1 {
                return Err(Error::InvalidWindow(format!("path {k} does not span ({}, {})", window.0, window.1)));
            }
        }
        for &w in &weights {
            if !(w >= 0.0) || !w.is_finite() {
                return domain(format!("weight {w} is not a finite nonnegative number"));
            }
        }
        Ok(WeightedPathEnsemble { paths, weights, window, meta })
    }

    pub(crate) fn new_unchecked(paths: Vec<LatticePath>, weights: Vec<f64>, window: (i64, i64), meta: EnsembleMeta) -> Self {
        WeightedPathEnsemble { paths, weights, window, meta }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[LatticePath] {
        &self.paths
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        WeightedPathEnsemble::new(self.paths.clone(), weights, self.window, self.meta.clone())
    }

    /// Diffusive position of path `i` at absolute time `u`.
    pub fn position(&self, i: usize, u: i64) -> Option<[f64; 2]> {
        self.paths[i].at(u).map(|z| to_continuum(z, self.meta.lattice_n))
    }

    /// `w_i · exp(−c|x_i(s)|)`, the masses used for the weighted inner product.
    pub fn localized_masses(&self) -> Vec<f64> {
        let c = self.meta.localization_rate;
        (0..self.len())
            .map(|i| {
                let x = self.position(i, self.window.0).unwrap_or([0.0, 0.0]);
                self.weights[i] * (-c * x[0].hypot(x[1])).exp()
            })
            .collect()
    }

    /// Errors if any time in `[s, t]` carries a placeholder position.
    pub(crate) fn check_real_positions(&self, s: i64, t: i64) -> Result<()> {
        for &(a, b) in &self.meta.placeholder {
            if (a + 1).max(s) <= (b - 1).min(t) {
                return Err(Error::InvalidWindow(format!("times in ({a}, {b}) only carry bridge placeholders")));
            }
        }
        Ok(())
    }

    /// Restriction of every path to `[s, t]`, weights unchanged.
    pub fn restrict(&self, s: i64, t: i64) -> Result<Self> {
        let paths = self.paths.iter().map(|p| p.restrict(s, t)).collect::<Result<Vec<_>>>()?;
        let mut meta = self.meta.clone();
        meta.placeholder.retain(|&(a, b)| (a + 1).max(s) <= (b - 1).min(t));
        Ok(WeightedPathEnsemble::new_unchecked(paths, self.weights.clone(), (s, t), meta))
    }
}

/// `count` lazy walks over `window` with uniform starts in `start_box`, each carrying
/// weight `area/count` so the ensemble estimates the flat-start Wiener measure.
pub fn sample_reference_walks(count: usize, window: (i64, i64), n: u64, start_box: StartBox, seed: u64) -> Result<WeightedPathEnsemble> {
    if count == 0 {
        return domain("count must be at least 1");
    }
    if window.1 < window.0 {
        return Err(Error::InvalidWindow(format!("({}, {})", window.0, window.1)));
    }
    if n == 0 {
        return domain("lattice horizon must be positive");
    }
    let steps = (window.1 - window.0) as usize;
    let mut rng = SeedStreams::new(seed).stream("sampling", 0);
    let paths: Vec<LatticePath> = (0..count)
        .map(|_| {
            let start = start_box.sample(&mut rng);
            LatticePath::sample(&mut rng, window.0, start, steps)
        })
        .collect();
    let w = start_box.area(n) / count as f64;
    Ok(WeightedPathEnsemble::new_unchecked(paths, vec![w; count], window, EnsembleMeta::reference(n)))
}

/// Unaggregated pushforward under the restriction to finitely many times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub times: Vec<i64>,
    /// `points[i][k]` is atom `i` at `times[k]`.
    pub points: Vec<Vec<Site>>,
    pub weights: Vec<f64>,
}

impl PointConfiguration {
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn marginal(ensemble: &WeightedPathEnsemble, times: &[i64]) -> Result<PointConfiguration> {
    let (s, t) = ensemble.window();
    for &u in times {
        if u < s || u > t {
            return Err(Error::InvalidWindow(format!("time {u} outside [{s}, {t}]")));
        }
        ensemble.check_real_positions(u, u)?;
    }
    let points = ensemble
        .paths()
        .iter()
        .map(|p| times.iter().map(|&u| p.at(u).expect("time checked")).collect())
        .collect();
    Ok(PointConfiguration { times: times.to_vec(), points, weights: ensemble.weights().to_vec() })
}
