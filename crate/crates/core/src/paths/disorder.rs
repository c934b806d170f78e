//! Quenched Gaussian disorder and the critical-window Gibbs reweighting.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ensemble::WeightedPathEnsemble;
use super::walk::{expected_coincidences, Site};
use crate::error::{domain, Error, Result};
use crate::quad::special::EULER_GAMMA;
use crate::rng::splitmix64;

/// How `θ` is turned into an inverse temperature at horizon `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WindowCalibration {
    /// `β² = κ/log N · (1 + c·θ/log N)`.
    #[default]
    ErdosTaylor,
    /// `e^{β²} − 1 = (1 + (θ + γ)/log N) / R_N` with the exact expected coincidence count
    /// `R_N` of two lazy walks; the `γ` shift converts the renewal parameter into the `θ`
    /// of `j^θ`.
    Renewal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalWindow {
    pub calibration: WindowCalibration,
    pub kappa: f64,
    pub theta_coeff: f64,
}

impl Default for CriticalWindow {
    fn default() -> Self {
        CriticalWindow { calibration: WindowCalibration::ErdosTaylor, kappa: std::f64::consts::PI, theta_coeff: 1.0 }
    }
}

impl CriticalWindow {
    pub fn renewal() -> Self {
        CriticalWindow { calibration: WindowCalibration::Renewal, ..Default::default() }
    }

    pub fn beta_squared(&self, theta: f64, n: u64) -> Result<f64> {
        if n < 2 {
            return domain("the critical window needs N ≥ 2");
        }
        let log_n = (n as f64).ln();
        let b2 = match self.calibration {
            WindowCalibration::ErdosTaylor => self.kappa / log_n * (1.0 + self.theta_coeff * theta / log_n),
            WindowCalibration::Renewal => {
                let sigma2 = (1.0 + self.theta_coeff * (theta + EULER_GAMMA) / log_n) / expected_coincidences(n);
                if sigma2 <= -1.0 {
                    f64::NAN
                } else {
                    sigma2.ln_1p()
                }
            }
        };
        if !(b2 >= 0.0) {
            return domain(format!("θ = {theta} lies below the critical window at N = {n}"));
        }
        Ok(b2)
    }

    pub fn beta(&self, theta: f64, n: u64) -> Result<f64> {
        Ok(self.beta_squared(theta, n)?.sqrt())
    }
}

/// Side of the square tiles in which the disorder is generated.
pub const TILE: i32 = 64;

/// iid standard Gaussian field `ω(u, z)`. Each time slice is cut into `TILE × TILE` tiles,
/// and each tile is filled from its own ChaCha stream keyed by seed, horizon, time and tile
/// index. The horizon is part of the key, so one seed never silently serves two horizons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisorderField {
    pub seed: u64,
    pub horizon: u64,
}

impl DisorderField {
    pub fn new(seed: u64, horizon: u64) -> Self {
        DisorderField { seed, horizon }
    }

    /// Tile containing `z`, and the offset of `z` within it.
    pub fn locate(z: Site) -> ((i32, i32), usize) {
        let (tx, ty) = (z[0].div_euclid(TILE), z[1].div_euclid(TILE));
        let (lx, ly) = (z[0].rem_euclid(TILE), z[1].rem_euclid(TILE));
        ((tx, ty), (ly * TILE + lx) as usize)
    }

    /// Row-major values of tile `(tx, ty)` at time `u`.
    pub fn tile(&self, u: i64, tx: i32, ty: i32) -> Vec<f64> {
        let key = splitmix64(self.seed ^ splitmix64(self.horizon ^ 0xD1B5_4A32_D192_ED03));
        let idx = ((tx as u32 as u64) << 32) | ty as u32 as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(key ^ splitmix64(u as u64 ^ splitmix64(idx))));
        (0..(TILE * TILE)).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    }

    /// Single value; regenerates the whole tile.
    pub fn omega(&self, u: i64, z: Site) -> f64 {
        let ((tx, ty), k) = Self::locate(z);
        self.tile(u, tx, ty)[k]
    }

    /// `Σ_{u ∈ (s, t]} ω(u, X_i(u))` for every path, generating each touched tile once per time.
    pub fn path_sums(&self, ensemble: &WeightedPathEnsemble) -> Vec<f64> {
        let (s, t) = ensemble.window();
        let mut sums = vec![0.0; ensemble.len()];
        let mut tiles: HashMap<(i32, i32), Vec<f64>> = HashMap::new();
        for u in (s + 1)..=t {
            tiles.clear();
            for (i, p) in ensemble.paths().iter().enumerate() {
                let ((tx, ty), k) = Self::locate(p.at(u).expect("path spans window"));
                let tile = tiles.entry((tx, ty)).or_insert_with(|| self.tile(u, tx, ty));
                sums[i] += tile[k];
            }
        }
        sums
    }
}

/// Multiplies each weight by `∏_{u ∈ (s,t]} exp(β ω(u, X(u)) − β²/2)`.
pub fn gibbs_reweight(ensemble: &WeightedPathEnsemble, field: &DisorderField, beta: f64) -> Result<WeightedPathEnsemble> {
    if field.horizon != ensemble.meta.lattice_n {
        return Err(Error::Guard(format!(
            "disorder seeded for horizon {} applied to an ensemble at horizon {}",
            field.horizon, ensemble.meta.lattice_n
        )));
    }
    if !beta.is_finite() || beta < 0.0 {
        return domain("β must be finite and nonnegative");
    }
    let (s, t) = ensemble.window();
    ensemble.check_real_positions(s + 1, t)?;
    let steps = (t - s) as f64;
    let weights: Vec<f64> = if beta == 0.0 {
        ensemble.weights().to_vec()
    } else {
        let sums = field.path_sums(ensemble);
        ensemble.weights().iter().zip(&sums).map(|(w, x)| w * (beta * x - 0.5 * beta * beta * steps).exp()).collect()
    };
    if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
        return Err(Error::Overflow(format!("Gibbs weight {w}")));
    }
    let mut out = ensemble.with_weights(weights)?;
    out.meta.beta = beta;
    out.meta.disorder_seed = Some(field.seed);
    Ok(out)
}

/// Gibbs reweighting at the critical-window temperature for `theta`.
pub fn polymer_gibbs_reweight(
    ensemble: &WeightedPathEnsemble,
    disorder_seed: u64,
    theta: f64,
    n: u64,
    window: &CriticalWindow,
) -> Result<WeightedPathEnsemble> {
    let beta = window.beta(theta, n)?;
    let mut out = gibbs_reweight(ensemble, &DisorderField::new(disorder_seed, n), beta)?;
    out.meta.theta = Some(theta);
    Ok(out)
}
