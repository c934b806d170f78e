//! Spectral factorization of an intersection kernel in a weighted inner product.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::paths::{IntersectionMatrix, WeightedPathEnsemble};

/// Relative threshold below which eigenvalues are treated as zero.
pub const EIGEN_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedInnerProduct {
    masses: Vec<f64>,
}

impl WeightedInnerProduct {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return domain(format!("inner-product mass {m} is not positive"));
        }
        Ok(WeightedInnerProduct { masses })
    }

    pub fn uniform(n: usize) -> Self {
        WeightedInnerProduct { masses: vec![1.0; n] }
    }

    /// Localized masses `w_i e^{−|x_i(s)|}` of an ensemble.
    pub fn localized(ensemble: &WeightedPathEnsemble) -> Result<Self> {
        WeightedInnerProduct::new(ensemble.localized_masses())
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.masses.iter().zip(a).zip(b).map(|((m, x), y)| m * x * y).sum()
    }
}

/// A factor map `Y`: column `j` is the function `Y e_j` on the ensemble's paths.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMap {
    pub y: DMatrix<f64>,
}

impl FactorMap {
    pub fn new(y: DMatrix<f64>) -> Self {
        FactorMap { y }
    }

    pub fn paths(&self) -> usize {
        self.y.nrows()
    }

    pub fn rank(&self) -> usize {
        self.y.ncols()
    }

    /// `Σ_j (Y e_j)(Y e_j)^T`, the kernel matrix of `Y Y*`.
    pub fn kernel(&self) -> DMatrix<f64> {
        &self.y * self.y.transpose()
    }

    /// `Σ_j (Y e_j)(i)²` for each path.
    pub fn row_norms2(&self) -> Vec<f64> {
        self.y.row_iter().map(|r| r.norm_squared()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFactor {
    /// Nonzero eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k][i] = φ_k(i)`, orthonormal in the weighted inner product.
    pub eigenvectors: Vec<Vec<f64>>,
    pub weighted_product: WeightedInnerProduct,
}

impl SpectralFactor {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn paths(&self) -> usize {
        self.weighted_product.len()
    }

    /// `Y e_k = √λ_k φ_k`.
    pub fn factor_map(&self) -> FactorMap {
        let n = self.paths();
        let k = self.rank();
        FactorMap::new(DMatrix::from_fn(n, k, |i, j| self.eigenvalues[j].sqrt() * self.eigenvectors[j][i]))
    }

    /// `Σ_k λ_k φ_k φ_k^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.factor_map().kernel()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_symmetric(k: &DMatrix<f64>) -> Result<f64> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: k.ncols() });
    }
    let scale = k.amax().max(f64::MIN_POSITIVE);
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((k[(i, j)] - k[(j, i)]).abs());
        }
    }
    if asym > 1e-12 * scale {
        return Err(Error::Asymmetric(asym));
    }
    Ok(scale)
}

/// Eigenpairs of `(Qψ)_i = Σ_j μ_j K_ij ψ_j` through the symmetric matrix `D^{1/2} K D^{1/2}`.
pub fn spectral_factorize_matrix(kernel: &DMatrix<f64>, weights: &WeightedInnerProduct) -> Result<SpectralFactor> {
    let n = kernel.nrows();
    check_symmetric(kernel)?;
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
    }
    let sq: Vec<f64> = weights.masses().iter().map(|m| m.sqrt()).collect();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let v = sq[i] * kernel[(i, j)] * sq[j];
        if i <= j {
            v
        } else {
            sq[j] * kernel[(j, i)] * sq[i]
        }
    });
    if n == 0 {
        return Ok(SpectralFactor { eigenvalues: vec![], eigenvectors: vec![], weighted_product: weights.clone() });
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
    let largest = eig.eigenvalues[order[0]].max(0.0);
    let threshold = EIGEN_CLAMP * largest;
    let smallest = eig.eigenvalues[order[n - 1]];
    if smallest < -threshold {
        return Err(Error::NotPositive { eigenvalue: smallest, largest });
    }
    let mut eigenvalues = Vec::new();
    let mut eigenvectors = Vec::new();
    for &k in &order {
        let lambda = eig.eigenvalues[k];
        if lambda <= threshold || largest == 0.0 {
            break;
        }
        let v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        // Fix the sign so the largest-magnitude entry is positive.
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() + 1e-12 { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        eigenvalues.push(lambda);
        eigenvectors.push((0..n).map(|i| sign * v[i] / sq[i]).collect());
    }
    Ok(SpectralFactor { eigenvalues, eigenvectors, weighted_product: weights.clone() })
}

pub fn spectral_factorize(kernel: &IntersectionMatrix, weights: &WeightedInnerProduct) -> Result<SpectralFactor> {
    spectral_factorize_matrix(kernel.entries(), weights)
}
