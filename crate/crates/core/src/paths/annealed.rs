//! Disorder-averaged second moments of critical polymers.
//!
//! Partition functions come from the exact transfer-matrix solver, so the only Monte Carlo
//! error is over disorder replicas (and over polymer path pairs when a GMC tilt is applied).
//! Two estimators of `E[Z²]` are offered. `Direct` averages `Z²`. `Planted` uses
//! `E[Z²] = E[Z] · E_Q[Z]`, where `Q` is the environment size-biased by `Z`: the disorder is
//! raised by `β` along one path drawn from the `β = 0` polymer. Its variance involves the
//! third moment of `Z` instead of the fourth.
//!
//! A GMC of strength `a` over the polymer has second moment
//! `Z² · E_{X,X̃}[e^{a L(X, X̃)}]` for independent polymer paths `X, X̃` drawn from the same
//! environment; the pair average is the off-diagonal U-statistic over sampled paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::disorder::{CriticalWindow, DisorderField};
use super::ensemble::{sample_reference_walks, StartBox, WeightedPathEnsemble};
use super::intersection::{coincidence_pairs, LatticeScale};
use super::polymer::{quenched_polymer, quenched_polymer_planted, PolymerDomain};
use super::walk::LatticePath;
use crate::delta_bose::{moment2_pairing, GaussianProfile, PairedMoment};
use crate::error::{domain, Result};
use crate::rng::SeedStreams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MomentEstimator {
    #[default]
    Planted,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolymerParams {
    /// Lattice horizon `N`.
    pub n: u64,
    pub theta: f64,
    /// Diffusive end time; the polymer runs `round(t·N)` steps.
    pub t: f64,
    /// Polymer paths sampled per replica; only needed for GMC tilts.
    pub paths: usize,
    pub window: CriticalWindow,
    /// Per-coincidence weight of the intersection local time used for GMC tilts.
    pub scale: LatticeScale,
    pub estimator: MomentEstimator,
}

impl PolymerParams {
    pub fn new(n: u64, theta: f64, t: f64, paths: usize) -> Self {
        PolymerParams {
            n,
            theta,
            t,
            paths,
            window: CriticalWindow::default(),
            scale: LatticeScale::default(),
            estimator: MomentEstimator::default(),
        }
    }

    pub fn steps(&self) -> i64 {
        (self.t * self.n as f64).round() as i64
    }

    /// Diffusive time actually simulated.
    pub fn lattice_time(&self) -> f64 {
        self.steps() as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !(self.t > 0.0) || self.steps() < 1 || !self.theta.is_finite() {
            return domain(format!("invalid polymer parameters {self:?}"));
        }
        Ok(())
    }

    /// Box covering the supports of both test functions.
    pub fn domain(&self, g: &GaussianProfile, gp: &GaussianProfile) -> Result<PolymerDomain> {
        self.validate()?;
        PolymerDomain::new(self.n, self.steps(), g.support_radius().max(gp.support_radius()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: usize,
}

impl MomentEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 { samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { f64::NAN };
        MomentEstimate { mean, std_error: (var / n).sqrt(), replicas: samples.len() }
    }
}

/// `E_{i≠j}[e^{tilt·c_ij}]` over an ensemble of equally weighted polymer paths.
pub fn pair_tilt_average(ensemble: &WeightedPathEnsemble, tilt: f64) -> Result<f64> {
    let m = ensemble.len();
    if m < 2 {
        return domain("a pair average needs at least two paths");
    }
    let pairs = coincidence_pairs(ensemble, ensemble.window())?;
    let excess: f64 = pairs.iter().map(|&(_, _, c)| (tilt * c as f64).exp_m1()).sum();
    Ok(1.0 + 2.0 * excess / (m as f64 * (m as f64 - 1.0)))
}

fn unique_betas(params: &PolymerParams, thetas: impl Iterator<Item = f64>) -> Result<(Vec<f64>, Vec<usize>)> {
    let mut betas: Vec<f64> = Vec::new();
    let mut index = Vec::new();
    for theta in thetas {
        let b = params.window.beta(theta, params.n)?;
        let k = match betas.iter().position(|x| *x == b) {
            Some(k) => k,
            None => {
                betas.push(b);
                betas.len() - 1
            }
        };
        index.push(k);
    }
    Ok((betas, index))
}

/// Second-moment samples for each requested `(θ, a)`, sharing disorder across them.
/// Returns `E[Z]` (exact) and `out[k][r]`, replica `r` at `configs[k]`.
pub fn second_moment_samples(
    params: &PolymerParams,
    configs: &[(f64, f64)],
    g: &GaussianProfile,
    gp: &GaussianProfile,
    replicas: usize,
    seed: u64,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let dom = params.domain(g, gp)?;
    let (betas, index) = unique_betas(params, configs.iter().map(|c| c.0))?;
    let tilted = configs.iter().any(|c| c.1 != 0.0);
    if tilted && params.paths < 2 {
        return domain("GMC tilts need at least two polymer paths per replica");
    }
    let factor = params.scale.factor(params.n)?;
    let streams = SeedStreams::new(seed);
    let nb = betas.len();
    let base = quenched_polymer(
        &dom,
        &DisorderField::new(0, params.n),
        &[0.0],
        g,
        gp,
        if params.estimator == MomentEstimator::Planted { replicas * nb } else { 0 },
        streams.derive("planting", 0),
    )?;
    let mean_z = base[0].partition;
    let pool: Vec<LatticePath> = base[0].ensemble.as_ref().map(|e| e.paths().to_vec()).unwrap_or_default();
    let paths = if tilted { params.paths } else { 0 };
    let per_replica = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let field = DisorderField::new(streams.derive("disorder", r as u64), params.n);
            let planted = if pool.is_empty() { &[][..] } else { &pool[r * nb..(r + 1) * nb] };
            let sols =
                quenched_polymer_planted(&dom, &field, &betas, planted, g, gp, paths, streams.derive("sampling", r as u64))?;
            configs
                .iter()
                .zip(&index)
                .map(|(&(_, a), &b)| {
                    let z = sols[b].partition;
                    let moment = if planted.is_empty() { z * z } else { mean_z * z };
                    if a == 0.0 {
                        return Ok(moment);
                    }
                    let ens = sols[b].ensemble.as_ref().expect("paths were sampled");
                    Ok(moment * pair_tilt_average(ens, a * factor)?)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((mean_z, (0..configs.len()).map(|k| per_replica.iter().map(|row| row[k]).collect()).collect()))
}

/// Exact `E[Z]` and direct quenched samples `Z_r` at each `θ`.
pub fn partition_samples(
    params: &PolymerParams,
    thetas: &[f64],
    g: &GaussianProfile,
    gp: &GaussianProfile,
    replicas: usize,
    seed: u64,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let dom = params.domain(g, gp)?;
    let (betas, index) = unique_betas(params, thetas.iter().copied())?;
    let streams = SeedStreams::new(seed);
    let mean_z = quenched_polymer(&dom, &DisorderField::new(0, params.n), &[0.0], g, gp, 0, 0)?[0].partition;
    let per_replica = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let field = DisorderField::new(streams.derive("disorder", r as u64), params.n);
            let sols = quenched_polymer(&dom, &field, &betas, g, gp, 0, 0)?;
            Ok(index.iter().map(|&b| sols[b].partition).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((mean_z, (0..thetas.len()).map(|k| per_replica.iter().map(|row| row[k]).collect()).collect()))
}

/// Monte Carlo `E[Z(g, g')²]` against `⟨g^{⊗2}, sg^{[2],θ}(t) g'^{⊗2}⟩`.
pub fn annealed_second_moment_trial(
    params: &PolymerParams,
    g: &GaussianProfile,
    gp: &GaussianProfile,
    replicas: usize,
    seed: u64,
) -> Result<(MomentEstimate, PairedMoment)> {
    if replicas < 2 {
        return domain("at least two replicas are needed for an error bar");
    }
    let (_, samples) = second_moment_samples(params, &[(params.theta, 0.0)], g, gp, replicas, seed)?;
    let analytic = moment2_pairing(params.theta, params.lattice_time(), g, gp, 1e-6)?;
    Ok((MomentEstimate::from_samples(&samples[0]), analytic))
}

/// Reference-walk diagnostic: the disorder is integrated out exactly on pairs of flat-start
/// walks, `E_ω[W_i W_j] = w_i w_j e^{β² c_ij}`. Heavy-tailed at large `N`.
#[derive(Debug, Clone)]
pub struct ReferencePairs {
    pub ensemble: WeightedPathEnsemble,
    /// `g(x_i(0)) g'(x_i(T))`.
    pub test_values: Vec<f64>,
    pub pairs: Vec<(u32, u32, u32)>,
}

impl ReferencePairs {
    pub fn sample(params: &PolymerParams, g: &GaussianProfile, gp: &GaussianProfile, walks: usize, seed: u64) -> Result<Self> {
        params.validate()?;
        if walks < 2 {
            return domain("at least two reference walks are needed");
        }
        let steps = params.steps();
        let start_box = StartBox::centered(g.support_radius(), params.n)?;
        let ensemble = sample_reference_walks(walks, (0, steps), params.n, start_box, seed)?;
        let test_values = (0..ensemble.len())
            .map(|i| {
                let x0 = ensemble.position(i, 0).expect("in window");
                let x1 = ensemble.position(i, steps).expect("in window");
                g.eval(x0) * gp.eval(x1)
            })
            .collect();
        let pairs = coincidence_pairs(&ensemble, (0, steps))?;
        Ok(ReferencePairs { ensemble, test_values, pairs })
    }

    /// Off-diagonal U-statistic of `Σ_{i≠j} w_i w_j f_i f_j e^{(β² + tilt) c_ij}`.
    pub fn annealed_second_moment(&self, beta: f64, tilt: f64) -> f64 {
        let wf: Vec<f64> = self.ensemble.weights().iter().zip(&self.test_values).map(|(a, b)| a * b).collect();
        let sum: f64 = wf.iter().sum();
        let sq: f64 = wf.iter().map(|x| x * x).sum();
        let mut total = sum * sum - sq;
        for &(i, j, c) in &self.pairs {
            total += 2.0 * wf[i as usize] * wf[j as usize] * ((beta * beta + tilt) * c as f64).exp_m1();
        }
        let m = self.ensemble.len() as f64;
        total / (1.0 - 1.0 / m)
    }
}
