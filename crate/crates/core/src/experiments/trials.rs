use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::report::{digest, TrialReport, Verdict};
use crate::delta_bose::{moment2_pairing, variance_functionals, GaussianProfile};
use crate::error::{domain, Result};
use crate::gmc::{gmc_flow, kahane_weights, spectral_factorize, validate_grid, FactorMap, GaussianDraw, WeightedInnerProduct};
use crate::paths::{quenched_overlap, second_moment_samples, DisorderField, IntersectionMatrix, MomentEstimate, PolymerParams, WeightedPathEnsemble};
use crate::rng::SeedStreams;

/// Accepted band for MC/analytic second-moment ratios through the critical polymer.
pub const MOMENT_BAND: (f64, f64) = (0.75, 1.3);

fn factor_of(ensemble: &WeightedPathEnsemble, kernel: &IntersectionMatrix) -> Result<FactorMap> {
    if kernel.entries().nrows() != ensemble.len() {
        return domain(format!("kernel of size {} for {} paths", kernel.entries().nrows(), ensemble.len()));
    }
    let w = WeightedInnerProduct::localized(ensemble)?;
    Ok(spectral_factorize(kernel, &w)?.factor_map())
}

fn check_f(ensemble: &WeightedPathEnsemble, f: &[f64]) -> Result<f64> {
    if f.len() != ensemble.len() {
        return domain(format!("test function has {} values for {} paths", f.len(), ensemble.len()));
    }
    if f.iter().any(|x| !(*x >= 0.0)) {
        return domain("test functions must be nonnegative");
    }
    Ok(ensemble.weights().iter().zip(f).map(|(w, x)| w * x).sum())
}

#[derive(Serialize)]
struct GmcInputs<'a> {
    weights: &'a [f64],
    kernel: Vec<f64>,
    strength: &'a [f64],
    f: &'a [f64],
    draws: usize,
}

/// Counts GMC draws with `M f ≤ 0`.
pub fn positivity_trial(
    ensemble: &WeightedPathEnsemble,
    kernel: &IntersectionMatrix,
    a: f64,
    f: &[f64],
    draws: usize,
    seed: u64,
) -> Result<TrialReport> {
    let mass = check_f(ensemble, f)?;
    if !(mass > 0.0) {
        return domain("μ f = 0: the positivity trial would be vacuous");
    }
    if draws == 0 {
        return domain("at least one draw");
    }
    let y = factor_of(ensemble, kernel)?;
    let streams = SeedStreams::new(seed);
    let base = ensemble.weights();
    let failures = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream("gmc", i);
            let draw = GaussianDraw::sample(a, y.rank(), &mut rng)?;
            let m = kahane_weights(base, &y, &draw)?.pair(f);
            Ok(usize::from(!(m > 0.0)))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    let inputs = GmcInputs { weights: base, kernel: kernel.entries().as_slice().to_vec(), strength: &[a], f, draws };
    Ok(TrialReport {
        name: "positivity".into(),
        inputs_digest: digest(&inputs)?,
        samples: draws,
        statistic: failures as f64,
        standard_error: 0.0,
        verdict: if failures == 0 { Verdict::Pass } else { Verdict::Fail },
        seed,
        diagnostics: BTreeMap::from([("mu_f".to_string(), mass), ("strength".to_string(), a)]),
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope and its standard error.
fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if x.len() <= 2 {
        return (slope, 0.0);
    }
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    (slope, (rss / (n - 2.0) / sxx).sqrt())
}

/// Medians of `M(a) f` along GMC flows. The statistic is the fitted slope of the log median
/// over the grid points with `a ≥ 1`; the verdict asks for strictly decreasing medians over
/// the top half of the grid.
pub fn strong_disorder_trial(
    ensemble: &WeightedPathEnsemble,
    kernel: &IntersectionMatrix,
    a_grid: &[f64],
    f: &[f64],
    flows: usize,
    seed: u64,
) -> Result<TrialReport> {
    let mass = check_f(ensemble, f)?;
    validate_grid(a_grid)?;
    if flows == 0 {
        return domain("at least one flow");
    }
    let y = factor_of(ensemble, kernel)?;
    let localized = WeightedInnerProduct::localized(ensemble)?;
    let projections: Vec<f64> =
        (0..y.rank()).map(|j| (0..y.paths()).map(|i| localized.masses()[i] * f[i] * y.y[(i, j)]).sum()).collect();
    let scale = mass.abs().max(f64::MIN_POSITIVE);
    let mode = projections.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|(j, p)| (j, *p));
    let inputs = GmcInputs { weights: ensemble.weights(), kernel: kernel.entries().as_slice().to_vec(), strength: a_grid, f, draws: flows };
    let mut report = TrialReport {
        name: "strong-disorder".into(),
        inputs_digest: digest(&inputs)?,
        samples: flows,
        statistic: f64::NAN,
        standard_error: f64::NAN,
        verdict: Verdict::Inconclusive,
        seed,
        diagnostics: BTreeMap::new(),
    };
    let Some((j, proj)) = mode.filter(|(_, p)| p.abs() > 1e-12 * scale) else {
        return Ok(report);
    };
    if a_grid.len() < 2 {
        return Ok(report);
    }
    let base = ensemble.weights();
    let per_flow = (0..flows as u64)
        .into_par_iter()
        .map(|k| {
            let flow = gmc_flow(base, &y, a_grid, seed, k)?;
            let values = flow.pair(f);
            // E[M(a) f | ξ_j] keeps only mode j
            let single: Vec<f64> = flow
                .noise
                .iter()
                .zip(a_grid)
                .map(|(xi, &a)| {
                    (0..y.paths()).map(|i| base[i] * f[i] * (xi[j] * y.y[(i, j)] - 0.5 * a * y.y[(i, j)].powi(2)).exp()).sum()
                })
                .collect();
            Ok((values, single))
        })
        .collect::<Result<Vec<_>>>()?;
    let medians: Vec<f64> = (0..a_grid.len())
        .map(|k| median(&mut per_flow.iter().map(|(v, _)| v[k]).collect::<Vec<_>>()))
        .collect();
    let single_last = median(&mut per_flow.iter().map(|(_, s)| *s.last().expect("nonempty grid")).collect::<Vec<_>>());
    let top = a_grid.len() / 2;
    let decreasing = medians[top.min(a_grid.len() - 2)..].windows(2).all(|w| w[1] < w[0]);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        a_grid.iter().zip(&medians).filter(|(a, m)| **a >= 1.0 && **m > 0.0).map(|(a, m)| (*a, m.ln())).unzip();
    let (slope, se) = if xs.len() >= 2 { fit_slope(&xs, &ys) } else { (f64::NAN, f64::NAN) };
    report.statistic = slope;
    report.standard_error = se;
    report.verdict = if decreasing { Verdict::TrendPass } else { Verdict::TrendFail };
    report.diagnostics.insert("mode".into(), j as f64);
    report.diagnostics.insert("mode_projection".into(), proj);
    report.diagnostics.insert("single_mode_median_last".into(), single_last);
    report.diagnostics.insert("mu_f".into(), mass);
    for (a, m) in a_grid.iter().zip(&medians) {
        report.diagnostics.insert(format!("median_a={a}"), *m);
    }
    Ok(report)
}

#[derive(Serialize)]
struct PolymerInputs<'a> {
    params: &'a PolymerParams,
    configs: &'a [(f64, f64)],
    g: &'a GaussianProfile,
    gp: &'a GaussianProfile,
    replicas: usize,
}

/// Second moment of the GMC over the polymer at window `θ` and strength `a`, against the
/// analytic pairing at `θ + a`, for each `(θ, a)` on shared disorder.
pub fn moment_match_trials(
    params: &PolymerParams,
    configs: &[(f64, f64)],
    g: &GaussianProfile,
    gp: &GaussianProfile,
    replicas: usize,
    seed: u64,
) -> Result<Vec<TrialReport>> {
    if replicas < 2 {
        return domain("at least two replicas are needed for an error bar");
    }
    if configs.iter().any(|c| !(c.1 >= 0.0)) {
        return domain("GMC strengths must be nonnegative");
    }
    let inputs = digest(&PolymerInputs { params, configs, g, gp, replicas })?;
    let (mean_z, samples) = second_moment_samples(params, configs, g, gp, replicas, seed)?;
    configs
        .iter()
        .zip(&samples)
        .map(|(&(theta, a), s)| {
            let est = MomentEstimate::from_samples(s);
            let analytic = moment2_pairing(theta + a, params.lattice_time(), g, gp, 1e-6)?;
            let ratio = est.mean / analytic.total;
            let verdict =
                if ratio >= MOMENT_BAND.0 && ratio <= MOMENT_BAND.1 { Verdict::TrendPass } else { Verdict::TrendFail };
            Ok(TrialReport {
                name: format!("moment-match theta={theta} a={a}"),
                inputs_digest: inputs.clone(),
                samples: replicas,
                statistic: ratio,
                standard_error: est.std_error / analytic.total,
                verdict,
                seed,
                diagnostics: BTreeMap::from([
                    ("theta".to_string(), theta),
                    ("a".to_string(), a),
                    ("mc_mean".to_string(), est.mean),
                    ("mc_std_error".to_string(), est.std_error),
                    ("analytic".to_string(), analytic.total),
                    ("analytic_heat".to_string(), analytic.heat),
                    ("mean_partition".to_string(), mean_z),
                ]),
            })
        })
        .collect()
}

pub fn moment_match_trial(
    params: &PolymerParams,
    a: f64,
    g: &GaussianProfile,
    gp: &GaussianProfile,
    replicas: usize,
    seed: u64,
) -> Result<TrialReport> {
    Ok(moment_match_trials(params, &[(params.theta, a)], g, gp, replicas, seed)?.remove(0))
}

fn variance_ratio(h: &[f64]) -> f64 {
    let n = h.len() as f64;
    let m = h.iter().sum::<f64>() / n;
    let var = h.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    var / (m * m)
}

/// Jackknife standard error of `Var h / (E h)²`.
fn jackknife_ratio_se(h: &[f64]) -> f64 {
    let n = h.len();
    if n < 3 {
        return f64::NAN;
    }
    let leave: Vec<f64> = (0..n)
        .map(|k| variance_ratio(&h.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| *x).collect::<Vec<_>>()))
        .collect();
    let m = leave.iter().sum::<f64>() / n as f64;
    ((n - 1) as f64 / n as f64 * leave.iter().map(|x| (x - m).powi(2)).sum::<f64>()).sqrt()
}

/// `Var⟨f, Qf⟩ / (E⟨f, Qf⟩)²` across disorder replicas at each `θ`, with `⟨f, Qf⟩` the exact
/// polymer pair coincidence mass for `f = g ⊗ g'`. `frozen_disorder` reuses one field for
/// every replica.
pub fn variance_ratio_trial(
    params: &PolymerParams,
    theta_grid: &[f64],
    g: &GaussianProfile,
    gp: &GaussianProfile,
    replicas: usize,
    seed: u64,
    frozen_disorder: bool,
) -> Result<TrialReport> {
    if replicas < 3 {
        return domain("at least three replicas");
    }
    if theta_grid.is_empty() || theta_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return domain("θ grid must be strictly decreasing");
    }
    params.validate()?;
    let dom = params.domain(g, gp)?;
    let betas = theta_grid.iter().map(|th| params.window.beta(*th, params.n)).collect::<Result<Vec<f64>>>()?;
    let streams = SeedStreams::new(seed);
    let per_replica = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let field = DisorderField::new(streams.derive("disorder", if frozen_disorder { 0 } else { r }), params.n);
            Ok(quenched_overlap(&dom, &field, &betas, g, gp)?.iter().map(|o| o.coincidences).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let ratios: Vec<f64> = (0..betas.len())
        .map(|k| variance_ratio(&per_replica.iter().map(|row| row[k]).collect::<Vec<_>>()))
        .collect();
    let last: Vec<f64> = per_replica.iter().map(|row| row[betas.len() - 1]).collect();
    let analytic = variance_functionals(params.lattice_time(), g, gp, 1e-6)?;
    let verdict = if ratios.iter().all(|r| *r == 0.0) {
        Verdict::Inconclusive
    } else if ratios.windows(2).all(|w| w[1] < w[0]) {
        Verdict::TrendPass
    } else {
        Verdict::TrendFail
    };
    let mut diagnostics = BTreeMap::from([("analytic_v_over_u2".to_string(), analytic.v_pair / analytic.u_pair.powi(2))]);
    for (th, r) in theta_grid.iter().zip(&ratios) {
        diagnostics.insert(format!("ratio_theta={th}"), *r);
    }
    #[derive(Serialize)]
    struct Inputs<'a> {
        params: &'a PolymerParams,
        theta_grid: &'a [f64],
        g: &'a GaussianProfile,
        gp: &'a GaussianProfile,
        replicas: usize,
        frozen_disorder: bool,
    }
    Ok(TrialReport {
        name: "variance-ratio".into(),
        inputs_digest: digest(&Inputs { params, theta_grid, g, gp, replicas, frozen_disorder })?,
        samples: replicas,
        statistic: *ratios.last().expect("nonempty grid"),
        standard_error: jackknife_ratio_se(&last),
        verdict,
        seed,
        diagnostics,
    })
}
