//! `⟨g^{⊗2}, sg^{[2],θ}(t) g'^{⊗2}⟩` for Gaussian-mixture profiles.
//!
//! The heat part factorizes. For the correction, the center of mass and the relative
//! coordinates of each pair of bumps are jointly Gaussian coordinate by coordinate, so
//! for fixed `(u, w)` the spatial integral against `p(t/2, ·) p(2u, ·) p(2w, ·)` is a
//! closed-form four-dimensional Gaussian expectation. Only the time simplex is
//! integrated numerically.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::jfun::{j_theta, j_theta_scaled_log};
use super::variance::GaussianProfile;
use crate::error::{domain, Result};
use crate::quad::{integrate, integrate_to, Kernel, QuadSettings, SingularityProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedMoment {
    pub heat: f64,
    pub correction: f64,
    pub total: f64,
    pub abs_error: f64,
    pub converged: bool,
}

/// `(α, σ², center)` with bump `= α · N(center, σ² I)`.
fn normalized(g: &GaussianProfile) -> Vec<(f64, f64, [f64; 2])> {
    g.bumps
        .iter()
        .filter(|b| b.amplitude != 0.0)
        .map(|b| (b.amplitude * 2.0 * PI * b.sigma * b.sigma, b.sigma * b.sigma, b.center))
        .collect()
}

/// Law of `(x̄, d)` per coordinate for `x ~ N(c₁, v₁)`, `x̃ ~ N(c₂, v₂)`.
#[derive(Clone, Copy)]
struct PairLaw {
    weight: f64,
    mean: [[f64; 2]; 2],
    var_bar: f64,
    var_d: f64,
    cov: f64,
}

fn pair_laws(g: &[(f64, f64, [f64; 2])]) -> Vec<PairLaw> {
    let mut out = Vec::with_capacity(g.len() * g.len());
    for &(a1, v1, c1) in g {
        for &(a2, v2, c2) in g {
            out.push(PairLaw {
                weight: a1 * a2,
                mean: [
                    [0.5 * (c1[0] + c2[0]), c1[0] - c2[0]],
                    [0.5 * (c1[1] + c2[1]), c1[1] - c2[1]],
                ],
                var_bar: 0.25 * (v1 + v2),
                var_d: v1 + v2,
                cov: 0.5 * (v1 - v2),
            });
        }
    }
    out
}

/// `E[φ_{t/2}(X̄ − Ȳ) φ_{2u}(D) φ_{2w}(D')]` over one coordinate, `φ_v` the centered
/// normal density of variance `v`.
fn coordinate_expectation(left: &PairLaw, right: &PairLaw, k: usize, t: f64, u: f64, w: f64) -> f64 {
    let sigma = Matrix4::new(
        left.var_bar, left.cov, 0.0, 0.0,
        left.cov, left.var_d, 0.0, 0.0,
        0.0, 0.0, right.var_bar, right.cov,
        0.0, 0.0, right.cov, right.var_d,
    );
    let m = Vector4::new(left.mean[k][0], left.mean[k][1], right.mean[k][0], right.mean[k][1]);
    let e = Vector4::new(1.0, 0.0, -1.0, 0.0);
    let mut p = e * e.transpose() * (2.0 / t);
    p[(1, 1)] += 1.0 / (2.0 * u);
    p[(3, 3)] += 1.0 / (2.0 * w);
    let a = Matrix4::identity() + sigma * p;
    let lu = a.lu();
    let det = lu.determinant();
    let solved = lu.solve(&m).unwrap_or_else(Vector4::zeros);
    let quad = m.dot(&(p * solved));
    let norm = 1.0 / ((2.0 * PI).powi(3) * 0.5 * t * 2.0 * u * 2.0 * w).sqrt();
    norm * (-0.5 * quad).exp() / det.sqrt()
}

struct Spatial {
    left: Vec<PairLaw>,
    right: Vec<PairLaw>,
    t: f64,
}

impl Spatial {
    /// `∫ g⊗g g'⊗g' p(t/2, x̄ − ȳ) p(2u, d) p(2w, d')`.
    fn eval(&self, u: f64, w: f64) -> f64 {
        if !(u > 0.0) || !(w > 0.0) {
            return 0.0;
        }
        let mut total = 0.0;
        for l in &self.left {
            for r in &self.right {
                let e = coordinate_expectation(l, r, 0, self.t, u, w) * coordinate_expectation(l, r, 1, self.t, u, w);
                total += l.weight * r.weight * e;
            }
        }
        total
    }

    /// `∫_0^r G(u, r − u) du`.
    fn marginal(&self, r: f64, settings: &QuadSettings) -> f64 {
        if !(r > 0.0) {
            return 0.0;
        }
        integrate(|u| self.eval(u, r - u), 0.0, r, settings).value
    }
}

struct OuterKernel<'a> {
    theta: f64,
    t: f64,
    spatial: &'a Spatial,
    inner: QuadSettings,
}

impl Kernel for OuterKernel<'_> {
    fn eval(&self, v: f64) -> f64 {
        if !(v > 0.0) || v >= self.t {
            return 0.0;
        }
        let j = j_theta(self.theta, v, f64::INFINITY).map(|r| r.value).unwrap_or(0.0);
        j * self.spatial.marginal(self.t - v, &self.inner)
    }

    fn profile(&self) -> SingularityProfile {
        SingularityProfile::log_singular(2)
    }

    fn eval_times_arg_log(&self, log_v: f64) -> f64 {
        let v = log_v.exp();
        if v >= self.t {
            return 0.0;
        }
        j_theta_scaled_log(self.theta, log_v) * self.spatial.marginal(self.t - v, &self.inner)
    }
}

/// Paired two-particle moment at time `t` with relative tolerance `tol`.
pub fn moment2_pairing(theta: f64, t: f64, g: &GaussianProfile, gp: &GaussianProfile, tol: f64) -> Result<PairedMoment> {
    g.validate()?;
    gp.validate()?;
    if !(t > 0.0) || !t.is_finite() || !theta.is_finite() {
        return domain(format!("need finite θ and t > 0, got θ = {theta}, t = {t}"));
    }
    let gn = normalized(g);
    let gpn = normalized(gp);
    let mut heat_pair = 0.0;
    for &(a1, v1, c1) in &gn {
        for &(a2, v2, c2) in &gpn {
            let var = t + v1 + v2;
            let r2 = (c1[0] - c2[0]).powi(2) + (c1[1] - c2[1]).powi(2);
            heat_pair += a1 * a2 * (-r2 / (2.0 * var)).exp() / (2.0 * PI * var);
        }
    }
    let heat = heat_pair * heat_pair;
    let spatial = Spatial { left: pair_laws(&gn), right: pair_laws(&gpn), t };
    let kernel = OuterKernel { theta, t, spatial: &spatial, inner: QuadSettings::rel((tol * 1e-2).max(1e-13)) };
    let outer = integrate_to(&kernel, t, &QuadSettings::rel(tol))?;
    let correction = 4.0 * PI * outer.value;
    Ok(PairedMoment {
        heat,
        correction,
        total: heat + correction,
        abs_error: 4.0 * PI * outer.abs_error_estimate,
        converged: outer.converged,
    })
}
