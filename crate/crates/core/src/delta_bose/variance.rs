//! The limiting variance functionals `U` and `V` paired against Gaussian-mixture profiles.
//!
//! With `h(a, b) = ∫ (p_a * g)(y)² (p_b * g')(y)² dy`, the pairings are
//! `U = (1/4π) ∫_0^t h(u, t−u) du` and
//! `V = 2/(4π)² ∫_{Σ(t)} h(u, u'+u'') h(u+u', u'') du du'`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quad::{integrate, QuadSettings};

/// `amplitude · exp(−|x − center|² / 2σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub sigma: f64,
}

/// A finite sum of Gaussian bumps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GaussianProfile {
    pub bumps: Vec<Bump>,
}

impl GaussianProfile {
    pub fn unit() -> Self {
        GaussianProfile { bumps: vec![Bump { amplitude: 1.0, center: [0.0, 0.0], sigma: 1.0 }] }
    }

    pub fn zero() -> Self {
        GaussianProfile::default()
    }

    pub fn validate(&self) -> Result<()> {
        for b in &self.bumps {
            if !(b.sigma > 0.0) || !b.amplitude.is_finite() || !b.center.iter().all(|c| c.is_finite()) {
                return domain(format!("malformed bump {b:?}"));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.bumps
            .iter()
            .map(|b| {
                let r2 = (x[0] - b.center[0]).powi(2) + (x[1] - b.center[1]).powi(2);
                b.amplitude * (-r2 / (2.0 * b.sigma * b.sigma)).exp()
            })
            .sum()
    }

    /// Half-width of a centered square outside which every bump is below `e^{−18}` of its peak.
    pub fn support_radius(&self) -> f64 {
        self.bumps
            .iter()
            .map(|b| b.center[0].abs().max(b.center[1].abs()) + 6.0 * b.sigma)
            .fold(0.0, f64::max)
    }

    /// `p_a * g` as weighted heat kernels: `(weight, variance, center)`.
    fn smoothed(&self, a: f64) -> Vec<(f64, f64, [f64; 2])> {
        self.bumps
            .iter()
            .filter(|b| b.amplitude != 0.0)
            .map(|b| (b.amplitude * 2.0 * PI * b.sigma * b.sigma, a + b.sigma * b.sigma, b.center))
            .collect()
    }
}

/// `∫ ∏_i p(v_i, y − m_i) dy` for isotropic planar Gaussians.
fn gaussian_product_integral(parts: &[(f64, [f64; 2])]) -> f64 {
    let mut w_sum = 0.0;
    let mut wm = [0.0; 2];
    let mut wmm = 0.0;
    let mut log_norm = 0.0;
    for &(v, m) in parts {
        let w = 1.0 / v;
        w_sum += w;
        wm[0] += w * m[0];
        wm[1] += w * m[1];
        wmm += w * (m[0] * m[0] + m[1] * m[1]);
        log_norm -= (2.0 * PI * v).ln();
    }
    let quad = wmm - (wm[0] * wm[0] + wm[1] * wm[1]) / w_sum;
    (log_norm + (2.0 * PI / w_sum).ln() - 0.5 * quad).exp()
}

/// `h(a, b)`.
pub fn pair_overlap(g: &GaussianProfile, gp: &GaussianProfile, a: f64, b: f64) -> f64 {
    let ga = g.smoothed(a);
    let gb = gp.smoothed(b);
    let mut total = 0.0;
    for &(w1, v1, m1) in &ga {
        for &(w2, v2, m2) in &ga {
            for &(w3, v3, m3) in &gb {
                for &(w4, v4, m4) in &gb {
                    total += w1 * w2 * w3 * w4 * gaussian_product_integral(&[(v1, m1), (v2, m2), (v3, m3), (v4, m4)]);
                }
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceFunctionals {
    pub u_pair: f64,
    pub v_pair: f64,
    pub u_error: f64,
    pub v_error: f64,
    pub converged: bool,
}

pub fn variance_functionals(t: f64, g: &GaussianProfile, gp: &GaussianProfile, tol: f64) -> Result<VarianceFunctionals> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("time must be positive, got {t}"));
    }
    g.validate()?;
    gp.validate()?;
    let settings = QuadSettings::rel(tol);
    let u = integrate(|s| pair_overlap(g, gp, s, t - s), 0.0, t, &settings).scaled(1.0 / (4.0 * PI));

    // outer over u, inner over u' ∈ (0, t − u)
    let inner = QuadSettings::rel(tol * 1e-2);
    let mut inner_ok = true;
    let v = integrate(
        |s1: f64| {
            let r = integrate(
                |s2: f64| {
                    let s3 = t - s1 - s2;
                    pair_overlap(g, gp, s1, s2 + s3) * pair_overlap(g, gp, s1 + s2, s3)
                },
                0.0,
                t - s1,
                &inner,
            );
            inner_ok &= r.converged;
            r.value
        },
        0.0,
        t,
        &settings,
    )
    .scaled(2.0 / (16.0 * PI * PI));
    Ok(VarianceFunctionals {
        u_pair: u.value,
        v_pair: v.value,
        u_error: u.abs_error_estimate,
        v_error: v.abs_error_estimate,
        converged: u.converged && v.converged && inner_ok,
    })
}
