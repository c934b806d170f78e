//! The two-particle delta-Bose kernel.
//!
//! With `d = x₁ − x₂`, `d' = x'₁ − x'₂` and centers `x̄`, `x̄'`, the single diagram
//! contributes `p(t/2, x̄ − x̄') · C_t(|d|, |d'|)` where
//! `C_t(a, b) = 4π ∫_{u+v+w=t} p(2u, a) j^θ(v) p(2w, b)`.
//! `C_t` diverges logarithmically as either argument tends to zero, so coincident
//! particles are rejected.

use std::f64::consts::PI;

use super::jfun::JThetaTable;
use crate::error::{domain, Result};
use crate::quad::heat::heat_r2;
use crate::quad::{simplex_convolve, Kernel, QuadSettings, QuadratureResult, SingularityProfile};

pub type Point = [f64; 2];

/// `u ↦ p(2u, r)`, a heat kernel read as a function of time.
#[derive(Debug, Clone, Copy)]
pub struct HeatInTime {
    r2: f64,
}

impl HeatInTime {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return domain(format!(
                "p(2u, r) is not integrable in u at r = {r}; the two-particle kernel is singular at coincident points"
            ));
        }
        Ok(HeatInTime { r2: r * r })
    }
}

impl Kernel for HeatInTime {
    fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        heat_r2(2.0 * u, self.r2)
    }

    fn profile(&self) -> SingularityProfile {
        SingularityProfile::multiscale().with_decay(0.0)
    }

    fn eval_times_arg_log(&self, log_u: f64) -> f64 {
        // u p(2u, r) = exp(−r²/4u) / 4π
        (-0.25 * self.r2 * (-log_u).exp()).exp() / (4.0 * PI)
    }
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm2(a: Point) -> f64 {
    a[0] * a[0] + a[1] * a[1]
}

/// Evaluator for a fixed `θ` and time horizon; holds the tabulated `j^θ`.
#[derive(Debug, Clone)]
pub struct TwoParticle {
    table: JThetaTable,
    settings: QuadSettings,
}

impl TwoParticle {
    /// Valid for times in `(0, t_max]`. `tol` is a relative target for the time integrals.
    pub fn new(theta: f64, t_max: f64, tol: f64) -> Result<Self> {
        let table = JThetaTable::new(theta, t_max)?;
        Ok(TwoParticle { table, settings: QuadSettings::rel(tol) })
    }

    pub fn theta(&self) -> f64 {
        self.table.theta
    }

    pub fn t_max(&self) -> f64 {
        self.table.t_end()
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t > 0.0) || t > self.t_max() * (1.0 + 1e-12) {
            return domain(format!("time {t} outside (0, {}]", self.t_max()));
        }
        Ok(())
    }

    /// `C_t(a, b)`.
    pub fn correction(&self, t: f64, a: f64, b: f64) -> Result<QuadratureResult> {
        self.check_t(t)?;
        let ka = HeatInTime::new(a)?;
        let kb = HeatInTime::new(b)?;
        Ok(simplex_convolve(&[&ka, &self.table, &kb], t, &self.settings)?.scaled(4.0 * PI))
    }

    /// Kernel in relative coordinates: `p(t, x − x')^{⊗2} = p(t/2, x̄ − x̄') R_t(d, d')`
    /// with `R_t(d, d') = p(2t, d − d') + C_t(|d|, |d'|)`.
    pub fn relative(&self, t: f64, d: Point, dp: Point) -> Result<QuadratureResult> {
        let c = self.correction(t, norm2(d).sqrt(), norm2(dp).sqrt())?;
        Ok(QuadratureResult::exact(heat_r2(2.0 * t, norm2(sub(d, dp)))).plus(c))
    }

    /// Heat product `p(t, x₁ − x'₁) p(t, x₂ − x'₂)`.
    pub fn heat_product(t: f64, x: [Point; 2], xp: [Point; 2]) -> f64 {
        heat_r2(t, norm2(sub(x[0], xp[0]))) * heat_r2(t, norm2(sub(x[1], xp[1])))
    }

    /// Diagram part only; also the centered second moment density.
    pub fn centered_moment2(&self, t: f64, x: [Point; 2], xp: [Point; 2]) -> Result<QuadratureResult> {
        let d = sub(x[0], x[1]);
        let dp = sub(xp[0], xp[1]);
        let center = [(x[0][0] + x[1][0]) / 2.0, (x[0][1] + x[1][1]) / 2.0];
        let center_p = [(xp[0][0] + xp[1][0]) / 2.0, (xp[0][1] + xp[1][1]) / 2.0];
        let c = self.correction(t, norm2(d).sqrt(), norm2(dp).sqrt())?;
        Ok(c.scaled(heat_r2(t / 2.0, norm2(sub(center, center_p)))))
    }

    /// The full kernel of the two-particle semigroup at time `t`.
    pub fn semigroup2(&self, t: f64, x: [Point; 2], xp: [Point; 2]) -> Result<QuadratureResult> {
        let c = self.centered_moment2(t, x, xp)?;
        Ok(QuadratureResult::exact(Self::heat_product(t, x, xp)).plus(c))
    }
}

/// One-shot evaluation of the two-particle kernel.
pub fn semigroup2(theta: f64, t: f64, x: [Point; 2], xp: [Point; 2], tol: f64) -> Result<QuadratureResult> {
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    TwoParticle::new(theta, t, tol)?.semigroup2(t, x, xp)
}

/// One-shot centered second moment; `semigroup2` minus the heat product.
pub fn centered_moment2(theta: f64, t: f64, x: [Point; 2], xp: [Point; 2], tol: f64) -> Result<QuadratureResult> {
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    TwoParticle::new(theta, t, tol)?.centered_moment2(t, x, xp)
}
