//! Time kernels with endpoint singularities and the integration maps that remove them.

use serde::{Deserialize, Serialize};

use super::adaptive::{integrate, QuadSettings, QuadratureResult};
use crate::error::{domain, Result};

/// Below this `ln u` kernels are extrapolated from their profile instead of evaluated.
pub(crate) const LOG_FLOOR: f64 = -700.0;

/// Near-zero shape `u^{-b} |ln u|^{-k}` plus a hint for the right tail.
///
/// `b = 1` is accepted when `k ≥ 2`; that is the shape of `j^θ` itself.
/// `log_scale` marks kernels with features spread over many scales near zero
/// (heat kernels in the time variable), which are integrated in `ln u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityProfile {
    pub left_exponent: f64,
    pub log_power: u32,
    pub decay: f64,
    #[serde(default)]
    pub log_scale: bool,
}

impl Default for SingularityProfile {
    fn default() -> Self {
        SingularityProfile { left_exponent: 0.0, log_power: 0, decay: 1.0, log_scale: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum EndpointMap {
    Plain,
    /// `u = T w^{1/(1-b)}`
    Algebraic(f64),
    /// `u = T exp(1 − 1/r)`
    LogExp,
}

impl SingularityProfile {
    pub fn power(b: f64) -> Self {
        SingularityProfile { left_exponent: b, ..Default::default() }
    }

    /// `u^{-1} |ln u|^{-k}`.
    pub fn log_singular(k: u32) -> Self {
        SingularityProfile { left_exponent: 1.0, log_power: k, decay: 1.0, log_scale: true }
    }

    pub fn multiscale() -> Self {
        SingularityProfile { log_scale: true, ..Default::default() }
    }

    pub fn with_decay(mut self, decay: f64) -> Self {
        self.decay = decay;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.left_exponent.is_finite() || !(self.decay >= 0.0) || !self.decay.is_finite() {
            return domain(format!("malformed singularity profile {self:?}"));
        }
        if self.left_exponent > 1.0 || (self.left_exponent == 1.0 && self.log_power < 2) {
            return domain(format!(
                "profile u^-{} |ln u|^-{} is not integrable at 0",
                self.left_exponent, self.log_power
            ));
        }
        Ok(())
    }

    pub(crate) fn is_log_type(&self) -> bool {
        self.left_exponent >= 1.0
    }

    pub(crate) fn map(&self) -> EndpointMap {
        if self.is_log_type() || self.log_scale {
            EndpointMap::LogExp
        } else if self.left_exponent > 0.0 {
            EndpointMap::Algebraic(self.left_exponent)
        } else {
            EndpointMap::Plain
        }
    }

    /// Profile of the convolution `f * g` near zero.
    pub fn convolve(&self, other: &SingularityProfile) -> SingularityProfile {
        let decay = match (self.decay > 0.0, other.decay > 0.0) {
            (true, true) => self.decay.min(other.decay),
            _ => 0.0,
        };
        let log_scale = self.log_scale || other.log_scale || self.is_log_type() || other.is_log_type();
        let (left_exponent, log_power) = match (self.is_log_type(), other.is_log_type()) {
            (true, true) => (1.0, self.log_power + other.log_power - 1),
            (true, false) => (other.left_exponent.max(0.0), 0),
            (false, true) => (self.left_exponent.max(0.0), 0),
            (false, false) => (self.left_exponent + other.left_exponent - 1.0, 0),
        };
        SingularityProfile { left_exponent, log_power, decay, log_scale }
    }
}

/// A nonnegative-time kernel `f(u)`, `u > 0`.
pub trait Kernel {
    fn eval(&self, u: f64) -> f64;

    fn profile(&self) -> SingularityProfile;

    /// `u f(u)` at `u = exp(log_u)`. Needed for log-type kernels, whose mass sits at
    /// scales far below the smallest double. The default extrapolates the profile
    /// shape from `LOG_FLOOR` downwards.
    fn eval_times_arg_log(&self, log_u: f64) -> f64 {
        if log_u >= LOG_FLOOR {
            let u = log_u.exp();
            return u * self.eval(u);
        }
        let p = self.profile();
        let reference = LOG_FLOOR.exp() * self.eval(LOG_FLOOR.exp());
        let ratio = ((1.0 - p.left_exponent) * (log_u - LOG_FLOOR)).exp()
            * (LOG_FLOOR / log_u).abs().powi(p.log_power as i32);
        reference * ratio
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn eval(&self, u: f64) -> f64 {
        (**self).eval(u)
    }
    fn profile(&self) -> SingularityProfile {
        (**self).profile()
    }
    fn eval_times_arg_log(&self, log_u: f64) -> f64 {
        (**self).eval_times_arg_log(log_u)
    }
}

impl<K: Kernel + ?Sized> Kernel for Box<K> {
    fn eval(&self, u: f64) -> f64 {
        (**self).eval(u)
    }
    fn profile(&self) -> SingularityProfile {
        (**self).profile()
    }
    fn eval_times_arg_log(&self, log_u: f64) -> f64 {
        (**self).eval_times_arg_log(log_u)
    }
}

/// A closure plus its declared profile.
pub struct FnKernel<F> {
    f: F,
    profile: SingularityProfile,
}

impl<F: Fn(f64) -> f64> FnKernel<F> {
    pub fn new(f: F, profile: SingularityProfile) -> Self {
        FnKernel { f, profile }
    }
}

impl<F: Fn(f64) -> f64> Kernel for FnKernel<F> {
    fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }
    fn profile(&self) -> SingularityProfile {
        self.profile
    }
}

/// `∫_0^T g(u) du` where `g` has the endpoint shape of `map`.
/// `plain(u) = g(u)`; `scaled(ln u) = u g(u)` is used by the exp-log map.
pub(crate) fn integrate_from_zero(
    t_end: f64,
    map: EndpointMap,
    plain: &dyn Fn(f64) -> f64,
    scaled: &dyn Fn(f64) -> f64,
    settings: &QuadSettings,
) -> QuadratureResult {
    match map {
        EndpointMap::Plain => integrate(plain, 0.0, t_end, settings),
        EndpointMap::Algebraic(b) => {
            let p = 1.0 / (1.0 - b);
            integrate(
                |w: f64| {
                    if w <= 0.0 {
                        return 0.0;
                    }
                    let u = t_end * w.powf(p);
                    plain(u) * t_end * p * w.powf(p - 1.0)
                },
                0.0,
                1.0,
                settings,
            )
        }
        EndpointMap::LogExp => {
            let ln_t = t_end.ln();
            integrate(
                |r: f64| {
                    if r <= 0.0 {
                        return 0.0;
                    }
                    scaled(ln_t + 1.0 - 1.0 / r) / (r * r)
                },
                0.0,
                1.0,
                settings,
            )
        }
    }
}

/// `∫_c^∞ g(x) dx` through `x = c + (1 − r)/(λ r)`.
pub(crate) fn integrate_tail(
    c: f64,
    decay: f64,
    g: &dyn Fn(f64) -> f64,
    settings: &QuadSettings,
) -> QuadratureResult {
    let lambda = if decay > 0.0 { decay } else { 1.0 };
    integrate(
        |r: f64| {
            if r <= 0.0 {
                return 0.0;
            }
            let x = c + (1.0 - r) / (lambda * r);
            g(x) / (lambda * r * r)
        },
        0.0,
        1.0,
        settings,
    )
}

/// `∫_0^∞ f(u) du` for a kernel with the given near-zero profile.
pub fn integrate_semi_infinite<K: Kernel + ?Sized>(f: &K, settings: &QuadSettings) -> Result<QuadratureResult> {
    let profile = f.profile();
    profile.validate()?;
    let lambda = if profile.decay > 0.0 { profile.decay } else { 1.0 };
    let c = 1.0 / lambda;
    let half = settings.split(2);
    let left = integrate_from_zero(
        c,
        profile.map(),
        &|u| f.eval(u),
        &|l| f.eval_times_arg_log(l),
        &half,
    );
    let right = integrate_tail(c, lambda, &|x| f.eval(x), &half);
    Ok(left.plus(right))
}

/// `∫_0^T f(u) du`.
pub fn integrate_to<K: Kernel + ?Sized>(f: &K, t_end: f64, settings: &QuadSettings) -> Result<QuadratureResult> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return domain(format!("upper limit must be positive, got {t_end}"));
    }
    let profile = f.profile();
    profile.validate()?;
    Ok(integrate_from_zero(
        t_end,
        profile.map(),
        &|u| f.eval(u),
        &|l| f.eval_times_arg_log(l),
        settings,
    ))
}
