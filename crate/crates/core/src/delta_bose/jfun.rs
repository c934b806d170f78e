//! The special function `j^θ(t) = ∫_0^∞ t^{v−1} e^{θv} / Γ(v) dv`, its convolution
//! powers and the resummed series.
//!
//! Everything reduces to `M_k(L) = ∫_0^∞ exp(vL + k ln v − ln Γ(v+1)) dv`:
//! `t j^θ(t) = M_1(ln t + θ)`, the `j`-fold convolution is `M_j(L) / ((j−1)! t)` and
//! `∫_0^r j^θ = M_0(ln r + θ)`. The integrand is log-concave in `v`, so it is
//! integrated around its unique peak in units of the peak width.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::special::{digamma, ln_gamma, trigamma};
use crate::quad::{integrate, GridKernel, Kernel, QuadSettings, QuadratureResult, SingularityProfile};

/// Renormalized coupling `θ` and noise strength `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaParams {
    pub theta: f64,
    pub a: f64,
}

impl ThetaParams {
    pub fn new(theta: f64, a: f64) -> Result<Self> {
        if !theta.is_finite() || !(a >= 0.0) || !a.is_finite() {
            return domain(format!("need finite θ and a ≥ 0, got θ = {theta}, a = {a}"));
        }
        Ok(ThetaParams { theta, a })
    }
}

/// Relative accuracy targeted for every `M_k` evaluation.
const MELLIN_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LogValue {
    pub log_value: f64,
    pub rel_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// `ln M_k(L)`.
pub(crate) fn log_mellin(l: f64, k: f64) -> LogValue {
    debug_assert!(k >= 0.0 && l.is_finite());
    let h = |v: f64| {
        if v <= 0.0 {
            return if k > 0.0 { f64::NEG_INFINITY } else { 0.0 };
        }
        let lv = if k > 0.0 { k * v.ln() } else { 0.0 };
        v * l + lv - ln_gamma(v + 1.0)
    };
    let dh = |v: f64| l + k / v - digamma(v + 1.0);

    // peak of the log-concave integrand
    let peak = if k == 0.0 && l + crate::quad::special::EULER_GAMMA <= 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (-745.0f64, 709.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dh(mid.exp()) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        (0.5 * (lo + hi)).exp()
    };
    let h_peak = if peak > 0.0 { h(peak) } else { 0.0 };
    let curvature = if peak > 0.0 { k / (peak * peak) + trigamma(peak + 1.0) } else { trigamma(1.0) };
    // near v = 0 with k = 0 the decay rate is |L + γ| rather than the curvature
    let width = if peak > 0.0 {
        1.0 / curvature.sqrt()
    } else {
        1.0 / (-(l + crate::quad::special::EULER_GAMMA)).max(curvature.sqrt())
    };

    let settings = QuadSettings { abs_tol: 0.0, rel_tol: MELLIN_REL, ..Default::default() };
    let g = |v: f64| (h(v) - h_peak).exp();
    let mut total = QuadratureResult::exact(0.0);
    if peak > 0.0 {
        total = total.plus(integrate(g, 0.0, peak, &settings));
    }
    let tail = integrate(
        |r: f64| {
            if r <= 0.0 {
                return 0.0;
            }
            let v = peak + width * (1.0 - r) / r;
            g(v) * width / (r * r)
        },
        0.0,
        1.0,
        &settings,
    );
    total = total.plus(tail);
    LogValue {
        log_value: h_peak + total.value.ln(),
        rel_error: total.abs_error_estimate / total.value,
        evaluations: total.evaluations,
        converged: total.converged && total.value > 0.0,
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("time must be positive, got {t}"));
    }
    Ok(())
}

fn finish(lv: LogValue, shift: f64, tol: f64) -> Result<QuadratureResult> {
    let log_v = lv.log_value + shift;
    if log_v > 709.0 {
        return Err(Error::Overflow(format!("value exp({log_v}) is not representable")));
    }
    let value = log_v.exp();
    let abs_error_estimate = (lv.rel_error * value).max(0.0);
    Ok(QuadratureResult {
        value,
        abs_error_estimate,
        evaluations: lv.evaluations,
        converged: lv.converged && abs_error_estimate <= tol.max(0.0),
    })
}

/// `j^θ(t)`; `tol` is an absolute error target.
pub fn j_theta(theta: f64, t: f64, tol: f64) -> Result<QuadratureResult> {
    check_t(t)?;
    let lt = t.ln();
    finish(log_mellin(lt + theta, 1.0), -lt, tol)
}

/// `t j^θ(t)` at `t = exp(log_t)`, valid for arbitrarily small `t`.
pub fn j_theta_scaled_log(theta: f64, log_t: f64) -> f64 {
    log_mellin(log_t + theta, 1.0).log_value.exp()
}

/// The `j`-fold time convolution of `j^θ`, via
/// `∫_0^∞ t^{v−1} e^{vθ} v^{j−1} / ((j−1)! Γ(v)) dv`.
pub fn j_convolution_power(theta: f64, t: f64, j: u32, tol: f64) -> Result<QuadratureResult> {
    check_t(t)?;
    if j == 0 {
        return domain("convolution power needs j ≥ 1");
    }
    let lt = t.ln();
    finish(log_mellin(lt + theta, j as f64), -lt - ln_gamma(j as f64), tol)
}

/// `∫_0^r j^θ(t) dt`.
pub fn j_theta_mass(theta: f64, r: f64, tol: f64) -> Result<QuadratureResult> {
    check_t(r)?;
    finish(log_mellin(r.ln() + theta, 0.0), 0.0, tol)
}

/// Why the resummed series stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    /// The next term fell below `tol / 10`.
    Converged,
    /// All `J` terms were used.
    Exhausted,
    /// A partial sum left the representable range; the value is the last finite partial sum.
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResummedValue {
    pub value: f64,
    pub terms: u32,
    pub truncation: Truncation,
    pub abs_error_estimate: f64,
}

/// `Σ_{j=1}^{J} a^{j−1} (j^θ)^{*j}(t)`, which resums to `j^{θ+a}(t)`.
pub fn j_resummed(theta: f64, a: f64, t: f64, max_terms: u32, tol: f64) -> Result<ResummedValue> {
    check_t(t)?;
    if !(a >= 0.0) || max_terms == 0 {
        return domain(format!("need a ≥ 0 and J ≥ 1, got a = {a}, J = {max_terms}"));
    }
    let lt = t.ln();
    let mut sum = 0.0;
    let mut err = 0.0;
    for j in 1..=max_terms {
        let coeff_log = if j == 1 { 0.0 } else { (j - 1) as f64 * a.ln() };
        if a == 0.0 && j > 1 {
            return Ok(ResummedValue { value: sum, terms: 1, truncation: Truncation::Converged, abs_error_estimate: err });
        }
        let lv = log_mellin(lt + theta, j as f64);
        let log_term = coeff_log + lv.log_value - lt - ln_gamma(j as f64);
        let term = log_term.exp();
        if !term.is_finite() || !(sum + term).is_finite() {
            return Ok(ResummedValue { value: sum, terms: j - 1, truncation: Truncation::Overflow, abs_error_estimate: f64::INFINITY });
        }
        if !lv.converged {
            return Err(Error::NonConvergence { value: sum + term, abs_error: err + term * lv.rel_error, evaluations: lv.evaluations });
        }
        sum += term;
        err += term * lv.rel_error;
        if j > 1 && term < tol / 10.0 {
            return Ok(ResummedValue { value: sum, terms: j, truncation: Truncation::Converged, abs_error_estimate: err });
        }
    }
    Ok(ResummedValue { value: sum, terms: max_terms, truncation: Truncation::Exhausted, abs_error_estimate: err })
}

/// `j^θ` as a time kernel, evaluated directly. Non-convergence is latched.
pub struct JKernel {
    pub theta: f64,
    /// Convolution power; 1 is `j^θ` itself.
    pub power: u32,
    failed: Cell<bool>,
}

impl JKernel {
    pub fn new(theta: f64) -> Self {
        Self::power(theta, 1)
    }

    pub fn power(theta: f64, power: u32) -> Self {
        assert!(power >= 1);
        JKernel { theta, power, failed: Cell::new(false) }
    }

    pub fn clean(&self) -> bool {
        !self.failed.get()
    }
}

impl Kernel for JKernel {
    fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        self.eval_times_arg_log(u.ln()) / u
    }

    fn profile(&self) -> SingularityProfile {
        SingularityProfile::log_singular(self.power + 1).with_decay(0.0)
    }

    fn eval_times_arg_log(&self, log_u: f64) -> f64 {
        let k = self.power as f64;
        let lv = log_mellin(log_u + self.theta, k);
        if !lv.converged {
            self.failed.set(true);
        }
        (lv.log_value - ln_gamma(k)).exp()
    }
}

/// `j^θ` tabulated on `(0, T]`; cheap to evaluate inside nested convolutions.
#[derive(Debug, Clone)]
pub struct JThetaTable {
    pub theta: f64,
    grid: GridKernel,
}

impl JThetaTable {
    pub fn new(theta: f64, t_end: f64) -> Result<Self> {
        check_t(t_end)?;
        let k = JKernel::new(theta);
        let grid = GridKernel::tabulate(&k, t_end);
        if !k.clean() {
            return Err(Error::NonConvergence { value: f64::NAN, abs_error: f64::NAN, evaluations: 0 });
        }
        Ok(JThetaTable { theta, grid })
    }

    pub fn t_end(&self) -> f64 {
        self.grid.t_end()
    }
}

impl Kernel for JThetaTable {
    fn eval(&self, u: f64) -> f64 {
        self.grid.eval(u)
    }
    fn profile(&self) -> SingularityProfile {
        self.grid.profile()
    }
    fn eval_times_arg_log(&self, log_u: f64) -> f64 {
        self.grid.eval_times_arg_log(log_u)
    }
}
