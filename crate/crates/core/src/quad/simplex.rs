//! Integrals over the time simplex `Σ(t) = {u_1 + … + u_m = t}` as iterated convolutions.

use std::cell::Cell;

use super::adaptive::{integrate, QuadSettings, QuadratureResult};
use super::kernel::{integrate_from_zero, EndpointMap, Kernel, SingularityProfile, LOG_FLOOR};
use super::table::GridKernel;
use crate::error::{domain, Result};

/// Largest kernel count handled by nested adaptive quadrature.
pub const DIRECT_MAX: usize = 4;

/// `s · (f * g)(s)` at `s = exp(log_s)`.
///
/// The two halves `u < s/2` and `u > s/2` are integrated from their own singular
/// endpoint. Halves whose near kernel is log-type are integrated entirely in
/// log variables so that arbitrarily small `s` is representable.
pub fn convolve_scaled_log<F: Kernel + ?Sized, G: Kernel + ?Sized>(
    f: &F,
    g: &G,
    log_s: f64,
    settings: &QuadSettings,
) -> QuadratureResult {
    let half = settings.split(2);
    let a = half_scaled(f, g, log_s, &half);
    let b = half_scaled(g, f, log_s, &half);
    a.plus(b)
}

/// `s ∫_0^{s/2} near(u) far(s − u) du`.
fn half_scaled<F: Kernel + ?Sized, G: Kernel + ?Sized>(
    near: &F,
    far: &G,
    log_s: f64,
    settings: &QuadSettings,
) -> QuadratureResult {
    let map = near.profile().map();
    let log_half = log_s - std::f64::consts::LN_2;
    match map {
        EndpointMap::LogExp => {
            let scaled = |log_u: f64| {
                let q = (log_u - log_s).exp();
                let log_rest = log_s + (-q).ln_1p();
                near.eval_times_arg_log(log_u) * far.eval_times_arg_log(log_rest) / (1.0 - q)
            };
            integrate(
                |r: f64| if r <= 0.0 { 0.0 } else { scaled(log_half + 1.0 - 1.0 / r) / (r * r) },
                0.0,
                1.0,
                settings,
            )
        }
        _ => {
            if log_s < LOG_FLOOR {
                // non-log kernels carry no appreciable mass below the floor
                return QuadratureResult::exact(0.0);
            }
            let s = log_s.exp();
            // the absolute target refers to the scaled value
            let unscaled = QuadSettings { abs_tol: settings.abs_tol / s, ..*settings };
            integrate_from_zero(s / 2.0, map, &|u| near.eval(u) * far.eval(s - u), &|_| 0.0, &unscaled).scaled(s)
        }
    }
}

/// `(f * g)(s)` as a kernel, evaluated by adaptive quadrature on demand.
/// Inner non-convergence is recorded and surfaces through [`Convolution::clean`].
pub struct Convolution<F, G> {
    f: F,
    g: G,
    settings: QuadSettings,
    /// `(ln T, |T (f*g)(T)|)`: sets an absolute floor so tiny arguments are not
    /// asked for relative accuracy beyond the noise of their inputs.
    anchor: Option<(f64, f64)>,
    failed: Cell<bool>,
    evaluations: Cell<usize>,
}

impl<F: Kernel, G: Kernel> Convolution<F, G> {
    pub fn new(f: F, g: G, settings: QuadSettings) -> Self {
        Convolution { f, g, settings, anchor: None, failed: Cell::new(false), evaluations: Cell::new(0) }
    }

    /// Anchor the error floor at `t_end`, the largest argument that will be requested.
    pub fn anchored(mut self, t_end: f64) -> Self {
        let log_t = t_end.ln();
        let r = convolve_scaled_log(&self.f, &self.g, log_t, &self.settings);
        self.record(&r);
        self.anchor = Some((log_t, r.value.abs()));
        self
    }

    fn settings_at(&self, log_u: f64) -> QuadSettings {
        match self.anchor {
            Some((log_t, scale)) => {
                let r = 1.0 / (1.0 + (log_t - log_u).max(0.0));
                let floor = self.settings.rel_tol.max(1e-15) * scale * r * r;
                QuadSettings { abs_tol: self.settings.abs_tol.max(floor), ..self.settings }
            }
            None => self.settings,
        }
    }

    pub fn clean(&self) -> bool {
        !self.failed.get()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.get()
    }

    fn record(&self, r: &QuadratureResult) {
        if !r.converged {
            self.failed.set(true);
        }
        self.evaluations.set(self.evaluations.get() + r.evaluations);
    }
}

impl<F: Kernel, G: Kernel> Kernel for Convolution<F, G> {
    fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        self.eval_times_arg_log(u.ln()) / u
    }

    fn profile(&self) -> SingularityProfile {
        self.f.profile().convolve(&self.g.profile())
    }

    fn eval_times_arg_log(&self, log_u: f64) -> f64 {
        let r = convolve_scaled_log(&self.f, &self.g, log_u, &self.settings_at(log_u));
        self.record(&r);
        r.value
    }
}


/// Nested levels run tighter so their noise does not spoil the outer error estimate,
/// but never below what the Kronrod error floor can certify.
fn inner_settings(settings: &QuadSettings) -> QuadSettings {
    QuadSettings {
        abs_tol: settings.abs_tol * 1e-2,
        rel_tol: (settings.rel_tol * 1e-2).max(1e-13),
        ..*settings
    }
}

/// `∫_{Σ(t)} ∏ f_i(u_i) du`.
pub fn simplex_convolve(kernels: &[&dyn Kernel], t: f64, settings: &QuadSettings) -> Result<QuadratureResult> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("simplex time must be positive, got {t}"));
    }
    if kernels.is_empty() {
        return domain("simplex_convolve needs at least one kernel");
    }
    for k in kernels {
        k.profile().validate()?;
    }
    let m = kernels.len();
    if m == 1 {
        return Ok(QuadratureResult { value: kernels[0].eval(t), abs_error_estimate: 0.0, evaluations: 1, converged: true });
    }
    if m > DIRECT_MAX {
        return simplex_convolve_grid(kernels, t, settings);
    }
    let log_t = t.ln();
    let inner = inner_settings(settings);
    let top = |rest: &dyn Kernel| convolve_scaled_log(kernels[0], rest, log_t, settings).scaled(1.0 / t);
    let (mut res, healthy, inner_evals) = match m {
        2 => (top(kernels[1]), true, 0),
        3 => {
            let c = Convolution::new(kernels[1], kernels[2], inner).anchored(t);
            let r = top(&c);
            (r, c.clean(), c.evaluations())
        }
        _ => {
            let c1 = Convolution::new(kernels[2], kernels[3], inner).anchored(t);
            let c2 = Convolution::new(kernels[1], &c1, inner).anchored(t);
            let r = top(&c2);
            (r, c1.clean() && c2.clean(), c1.evaluations() + c2.evaluations())
        }
    };
    res.converged &= healthy;
    res.evaluations += inner_evals;
    Ok(res)
}

/// Iterated pairwise convolution through cached Chebyshev grids on `(0, t]`.
pub fn simplex_convolve_grid(kernels: &[&dyn Kernel], t: f64, settings: &QuadSettings) -> Result<QuadratureResult> {
    if !(t > 0.0) || kernels.is_empty() {
        return domain("simplex_convolve_grid needs t > 0 and at least one kernel");
    }
    let m = kernels.len();
    if m == 1 {
        return Ok(QuadratureResult::exact(kernels[0].eval(t)));
    }
    let inner = inner_settings(settings);
    let mut healthy = true;
    let mut evaluations = 0;
    let mut acc = GridKernel::tabulate(kernels[m - 1], t);
    for k in (1..m - 1).rev() {
        let c = Convolution::new(kernels[k], &acc, inner).anchored(t);
        let next = GridKernel::tabulate(&c, t);
        healthy &= c.clean();
        evaluations += c.evaluations();
        acc = next;
    }
    let mut r = convolve_scaled_log(kernels[0], &acc, t.ln(), settings).scaled(1.0 / t);
    r.converged &= healthy;
    r.evaluations += evaluations;
    Ok(r)
}
