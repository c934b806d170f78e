//! Piecewise Chebyshev tables of `u f(u) / r²` in the exp-log variable `r`, `u = T exp(1 − 1/r)`.
//!
//! Dividing by `r²` matches the `dr / r²` Jacobian, so interpolation noise stays bounded
//! in integrals and log-type kernels keep relative accuracy at tiny scales.

use std::f64::consts::PI;

use super::kernel::{Kernel, SingularityProfile};

pub const DEFAULT_PANELS: usize = 48;
pub const DEFAULT_NODES: usize = 16;

/// A kernel tabulated on `(0, T]`. Arguments beyond `T` are clamped to `T`.
#[derive(Debug, Clone)]
pub struct GridKernel {
    t_end: f64,
    ln_t: f64,
    panels: usize,
    /// Chebyshev coefficients, `nodes` per panel.
    coeffs: Vec<f64>,
    nodes: usize,
    profile: SingularityProfile,
}

impl GridKernel {
    pub fn tabulate<K: Kernel + ?Sized>(source: &K, t_end: f64) -> Self {
        Self::tabulate_with(source, t_end, DEFAULT_PANELS, DEFAULT_NODES)
    }

    pub fn tabulate_with<K: Kernel + ?Sized>(source: &K, t_end: f64, panels: usize, nodes: usize) -> Self {
        let ln_t = t_end.ln();
        let mut coeffs = vec![0.0; panels * nodes];
        let mut values = vec![0.0; nodes];
        let width = 1.0 / panels as f64;
        for p in 0..panels {
            let lo = p as f64 * width;
            for (k, v) in values.iter_mut().enumerate() {
                let x = (PI * (k as f64 + 0.5) / nodes as f64).cos();
                let r = lo + 0.5 * width * (x + 1.0);
                *v = source.eval_times_arg_log(ln_t + 1.0 - 1.0 / r) / (r * r);
            }
            for j in 0..nodes {
                let mut c = 0.0;
                for (k, v) in values.iter().enumerate() {
                    c += v * (PI * j as f64 * (k as f64 + 0.5) / nodes as f64).cos();
                }
                coeffs[p * nodes + j] = c * 2.0 / nodes as f64;
            }
        }
        GridKernel { t_end, ln_t, panels, coeffs, nodes, profile: source.profile() }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    fn scaled_at_r(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, 1.0);
        let p = ((r * self.panels as f64) as usize).min(self.panels - 1);
        let width = 1.0 / self.panels as f64;
        let x = 2.0 * (r - p as f64 * width) / width - 1.0;
        let c = &self.coeffs[p * self.nodes..(p + 1) * self.nodes];
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = ck + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        (0.5 * c[0] + x * b1 - b2) * r * r
    }
}

impl Kernel for GridKernel {
    fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let ln_u = u.ln().min(self.ln_t);
        self.eval_times_arg_log(ln_u) / ln_u.exp()
    }

    /// The source profile, always integrated in log variables: the table only has
    /// absolute accuracy in `u f(u) / r²`, which the exp-log map keeps bounded.
    fn profile(&self) -> SingularityProfile {
        SingularityProfile { log_scale: true, ..self.profile }
    }

    fn eval_times_arg_log(&self, log_u: f64) -> f64 {
        let d = (log_u - self.ln_t).min(0.0);
        self.scaled_at_r(1.0 / (1.0 - d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::kernel::FnKernel;

    /// `1 / (u (1 + ln² u))`, evaluated in log variables.
    struct LogKernel;

    impl Kernel for LogKernel {
        fn eval(&self, u: f64) -> f64 {
            1.0 / (u * (1.0 + u.ln().powi(2)))
        }
        fn profile(&self) -> SingularityProfile {
            SingularityProfile::log_singular(2)
        }
        fn eval_times_arg_log(&self, log_u: f64) -> f64 {
            1.0 / (1.0 + log_u * log_u)
        }
    }

    #[test]
    fn reproduces_smooth_and_log_kernels() {
        let f = FnKernel::new(|u: f64| u.powf(-0.5) * (-u).exp(), SingularityProfile::power(0.5));
        let g = GridKernel::tabulate(&f, 2.0);
        for &u in &[1e-9, 1e-4, 0.01, 0.3, 1.0, 1.99, 2.0] {
            assert!(((g.eval(u) - f.eval(u)) / f.eval(u)).abs() < 1e-10, "u = {u}");
        }
        let g = GridKernel::tabulate(&LogKernel, 1.0);
        let h = LogKernel;
        for &l in &[-5000.0, -650.0, -300.0, -20.0, -1.0, -0.01] {
            let a = g.eval_times_arg_log(l);
            let b = h.eval_times_arg_log(l);
            assert!(((a - b) / b).abs() < 1e-9, "ln u = {l}: {a} vs {b}");
        }
    }
}
