//! The planar heat kernel `p(t, x) = exp(−|x|²/2t) / (2πt)`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

pub fn heat_kernel(t: f64, x: [f64; 2]) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("heat kernel requires t > 0, got {t}"));
    }
    Ok(heat_r2(t, x[0] * x[0] + x[1] * x[1]))
}

/// Heat kernel from the squared distance, no argument checks.
#[inline]
pub(crate) fn heat_r2(t: f64, r2: f64) -> f64 {
    (-r2 / (2.0 * t)).exp() / (2.0 * PI * t)
}
