use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::paths::WeightedPathEnsemble;

/// Nonnegative test functions of a continuum point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Gaussian { center: [f64; 2], sigma: f64 },
    IndicatorBox { lo: [f64; 2], hi: [f64; 2] },
    TwoBump { centers: [[f64; 2]; 2], sigma: f64 },
}

impl TestFunction {
    pub fn name(&self) -> String {
        match self {
            TestFunction::Gaussian { sigma, .. } => format!("gaussian-{sigma}"),
            TestFunction::IndicatorBox { .. } => "indicator-box".into(),
            TestFunction::TwoBump { .. } => "two-bump".into(),
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let bump = |c: [f64; 2], s: f64| (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (2.0 * s * s)).exp();
        match *self {
            TestFunction::Gaussian { center, sigma } => bump(center, sigma),
            TestFunction::IndicatorBox { lo, hi } => {
                if x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1] {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::TwoBump { centers, sigma } => bump(centers[0], sigma) + bump(centers[1], sigma),
        }
    }

    /// Values at each path's position at `time`.
    pub fn on_paths(&self, ensemble: &WeightedPathEnsemble, time: i64) -> Result<Vec<f64>> {
        (0..ensemble.len())
            .map(|i| match ensemble.position(i, time) {
                Some(x) => Ok(self.eval(x)),
                None => domain(format!("time {time} outside the ensemble window")),
            })
            .collect()
    }
}

/// Two Gaussian widths, an indicator box and a two-bump function.
pub fn default_battery() -> Vec<TestFunction> {
    vec![
        TestFunction::Gaussian { center: [0.0, 0.0], sigma: 0.25 },
        TestFunction::Gaussian { center: [0.0, 0.0], sigma: 1.0 },
        TestFunction::IndicatorBox { lo: [-0.5, -0.5], hi: [0.5, 0.5] },
        TestFunction::TwoBump { centers: [[-0.5, 0.0], [0.5, 0.0]], sigma: 0.2 },
    ]
}
