//! Statistical trials tying the analytic side to simulation.

pub mod battery;
pub mod report;
pub mod trials;

pub use battery::{default_battery, TestFunction};
pub use report::{digest, read_reports_csv, write_reports_csv, TrialReport, Verdict};
pub use trials::{
    moment_match_trial, moment_match_trials, positivity_trial, strong_disorder_trial, variance_ratio_trial,
    MOMENT_BAND,
};
