use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    TrendPass,
    TrendFail,
    Inconclusive,
}

impl Verdict {
    pub fn passed(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::TrendPass)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::TrendPass => "trend-pass",
            Verdict::TrendFail => "trend-fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub name: String,
    /// SHA-256 of the canonical JSON of the trial inputs.
    pub inputs_digest: String,
    pub samples: usize,
    pub statistic: f64,
    pub standard_error: f64,
    pub verdict: Verdict,
    pub seed: u64,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
}

impl TrialReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn digest<T: Serialize>(inputs: &T) -> Result<String> {
    let json = serde_json::to_vec(inputs).map_err(|e| Error::Format(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(&json)))
}

#[derive(Serialize, Deserialize)]
struct Row {
    name: String,
    inputs_digest: String,
    samples: usize,
    statistic: f64,
    standard_error: f64,
    verdict: Verdict,
    seed: u64,
}

/// One row per trial; diagnostics stay in the JSON form.
pub fn write_reports_csv<W: Write>(reports: &[TrialReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        out.serialize(Row {
            name: r.name.clone(),
            inputs_digest: r.inputs_digest.clone(),
            samples: r.samples,
            statistic: r.statistic,
            standard_error: r.standard_error,
            verdict: r.verdict,
            seed: r.seed,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_reports_csv<R: Read>(r: R) -> Result<Vec<TrialReport>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize::<Row>()
        .map(|row| {
            let row = row?;
            Ok(TrialReport {
                name: row.name,
                inputs_digest: row.inputs_digest,
                samples: row.samples,
                statistic: row.statistic,
                standard_error: row.standard_error,
                verdict: row.verdict,
                seed: row.seed,
                diagnostics: BTreeMap::new(),
            })
        })
        .collect()
}
