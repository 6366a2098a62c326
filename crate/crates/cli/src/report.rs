//! Report schema: versioned header (timestamps isolated there), one record
//! per verification case, and a pass/fail summary. Identical config and seed
//! produce a byte-identical body; only the header timestamp varies.

use crate::config::RunConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Header {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    /// Wall-clock stamp; the only nondeterministic field in a report.
    pub generated_unix_seconds: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Series {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    /// Plain-language statement of the fact this case checks.
    pub claim: String,
    pub measured: Value,
    pub expected: Value,
    pub tolerance: Value,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
}

impl CaseResult {
    pub fn new(
        id: &str,
        claim: &str,
        measured: Value,
        expected: Value,
        tolerance: Value,
        pass: bool,
    ) -> Self {
        CaseResult {
            id: id.to_string(),
            claim: claim.to_string(),
            measured,
            expected,
            tolerance,
            pass,
            series: None,
        }
    }

    pub fn with_series(mut self, headers: &[&str], rows: Vec<Vec<f64>>) -> Self {
        self.series = Some(Series {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows,
        });
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub header: Header,
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
}

impl Report {
    pub fn assemble(suite: &str, cfg: &RunConfig, cases: Vec<CaseResult>) -> Self {
        let passed = cases.iter().filter(|c| c.pass).count();
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Report {
            header: Header {
                schema_version: SCHEMA_VERSION,
                suite: suite.to_string(),
                seed: cfg.seed,
                generated_unix_seconds: now,
            },
            summary: Summary {
                total: cases.len(),
                passed,
                failed: cases.len() - passed,
            },
            cases,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with the timestamp zeroed; used for determinism checks.
    pub fn body_json(&self) -> String {
        let mut clone = self.clone();
        clone.header.generated_unix_seconds = 0;
        clone.to_json()
    }
}
