//! Deterministic run reports.
//!
//! The JSON written to disk depends only on (config, seed); wall-clock
//! timings go to stderr instead so reruns are byte-identical.

use serde::Serialize;
use std::collections::BTreeMap;

pub const REPORT_SCHEMA: &str = "takiff-report/v1";

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase", tag = "status", content = "reason")]
pub enum Status {
    Pass,
    Fail(String),
    Skipped(String),
}

impl Status {
    pub fn is_fail(&self) -> bool {
        matches!(self, Status::Fail(_))
    }

    pub fn word(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail(_) => "FAIL",
            Status::Skipped(_) => "SKIP",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// Machine-readable statement of the claim being checked.
    pub claim: &'static str,
    #[serde(flatten)]
    pub status: Status,
    pub counts: BTreeMap<&'static str, i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifacts: Option<serde_json::Value>,
}

impl CheckResult {
    pub fn new(name: &'static str, claim: &'static str) -> Self {
        CheckResult {
            name,
            claim,
            status: Status::Pass,
            counts: BTreeMap::new(),
            artifacts: None,
        }
    }

    pub fn skipped(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Skipped(reason.into());
        self
    }

    pub fn failed(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Fail(reason.into());
        self
    }

    pub fn count(&mut self, key: &'static str, value: i64) -> &mut Self {
        self.counts.insert(key, value);
        self
    }
}

#[derive(Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub seed: u64,
    pub lie: serde_json::Value,
    pub staircase: serde_json::Value,
    pub checks: Vec<CheckResult>,
    pub overall: String,
}

impl Report {
    pub fn new(
        command: &str,
        seed: u64,
        lie: serde_json::Value,
        staircase: serde_json::Value,
        checks: Vec<CheckResult>,
    ) -> Self {
        let overall = if checks.iter().any(|c| c.status.is_fail()) {
            "fail"
        } else {
            "pass"
        };
        Report {
            schema: REPORT_SCHEMA,
            command: command.to_string(),
            seed,
            lie,
            staircase,
            checks,
            overall: overall.to_string(),
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn any_failure(&self) -> bool {
        self.overall == "fail"
    }
}
