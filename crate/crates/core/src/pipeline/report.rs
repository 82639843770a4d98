//! Per-claim verification records, their JSON and text renderings, and
//! tolerance-aware comparison against a golden report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::real17::{self, Real};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimStatus {
    Pass,
    Fail,
    Indeterminate,
}

impl ClaimStatus {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            ClaimStatus::Pass
        } else {
            ClaimStatus::Fail
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClaimStatus::Pass => "pass",
            ClaimStatus::Fail => "fail",
            ClaimStatus::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: u32,
    pub title: String,
    pub anchor: String,
    pub status: ClaimStatus,
    pub measured: BTreeMap<String, Real>,
    pub tolerances: BTreeMap<String, Real>,
    /// Failure reason or other remark; empty when there is nothing to say.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl ClaimRecord {
    pub fn new(id: u32, title: &str, anchor: &str) -> Self {
        ClaimRecord {
            id,
            title: title.to_string(),
            anchor: anchor.to_string(),
            status: ClaimStatus::Indeterminate,
            measured: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            note: String::new(),
        }
    }

    pub fn measure(&mut self, key: &str, value: f64) -> &mut Self {
        self.measured.insert(key.to_string(), Real(value));
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), Real(value));
        self
    }

    /// A record for a stage that errored out.
    pub fn failed(id: u32, title: &str, anchor: &str, err: &crate::Error) -> Self {
        let mut r = ClaimRecord::new(id, title, anchor);
        r.status = ClaimStatus::Fail;
        r.note = err.to_string();
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub pipeline: String,
    pub seed: u64,
    /// SHA-256 of the canonical config JSON.
    pub config_hash: String,
    pub claims: Vec<ClaimRecord>,
}

impl VerificationReport {
    pub fn new(pipeline: &str, seed: u64, config_hash: String) -> Self {
        VerificationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            pipeline: pipeline.to_string(),
            seed,
            config_hash,
            claims: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.status == ClaimStatus::Pass)
    }

    pub fn claim(&self, id: u32) -> Option<&ClaimRecord> {
        self.claims.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "pipeline {} (seed {})", self.pipeline, self.seed);
        for c in &self.claims {
            let _ = writeln!(s, "[{:>13}] {:>2}. {}  ({})", c.status.name(), c.id, c.title, c.anchor);
            for (k, v) in &c.measured {
                let _ = writeln!(s, "      {k} = {}", real17::format(v.0));
            }
            for (k, v) in &c.tolerances {
                let _ = writeln!(s, "      tol {k} = {}", real17::format(v.0));
            }
            if !c.note.is_empty() {
                let _ = writeln!(s, "      note: {}", c.note);
            }
        }
        let passed = self.claims.iter().filter(|c| c.status == ClaimStatus::Pass).count();
        let _ = writeln!(s, "{passed}/{} claims pass", self.claims.len());
        s
    }

    /// Differences against a golden report: claim sets and statuses must match
    /// exactly, measured values to `rel_tol` relative (absolute near zero).
    pub fn compare(&self, golden: &VerificationReport, rel_tol: f64) -> Vec<String> {
        let mut diffs = Vec::new();
        if self.pipeline != golden.pipeline {
            diffs.push(format!("pipeline {} vs {}", self.pipeline, golden.pipeline));
        }
        let ids = |r: &VerificationReport| r.claims.iter().map(|c| c.id).collect::<Vec<_>>();
        if ids(self) != ids(golden) {
            diffs.push(format!("claim ids {:?} vs {:?}", ids(self), ids(golden)));
            return diffs;
        }
        for (a, b) in self.claims.iter().zip(&golden.claims) {
            if a.status != b.status {
                diffs.push(format!("claim {}: status {} vs {}", a.id, a.status.name(), b.status.name()));
            }
            for (k, v) in &b.measured {
                match a.measured.get(k) {
                    None => diffs.push(format!("claim {}: missing {k}", a.id)),
                    Some(x) if !close(x.0, v.0, rel_tol) => {
                        diffs.push(format!("claim {}: {k} = {} vs {}", a.id, x.0, v.0))
                    }
                    Some(_) => {}
                }
            }
            for k in a.measured.keys().filter(|k| !b.measured.contains_key(*k)) {
                diffs.push(format!("claim {}: unexpected {k}", a.id));
            }
        }
        diffs
    }
}

fn close(a: f64, b: f64, rel_tol: f64) -> bool {
    if a.is_nan() || b.is_nan() {
        return a.is_nan() && b.is_nan();
    }
    a == b || (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() <= rel_tol * 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let mut r = VerificationReport::new("verify-all", 7, "ab".into());
        let mut c = ClaimRecord::new(1, "feasibility", "schedule invariants");
        c.measure("eps", 0.5).tolerance("slack", 0.0);
        c.status = ClaimStatus::Pass;
        r.claims.push(c);
        r
    }

    #[test]
    fn json_round_trip_keeps_bits() {
        let mut r = sample();
        r.claims[0].measure("third", 1.0 / 3.0);
        let back = VerificationReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().unwrap().contains("\"status\": \"pass\""));
    }

    #[test]
    fn compare_is_tolerance_aware() {
        let golden = sample();
        let mut r = sample();
        r.claims[0].measure("eps", 0.5 * (1.0 + 1e-9));
        assert!(r.compare(&golden, 1e-6).is_empty());
        assert_eq!(r.compare(&golden, 1e-12).len(), 1);
        r.claims[0].status = ClaimStatus::Fail;
        assert_eq!(r.compare(&golden, 1e-6).len(), 1);
        r.claims.clear();
        assert_eq!(r.compare(&golden, 1e-6).len(), 1);
    }

    #[test]
    fn text_lists_every_claim() {
        let t = sample().to_text();
        assert!(t.contains("feasibility") && t.contains("1/1 claims pass"));
    }
}
