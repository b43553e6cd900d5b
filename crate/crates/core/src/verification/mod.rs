//! Numerical checks of the well-posedness hypotheses.
//!
//! Each check produces a [`ReportEntry`]. Checks that rest on random
//! sampling report [`Verdict::StatisticalPass`] rather than `Pass`: they are
//! evidence, not proofs.

mod bound_b;
mod derivatives;
mod hypotheses_g;
mod lipschitz;
mod sampler;

pub use bound_b::{check_b, DEFAULT_K2_CAP};
pub use derivatives::{check_s, SCheckOptions};
pub use hypotheses_g::check_g;
pub use lipschitz::{estimate_lb, LbFunctional, LbOptions};
pub use sampler::SegmentSampler;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Version tag written into every serialized report.
pub const REPORT_SCHEMA: &str = "condition-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    StatisticalPass,
}

impl Verdict {
    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::StatisticalPass => "statistical-pass",
        }
    }
}

/// A labelled point at which a check was decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub at: BTreeMap<String, f64>,
}

impl Witness {
    pub fn new(label: impl Into<String>, at: &[(&str, f64)]) -> Self {
        Self {
            label: label.into(),
            at: at.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    pub verdict: Verdict,
    /// Failure locations; non-empty whenever `verdict` is `Fail`.
    pub witness: Vec<Witness>,
    pub samples_used: usize,
    /// Reported numbers (bounds, margins, fitted constants).
    pub values: BTreeMap<String, f64>,
    #[serde(default)]
    pub note: String,
}

impl ReportEntry {
    pub(crate) fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            verdict: Verdict::Pass,
            witness: Vec::new(),
            samples_used: 0,
            values: BTreeMap::new(),
            note: String::new(),
        }
    }

    pub(crate) fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    pub(crate) fn fail(&mut self, w: Witness) {
        self.verdict = Verdict::Fail;
        self.witness.push(w);
    }

    /// Witness with the given label, if any.
    pub fn witness_for(&self, label: &str) -> Option<&Witness> {
        self.witness.iter().find(|w| w.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub schema: String,
    pub entries: Vec<ReportEntry>,
}

impl Default for ConditionReport {
    fn default() -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            entries: Vec::new(),
        }
    }
}

impl ConditionReport {
    pub fn push(&mut self, e: ReportEntry) {
        self.entries.push(e);
    }

    /// No entry failed.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| !e.verdict.is_fail())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "[{}] {} (samples: {})", e.verdict.as_str(), e.name, e.samples_used);
            for (k, v) in &e.values {
                let _ = writeln!(out, "    {k} = {v:e}");
            }
            for w in &e.witness {
                let pts: Vec<String> = w.at.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
                let _ = writeln!(out, "    witness {}: {}", w.label, pts.join(", "));
            }
            if !e.note.is_empty() {
                let _ = writeln!(out, "    note: {}", e.note);
            }
        }
        out
    }
}
