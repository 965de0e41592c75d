//! Machine-readable records of structure checks.

use std::time::Instant;

use crate::numcheck::{Assessment, ResidualSummary, Verdict};
use crate::scalar::Scalar;

/// One named check with its verdict and residual magnitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    /// Label of the axiom or identity being checked.
    pub paper_ref: String,
    pub verdict: Verdict,
    pub max_abs_residual: f64,
    pub max_rel_residual: f64,
    pub detail: Option<String>,
    pub elapsed_ms: f64,
}

impl CheckEntry {
    pub fn new(name: &str, paper_ref: &str, verdict: Verdict) -> Self {
        CheckEntry {
            name: name.to_string(),
            paper_ref: paper_ref.to_string(),
            verdict,
            max_abs_residual: 0.0,
            max_rel_residual: 0.0,
            detail: None,
            elapsed_ms: 0.0,
        }
    }

    pub fn from_assessment<T: Scalar>(name: &str, paper_ref: &str, a: &Assessment<T>) -> Self {
        CheckEntry::new(name, paper_ref, a.verdict).with_summary(&a.summary)
    }

    pub fn with_summary<T: Scalar>(mut self, s: &ResidualSummary<T>) -> Self {
        self.max_abs_residual = s.max_abs.to_f64().unwrap_or(f64::NAN);
        self.max_rel_residual = s.max_rel.to_f64().unwrap_or(f64::NAN);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// An entry for a check that could not be carried out.
    pub fn errored(name: &str, paper_ref: &str, err: impl std::fmt::Display) -> Self {
        CheckEntry::new(name, paper_ref, Verdict::Fail).with_detail(format!("error: {err}"))
    }
}

/// Ordered list of check entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StructureReport {
    pub entries: Vec<CheckEntry>,
}

impl StructureReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs `check`, timing it, and appends its entry. An `Err` becomes a
    /// failing entry.
    pub fn run<E: std::fmt::Display>(
        &mut self,
        name: &str,
        paper_ref: &str,
        check: impl FnOnce() -> Result<CheckEntry, E>,
    ) {
        let start = Instant::now();
        let mut entry = check().unwrap_or_else(|e| CheckEntry::errored(name, paper_ref, e));
        entry.name = name.to_string();
        entry.paper_ref = paper_ref.to_string();
        entry.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        self.entries.push(entry);
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, other: StructureReport) {
        self.entries.extend(other.entries);
    }

    pub fn verdict(&self) -> Verdict {
        self.entries.iter().fold(Verdict::Pass, |v, e| v.and(e.verdict))
    }

    pub fn passes(&self, strict: bool) -> bool {
        self.entries.iter().all(|e| e.verdict.passes(strict))
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Prefixes every entry name with `prefix/`.
    pub fn prefixed(mut self, prefix: &str) -> Self {
        for e in &mut self.entries {
            e.name = format!("{prefix}/{}", e.name);
        }
        self
    }
}
