//! Kernelization results and the report that accompanies them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Instance, Kind};
use crate::preprocess::{LogEntry, RuleError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("pipeline {pipeline} does not accept {kind} instances")]
    KindMismatch { pipeline: String, kind: Kind },
    #[error("invalid modulator: {0}")]
    BadModulator(String),
    #[error("no modulator of size at most {0} found")]
    NoModulator(usize),
    #[error("behavior enumeration guard exceeded ({0} candidates)")]
    GuardExceeded(u64),
    #[error("vertex {0} has no behavior")]
    NoBehavior(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no blended behavior exists")]
    BlendNotFound,
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Mark counts of the marking rules, summed over all applications.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Marks {
    pub red: usize,
    pub blue: usize,
    pub yellow: usize,
    pub green: usize,
}

/// A measured size next to the bound it must respect.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub quantity: String,
    pub measured: u64,
    pub limit: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct KernelReport {
    pub pipeline: String,
    /// Set when a rule answered the instance outright.
    pub decided: Option<bool>,
    /// Number of applications per rule name.
    pub firings: BTreeMap<String, usize>,
    pub log: Vec<LogEntry>,
    pub marks: Marks,
    /// Sum of all budget changes.
    pub budget_delta: i64,
    /// Vertices added to the waypoint set, 1-based ids of the instance they
    /// were promoted in.
    pub promoted: Vec<usize>,
    pub bounds: Vec<BoundCheck>,
    pub stats: BTreeMap<String, u64>,
    pub notes: Vec<String>,
}

impl KernelReport {
    pub fn new(pipeline: &str) -> Self {
        KernelReport {
            pipeline: pipeline.to_string(),
            ..Default::default()
        }
    }

    pub fn record(&mut self, entry: LogEntry) {
        *self.firings.entry(entry.rule.clone()).or_insert(0) += 1;
        self.budget_delta = self.budget_delta.saturating_add(entry.budget_delta);
        self.log.push(entry);
    }

    pub fn bound(&mut self, quantity: &str, measured: u64, limit: u64) {
        self.bounds.push(BoundCheck {
            quantity: quantity.to_string(),
            measured,
            limit,
            holds: measured <= limit,
        });
    }

    /// Keeps the largest value seen for `key`.
    pub fn stat_max(&mut self, key: &str, value: u64) {
        let slot = self.stats.entry(key.to_string()).or_insert(0);
        *slot = (*slot).max(value);
    }

    pub fn stat_add(&mut self, key: &str, value: u64) {
        *self.stats.entry(key.to_string()).or_insert(0) += value;
    }

    pub fn note(&mut self, text: impl Into<String>) {
        let text = text.into();
        if !self.notes.contains(&text) {
            self.notes.push(text);
        }
    }

    pub fn bounds_hold(&self) -> bool {
        self.bounds.iter().all(|b| b.holds)
    }

    pub fn firing_count(&self, rule: &str) -> usize {
        self.firings.get(rule).copied().unwrap_or(0)
    }

    /// Line-oriented text form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "pipeline {}", self.pipeline);
        if let Some(yes) = self.decided {
            let _ = writeln!(s, "DECIDED {}", if yes { "yes" } else { "no" });
        }
        let _ = writeln!(s, "budget_delta {}", self.budget_delta);
        for (rule, count) in &self.firings {
            let _ = writeln!(s, "firing {rule} {count}");
        }
        let m = &self.marks;
        let _ = writeln!(
            s,
            "marks red={} blue={} yellow={} green={}",
            m.red, m.blue, m.yellow, m.green
        );
        if !self.promoted.is_empty() {
            let ids: Vec<String> = self.promoted.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "promoted {}", ids.join(" "));
        }
        for (key, value) in &self.stats {
            let _ = writeln!(s, "stat {key} {value}");
        }
        for b in &self.bounds {
            let verdict = if b.holds { "ok" } else { "VIOLATED" };
            let _ = writeln!(s, "bound {} {} <= {} {verdict}", b.quantity, b.measured, b.limit);
        }
        for n in &self.notes {
            let _ = writeln!(s, "note {n}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelOutcome {
    Decided(bool),
    Kernel(Instance),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelResult {
    pub outcome: KernelOutcome,
    pub report: KernelReport,
}

impl KernelResult {
    pub fn decided(yes: bool, mut report: KernelReport) -> Self {
        report.decided = Some(yes);
        KernelResult {
            outcome: KernelOutcome::Decided(yes),
            report,
        }
    }

    pub fn kernel(inst: Instance, report: KernelReport) -> Self {
        KernelResult {
            outcome: KernelOutcome::Kernel(inst),
            report,
        }
    }

    pub fn instance(&self) -> Option<&Instance> {
        match &self.outcome {
            KernelOutcome::Kernel(i) => Some(i),
            KernelOutcome::Decided(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_counts_and_sums() {
        let mut r = KernelReport::new("fes");
        r.record(LogEntry::new("rr5", [0], -4));
        r.record(LogEntry::new("rr5", [2], -2));
        assert_eq!(r.firing_count("rr5"), 2);
        assert_eq!(r.budget_delta, -6);
        assert_eq!(r.log[1].ids, vec![3]);
    }

    #[test]
    fn text_marks_violations() {
        let mut r = KernelReport::new("fes");
        r.bound("vertices", 9, 8);
        assert!(!r.bounds_hold());
        assert!(r.to_text().contains("bound vertices 9 <= 8 VIOLATED"));
    }
}
