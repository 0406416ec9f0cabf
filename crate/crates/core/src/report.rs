//! Verification reports and their CSV projection.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::numerics::{Nat, PosRational};
use crate::oracle::{Outcome, TheoremCheck, Theorem};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Sound,
    Skipped,
    BoundOnly,
    Failed,
}

impl Status {
    pub fn of(outcome: &Outcome) -> Status {
        match outcome {
            Outcome::Sound => Status::Sound,
            Outcome::Unsound { .. } => Status::Failed,
            Outcome::Skipped { .. } => Status::Skipped,
            Outcome::BoundOnly { .. } => Status::BoundOnly,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: String,
    pub theorem: Theorem,
    pub epsilon: PosRational,
    pub status: Status,
    pub bound: Option<Nat>,
    pub least_n: Option<u64>,
    /// `least_n ≤ bound`, when both are known.
    pub sound: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<TheoremCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl ReportEntry {
    pub fn from_check(id: String, theorem: Theorem, epsilon: PosRational, check: TheoremCheck) -> Self {
        let least_n = check.least_n();
        let bound = check.bound.clone();
        let sound = match (&bound, least_n) {
            (Some(b), Some(n)) => Some(Nat::from(n) <= *b),
            _ => None,
        };
        let mut status = Status::of(&check.outcome);
        if check.pairwise_agrees == Some(false) {
            status = Status::Failed;
        }
        ReportEntry {
            id,
            theorem,
            epsilon,
            status,
            bound,
            least_n,
            sound,
            error: None,
            check: Some(check),
            wall_ms: None,
        }
    }

    pub fn from_error(id: String, theorem: Theorem, epsilon: PosRational, error: String) -> Self {
        ReportEntry {
            id,
            theorem,
            epsilon,
            status: Status::Failed,
            bound: None,
            least_n: None,
            sound: None,
            error: Some(error),
            check: None,
            wall_ms: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub sound: usize,
    pub skipped: usize,
    pub bound_only: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(entries: &[ReportEntry]) -> Self {
        let mut s = Summary {
            total: entries.len(),
            ..Default::default()
        };
        for e in entries {
            match e.status {
                Status::Sound => s.sound += 1,
                Status::Skipped => s.skipped += 1,
                Status::BoundOnly => s.bound_only += 1,
                Status::Failed => s.failed += 1,
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub summary: Summary,
    pub scenarios: Vec<ReportEntry>,
}

impl Report {
    /// Sorts entries by id and tallies them.
    pub fn new(mut entries: Vec<ReportEntry>) -> Self {
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        Report {
            version: REPORT_VERSION,
            summary: Summary::of(&entries),
            scenarios: entries,
        }
    }

    pub fn accepted(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialise");
        s.push('\n');
        s
    }

    pub fn entry(&self, id: &str) -> Option<&ReportEntry> {
        self.scenarios.iter().find(|e| e.id == id)
    }
}

/// Marker in the ratio column when the bound is 0 (then `least_n` is 0 too).
pub const ZERO_BOUND_RATIO: &str = "0/0 exact";

const RATIO_DIGITS: usize = 6;

/// `n/d` as a decimal string truncated to six places.
fn decimal_ratio(n: u64, d: &Nat) -> String {
    let scale = BigUint::from(10u32).pow(RATIO_DIGITS as u32);
    let scaled = BigUint::from(n) * scale.clone();
    let q = scaled.div_floor(d.as_biguint());
    let (int, frac) = q.div_rem(&scale);
    format!("{int}.{frac:0>width$}", width = RATIO_DIGITS)
}

/// One row per scenario: `id,epsilon,bound,least_n,ratio`. Unknown values
/// are left empty.
pub fn emit_plot_data(report: &Report) -> String {
    let mut out = String::from("id,epsilon,bound,least_n,ratio\n");
    for e in &report.scenarios {
        let bound = e.bound.as_ref().map(Nat::to_string).unwrap_or_default();
        let least = e.least_n.map(|n| n.to_string()).unwrap_or_default();
        let ratio = match (&e.bound, e.least_n) {
            (Some(b), Some(_)) if b.is_zero() => ZERO_BOUND_RATIO.to_string(),
            (Some(b), Some(n)) => decimal_ratio(n, b),
            _ => String::new(),
        };
        writeln!(out, "{},{},{},{},{}", csv_field(&e.id), e.epsilon, bound, least, ratio).expect("string write");
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
