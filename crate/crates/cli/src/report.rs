//! Machine-readable verification report and its human-readable table.

use std::fmt::Write as _;

use metallic_core::ResidualReport64;
use serde::Serialize;

/// Tool metadata attached to every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub dataset_version: String,
    pub tolerance: f64,
    /// Value of `METALLIC_GEO_SEED` when set.
    pub seed: Option<u64>,
}

impl Metadata {
    pub fn new(tolerance: f64, seed: Option<u64>) -> Self {
        Self {
            tool: "metallic-geo".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            dataset_version: crate::dataset::FORMAT_VERSION.into(),
            tolerance,
            seed,
        }
    }
}

/// One named residual. Residuals that could not be evaluated serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

/// Verdict of one record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordReport {
    pub index: usize,
    pub label: String,
    pub pass: bool,
    pub max_residual: f64,
    pub first_failure: Option<String>,
    pub entries: Vec<Entry>,
}

impl RecordReport {
    pub fn from_residuals(index: usize, label: impl Into<String>, rep: &ResidualReport64) -> Self {
        let tol = rep.tol();
        Self {
            index,
            label: label.into(),
            pass: rep.verdict(),
            max_residual: rep.max_residual(),
            first_failure: rep.first_failure().map(|(n, _)| n.to_string()),
            entries: rep
                .entries()
                .iter()
                .map(|(name, r)| Entry {
                    name: name.clone(),
                    residual: *r,
                    pass: *r <= tol,
                })
                .collect(),
        }
    }
}

/// Worst residual of one identity across all records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySummary {
    pub name: String,
    pub max_residual: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub passed: usize,
    pub failed: usize,
    /// Identities in order of first appearance.
    pub identities: Vec<IdentitySummary>,
}

impl Summary {
    fn from_records(records: &[RecordReport]) -> Self {
        let mut identities: Vec<IdentitySummary> = Vec::new();
        for e in records.iter().flat_map(|r| &r.entries) {
            let slot = match identities.iter().position(|s| s.name == e.name) {
                Some(i) => &mut identities[i],
                None => {
                    identities.push(IdentitySummary {
                        name: e.name.clone(),
                        max_residual: 0.0,
                        failures: 0,
                    });
                    identities.last_mut().unwrap()
                }
            };
            if e.residual.is_nan() || e.residual > slot.max_residual {
                slot.max_residual = if slot.max_residual.is_nan() {
                    slot.max_residual
                } else {
                    e.residual
                };
            }
            slot.failures += usize::from(!e.pass);
        }
        let passed = records.iter().filter(|r| r.pass).count();
        Self {
            records: records.len(),
            passed,
            failed: records.len() - passed,
            identities,
        }
    }
}

/// Full report of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub metadata: Metadata,
    pub records: Vec<RecordReport>,
    pub summary: Summary,
    /// Extra scalar diagnostics, such as the continuity constant of a family sweep.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<(String, f64)>,
}

impl Report {
    pub fn new(metadata: Metadata, records: Vec<RecordReport>) -> Self {
        let summary = Summary::from_records(&records);
        Self {
            metadata,
            records,
            summary,
            notes: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-record table, failing identities and the per-identity summary.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let lw = self
            .records
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let _ = writeln!(
            out,
            "{:>5}  {:<lw$}  {:>7}  {:>12}  first failure",
            "#", "label", "verdict", "max resid"
        );
        for r in &self.records {
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            let first = r.first_failure.as_deref().unwrap_or("-");
            let _ = writeln!(
                out,
                "{:>5}  {:<lw$}  {verdict:>7}  {:>12.3e}  {first}",
                r.index, r.label, r.max_residual
            );
            for e in r.entries.iter().filter(|e| !e.pass) {
                let _ = writeln!(
                    out,
                    "{:>5}  {:<lw$}      failed {}: {:.3e}",
                    "", "", e.name, e.residual
                );
            }
        }
        let nw = self
            .summary
            .identities
            .iter()
            .map(|s| s.name.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let _ = writeln!(out, "\n{:<nw$}  {:>12}  failures", "identity", "max resid");
        for s in &self.summary.identities {
            let _ = writeln!(
                out,
                "{:<nw$}  {:>12.3e}  {}",
                s.name, s.max_residual, s.failures
            );
        }
        for (name, value) in &self.notes {
            let _ = writeln!(out, "{name}: {value:.3e}");
        }
        let _ = write!(
            out,
            "\n{} of {} records pass (tol {:e}): {}",
            self.summary.passed,
            self.summary.records,
            self.metadata.tolerance,
            if self.pass() { "PASS" } else { "FAIL" }
        );
        out
    }
}
