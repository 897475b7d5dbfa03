//! Machine-readable verification reports.
//!
//! Field order is fixed by the struct definitions, so one report has exactly
//! one serialization. Wall-clock time is only included on request, keeping
//! reports byte-identical across runs.

use acn_core::residual::{Residual, Tolerance};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Preconditions of the check do not hold on this manifold.
    Skipped,
    /// A measurement reported without a pass/fail claim.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    /// The identity or statement the check verifies.
    pub anchor: String,
    pub status: Status,
    /// Worst absolute component of the residual; absent when not computed.
    pub residual: Option<f64>,
    pub backend: String,
    /// Pass threshold; absent on the exact backend, where only zero passes.
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub info: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub spec: String,
    pub backend: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str, spec: &str, backend: &str, seed: u64, checks: Vec<CheckRecord>) -> Self {
        let mut summary = Summary { total: checks.len(), ..Summary::default() };
        for c in &checks {
            match c.status {
                Status::Pass => summary.passed += 1,
                Status::Fail => summary.failed += 1,
                Status::Skipped => summary.skipped += 1,
                Status::Info => summary.info += 1,
            }
        }
        Report {
            tool: "acn-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            spec: spec.into(),
            backend: backend.into(),
            seed,
            checks,
            summary,
            elapsed_ms: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
        let mut out = format!("{} on {} ({})\n", self.command, self.spec, self.backend);
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
                Status::Info => "INFO",
            };
            let residual = c.residual.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
            let value = c.value.as_deref().map(|v| format!("  {v}")).unwrap_or_default();
            out.push_str(&format!("{status}  {:<width$}  {residual:>10}{value}\n", c.id));
        }
        let s = &self.summary;
        out.push_str(&format!(
            "{} checks: {} passed, {} failed, {} skipped, {} info\n",
            s.total, s.passed, s.failed, s.skipped, s.info
        ));
        out
    }
}

/// Builds check records against one backend and threshold.
#[derive(Clone, Debug)]
pub struct Recorder {
    pub backend: String,
    pub tolerance: Option<f64>,
    pub records: Vec<CheckRecord>,
}

impl Recorder {
    pub fn new(backend: &str, tolerance: Option<f64>) -> Self {
        Recorder { backend: backend.into(), tolerance, records: Vec::new() }
    }

    pub fn tol(&self) -> Tolerance {
        Tolerance::strict(self.tolerance.unwrap_or(0.0))
    }

    fn push(&mut self, id: &str, anchor: &str, status: Status, residual: Option<f64>, value: Option<String>) {
        self.records.push(CheckRecord {
            id: id.into(),
            anchor: anchor.into(),
            status,
            residual,
            backend: self.backend.clone(),
            tolerance: self.tolerance,
            value,
        });
    }

    /// Passes when the residual vanishes.
    pub fn zero(&mut self, id: &str, anchor: &str, r: Residual) {
        let status = if r.vanishes(self.tol()) { Status::Pass } else { Status::Fail };
        self.push(id, anchor, status, Some(r.max_abs), None);
    }

    /// Passes when the residual does not vanish.
    pub fn nonzero(&mut self, id: &str, anchor: &str, r: Residual) {
        let status = if r.vanishes(self.tol()) { Status::Fail } else { Status::Pass };
        self.push(id, anchor, status, Some(r.max_abs), None);
    }

    pub fn info(&mut self, id: &str, anchor: &str, residual: Option<f64>, value: impl Into<String>) {
        self.push(id, anchor, Status::Info, residual, Some(value.into()));
    }

    pub fn skipped(&mut self, id: &str, anchor: &str, reason: impl Into<String>) {
        self.push(id, anchor, Status::Skipped, None, Some(reason.into()));
    }

    pub fn failed(&mut self, id: &str, anchor: &str, reason: impl Into<String>) {
        self.push(id, anchor, Status::Fail, None, Some(reason.into()));
    }

    pub fn verdict(&mut self, id: &str, anchor: &str, ok: bool, residual: Option<f64>, value: impl Into<String>) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(id, anchor, status, residual, Some(value.into()));
    }

    /// Records `Ok(residual)` as a zero check and an error as a failure.
    pub fn zero_or_error(&mut self, id: &str, anchor: &str, r: acn_core::Result<Residual>) {
        match r {
            Ok(r) => self.zero(id, anchor, r),
            Err(e) => self.failed(id, anchor, e.to_string()),
        }
    }
}
