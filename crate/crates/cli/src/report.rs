//! Check records and the canonical JSON report.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::SuiteConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    /// Name of the statement being exercised.
    pub anchor: String,
    pub status: Status,
    pub witness: Value,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: SuiteConfig,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl Report {
    /// Sorts by id and fills in the summary. A failing check without a
    /// witness gets one naming the check.
    pub fn new(config: SuiteConfig, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let mut summary = Summary::default();
        for c in &mut checks {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => {
                    summary.fail += 1;
                    if c.witness.is_null() {
                        c.witness = json!({ "failed": c.id });
                    }
                }
                Status::Inconclusive => summary.inconclusive += 1,
            }
        }
        Self { config, checks, summary }
    }

    /// Pretty JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        // serde_json's default map is ordered, so a round trip through Value sorts keys
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
        out.push('\n');
        out
    }

    pub fn emit(&self, path: Option<&Path>) -> std::io::Result<()> {
        match path {
            Some(p) => std::fs::write(p, self.to_json()),
            None => {
                use std::io::Write;
                std::io::stdout().write_all(self.to_json().as_bytes())
            }
        }
    }

    /// 0 all pass, 1 any fail, 2 inconclusive without fails.
    pub fn exit_status(&self) -> u8 {
        match self.summary {
            Summary { fail: f, .. } if f > 0 => 1,
            Summary { inconclusive: i, .. } if i > 0 => 2,
            _ => 0,
        }
    }
}
