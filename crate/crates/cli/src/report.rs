//! Structured run reports with a canonical byte representation: identical
//! inputs and seed always produce identical report files.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// The reproducibility knobs a run was configured with.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Parameters {
    pub p: u32,
    pub cap_enum: usize,
    pub cap_ambient: usize,
    pub seed: u64,
}

/// One named check with its verdict and an optional structured witness.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, pass: bool) -> CheckResult {
        CheckResult {
            name: name.into(),
            pass,
            detail: None,
            witness: None,
        }
    }

    pub fn detail(mut self, detail: impl Into<String>) -> CheckResult {
        self.detail = Some(detail.into());
        self
    }

    pub fn witness(mut self, witness: serde_json::Value) -> CheckResult {
        self.witness = Some(witness);
        self
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

/// A full run report. Serialization is canonical: objects are emitted with
/// sorted keys and every number is an integer, so equal reports are equal as
/// byte strings. Wall-clock timing is deliberately kept out; it goes to
/// standard output instead.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub parameters: Parameters,
    pub inputs: BTreeMap<String, String>,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: impl Into<String>, parameters: Parameters) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            parameters,
            inputs: BTreeMap::new(),
            checks: Vec::new(),
            summary: Summary {
                passed: 0,
                failed: 0,
            },
        }
    }

    pub fn record_input(&mut self, path: &str, bytes: &[u8]) {
        self.inputs.insert(path.to_owned(), digest_hex(bytes));
    }

    pub fn push(&mut self, check: CheckResult) {
        if check.pass {
            self.summary.passed += 1;
        } else {
            self.summary.failed += 1;
        }
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// The canonical byte representation. `serde_json` maps sort their keys,
    /// so serializing through `Value` fixes the key order.
    pub fn canonical_text(&self) -> String {
        let value = serde_json::to_value(self).expect("report serialization cannot fail");
        let mut text =
            serde_json::to_string_pretty(&value).expect("report serialization cannot fail");
        text.push('\n');
        text
    }

    /// One line per check plus a total, for standard output.
    pub fn human_summary(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let verdict = if check.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("  {verdict} {}", check.name));
            if let Some(detail) = &check.detail {
                out.push_str(&format!(" — {detail}"));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{} checks: {} passed, {} failed\n",
            self.checks.len(),
            self.summary.passed,
            self.summary.failed
        ));
        out
    }
}

pub fn digest_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
