//! Validation reports and the proceed/reject enforcement payloads.

use serde::Serialize;
use serde_json::{Map, Value};

use super::normalize::NormalizedInput;
use crate::graph::Severity;
use crate::value::{NormalizedParameterSet, ParamValue};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub rule_id: String,
    pub parameter: String,
    pub observed: ParamValue,
    pub constraint: String,
    pub severity: Severity,
    pub citation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub status: Status,
    pub violations: Vec<Violation>,
    pub unknown_keys: Vec<String>,
    pub checks_performed: usize,
    pub elapsed_us: f64,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub(crate) fn settle(&mut self, lenient: bool) {
        let blocking = self.errors().next().is_some() || (!lenient && !self.unknown_keys.is_empty());
        self.status = if blocking { Status::Reject } else { Status::Pass };
    }
}

/// Permission to run the computational core on a validated input.
#[derive(Debug, Clone, PartialEq)]
pub struct ProceedToken {
    validated: NormalizedParameterSet,
}

impl ProceedToken {
    pub fn params(&self) -> &NormalizedParameterSet {
        &self.validated
    }

    /// `{ "status": 200, "validated": { key: value, ... } }`
    pub fn payload(&self) -> Value {
        let validated: Map<String, Value> = self
            .validated
            .iter()
            .map(|(k, p)| (k.clone(), p.value.to_json()))
            .collect();
        serde_json::json!({ "status": 200, "validated": validated })
    }
}

/// The 400-path payload: every violation with its citation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemanticException {
    pub status: u16,
    pub errors: Vec<Violation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown_parameters: Vec<String>,
}

impl SemanticException {
    pub fn from_report(report: &ValidationReport) -> Self {
        Self {
            status: 400,
            errors: report.violations.clone(),
            unknown_parameters: report.unknown_keys.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Enforcement {
    Proceed(ProceedToken),
    Reject(SemanticException),
}

/// Turns a report into either a proceed token wrapping the normalized input or
/// the semantic-exception payload.
pub fn enforce(report: &ValidationReport, input: NormalizedInput) -> Enforcement {
    match report.status {
        Status::Pass => Enforcement::Proceed(ProceedToken {
            validated: input.params,
        }),
        Status::Reject => Enforcement::Reject(SemanticException::from_report(report)),
    }
}

pub(crate) fn render_template(template: &str, param: &str, value: &ParamValue, constraint: &str) -> String {
    let template = if template.trim().is_empty() {
        "{param} = {value} violates {constraint}"
    } else {
        template
    };
    template
        .replace("{param}", param)
        .replace("{value}", &value.to_string())
        .replace("{constraint}", constraint)
}
