//! The semantic validator: mapping, context resolution, predicate evaluation
//! and enforcement, run in that order for every request.

mod bindings;
mod normalize;
mod predicate;
mod report;

use std::time::Instant;

use serde_json::Value;

pub use bindings::{r_min, BindingsError, RadiusError, RelationalBindings, SHIPPED_BINDINGS};
pub use normalize::{normalize, InputError, NormalizedInput};
pub use predicate::{describe_constraint, evaluate_predicate, PredicateError};
pub use report::{
    enforce, Enforcement, ProceedToken, SemanticException, Status, ValidationReport, Violation,
};

use crate::graph::{DesignRuleNode, KnowledgeGraph};
use crate::value::{NormalizedParameter, NormalizedParameterSet, ValidationContext};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Unknown keys are reported but do not reject.
    pub lenient: bool,
}

impl ValidateOptions {
    pub fn lenient() -> Self {
        Self { lenient: true }
    }
}

/// Outcome of one rule evaluated against one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleCheck {
    pub rule_id: String,
    pub violation: Option<Violation>,
}

/// Evaluates every active rule on one parameter.
pub fn check_parameter(
    graph: &KnowledgeGraph,
    param: &NormalizedParameter,
    all_params: &NormalizedParameterSet,
    context: &ValidationContext,
    bindings: &RelationalBindings<f64>,
) -> Vec<RuleCheck> {
    let Some(node) = graph.find_parameter(&param.key) else {
        return Vec::new();
    };
    graph
        .active_rules(node, context)
        .into_iter()
        .map(|rule| RuleCheck {
            rule_id: rule.id.clone(),
            violation: match evaluate_predicate(rule, param, all_params, bindings) {
                Ok(true) => None,
                Ok(false) => Some(violation(graph, rule, param, all_params, bindings, None)),
                Err(e) => Some(violation(graph, rule, param, all_params, bindings, Some(e))),
            },
        })
        .collect()
}

fn violation(
    graph: &KnowledgeGraph,
    rule: &DesignRuleNode,
    param: &NormalizedParameter,
    all_params: &NormalizedParameterSet,
    bindings: &RelationalBindings<f64>,
    error: Option<PredicateError>,
) -> Violation {
    let constraint = match error {
        Some(e) => e.to_string(),
        None => describe_constraint(rule, &param.unit, all_params, bindings),
    };
    Violation {
        rule_id: rule.id.clone(),
        parameter: param.key.clone(),
        observed: param.value.clone(),
        constraint: report::render_template(&rule.message_template, &param.key, &param.value, &constraint),
        severity: rule.severity,
        citation: graph.citation(rule),
    }
}

/// Phases two to four on an already-mapped input. Every violation is
/// collected; nothing short-circuits.
pub fn validate_normalized(
    graph: &KnowledgeGraph,
    input: &NormalizedInput,
    bindings: &RelationalBindings<f64>,
    options: ValidateOptions,
) -> ValidationReport {
    let started = Instant::now();
    let mut report = run_checks(graph, input, bindings);
    report.settle(options.lenient);
    report.elapsed_us = started.elapsed().as_secs_f64() * 1e6;
    report
}

fn run_checks(
    graph: &KnowledgeGraph,
    input: &NormalizedInput,
    bindings: &RelationalBindings<f64>,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut checks = 0;
    for param in input.params.values() {
        for check in check_parameter(graph, param, &input.params, &input.context, bindings) {
            checks += 1;
            violations.extend(check.violation);
        }
    }
    ValidationReport {
        status: Status::Pass,
        violations,
        unknown_keys: input.unknown_keys.clone(),
        checks_performed: checks,
        elapsed_us: 0.0,
    }
}

/// All four phases on a raw JSON input.
pub fn validate(
    graph: &KnowledgeGraph,
    input: &Value,
    bindings: &RelationalBindings<f64>,
    options: ValidateOptions,
) -> Result<ValidationReport, InputError> {
    let started = Instant::now();
    let normalized = normalize(input, graph)?;
    let mut report = run_checks(graph, &normalized, bindings);
    report.settle(options.lenient);
    report.elapsed_us = started.elapsed().as_secs_f64() * 1e6;
    Ok(report)
}

/// Parses `text` as JSON and validates it.
pub fn validate_str(
    graph: &KnowledgeGraph,
    text: &str,
    bindings: &RelationalBindings<f64>,
    options: ValidateOptions,
) -> Result<(NormalizedInput, ValidationReport), InputError> {
    let value: Value = serde_json::from_str(text).map_err(|e| InputError::Json(e.to_string()))?;
    let normalized = normalize(&value, graph)?;
    let report = validate_normalized(graph, &normalized, bindings, options);
    Ok((normalized, report))
}

#[cfg(test)]
mod tests;
