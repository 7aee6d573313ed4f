//! Predicate evaluation for range, categorical and relational rules.

use thiserror::Error;

use super::bindings::{r_min, RadiusError, RelationalBindings};
use crate::graph::{DesignRuleNode, PredicateSpec, RelationalExpr};
use crate::value::{number_token, NormalizedParameter, NormalizedParameterSet, ParamValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredicateError {
    #[error("{operand} required by {rule}")]
    MissingOperand { rule: String, operand: String },
    #[error("{operand} must be numeric for {rule}")]
    NonNumericOperand { rule: String, operand: String },
    #[error(transparent)]
    Radius(#[from] RadiusError),
}

fn numeric(value: &ParamValue) -> Option<f64> {
    match value {
        ParamValue::Number(x) => Some(*x),
        ParamValue::Token(s) => s.trim().parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

fn operand(
    rule: &DesignRuleNode,
    key: &str,
    all: &NormalizedParameterSet,
) -> Result<f64, PredicateError> {
    let param = all.get(key).ok_or_else(|| PredicateError::MissingOperand {
        rule: rule.id.clone(),
        operand: key.to_owned(),
    })?;
    numeric(&param.value).ok_or_else(|| PredicateError::NonNumericOperand {
        rule: rule.id.clone(),
        operand: key.to_owned(),
    })
}

/// `f_r(p)`. Comparisons are exact on `f64`, with inclusive bounds.
pub fn evaluate_predicate(
    rule: &DesignRuleNode,
    value: &NormalizedParameter,
    all_params: &NormalizedParameterSet,
    bindings: &RelationalBindings<f64>,
) -> Result<bool, PredicateError> {
    match &rule.predicate {
        PredicateSpec::Range { min, max } => {
            Ok(numeric(&value.value).is_some_and(|v| *min <= v && v <= *max))
        }
        PredicateSpec::Categorical { allowed } => Ok(allowed.contains(&value.value.token())),
        PredicateSpec::Relational {
            expression: RelationalExpr::MinRadius,
            operands,
        } => {
            let speed = operand(rule, &operands[0], all_params)?;
            let limit = r_min(speed, bindings)?;
            Ok(numeric(&value.value).is_some_and(|radius| radius >= limit))
        }
    }
}

/// Human-readable form of the constraint a rule imposes, for the
/// `{constraint}` placeholder.
pub fn describe_constraint(
    rule: &DesignRuleNode,
    unit: &str,
    all_params: &NormalizedParameterSet,
    bindings: &RelationalBindings<f64>,
) -> String {
    let unit = match unit {
        "1" | "enum" | "" => String::new(),
        u => format!(" {u}"),
    };
    match &rule.predicate {
        PredicateSpec::Range { min, max } => {
            format!("[{}, {}]{unit}", number_token(*min), number_token(*max))
        }
        PredicateSpec::Categorical { allowed } => {
            format!("one of {{{}}}", allowed.iter().cloned().collect::<Vec<_>>().join(", "))
        }
        PredicateSpec::Relational {
            expression: RelationalExpr::MinRadius,
            operands,
        } => match operand(rule, &operands[0], all_params) {
            Ok(speed) => match r_min(speed, bindings) {
                Ok(limit) => format!(
                    "R >= R_min({} mph) = {limit:.2}{unit}",
                    number_token(speed)
                ),
                Err(e) => e.to_string(),
            },
            Err(e) => e.to_string(),
        },
    }
}
