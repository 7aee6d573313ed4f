//! Semantic mapping: input keys onto parameter nodes, in canonical units.

use serde_json::Value;
use thiserror::Error;

use crate::graph::{KnowledgeGraph, ParameterKind, ParameterNode};
use crate::units::suffix_conversion;
use crate::value::{NormalizedParameter, NormalizedParameterSet, ParamValue, ValidationContext};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("input must be a JSON object of parameter values")]
    NotAnObject,
    #[error("`{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("`{key}` declares unit `{suffix}` but `{param}` is measured in {unit}")]
    UnitMismatch {
        key: String,
        suffix: String,
        param: String,
        unit: String,
    },
    #[error("`{key}` maps to `{param}`, which was already given")]
    Duplicate { key: String, param: String },
    #[error("input is not valid JSON: {0}")]
    Json(String),
}

/// Output of the mapping phase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormalizedInput {
    pub params: NormalizedParameterSet,
    pub context: ValidationContext,
    pub unknown_keys: Vec<String>,
}

enum Resolved<'g> {
    Parameter(&'g ParameterNode, f64),
    Context,
    Unknown,
}

fn resolve<'g>(graph: &'g KnowledgeGraph, key: &str) -> Result<Resolved<'g>, InputError> {
    if let Some(node) = graph.find_parameter(key).or_else(|| graph.find_binding(key)) {
        return Ok(Resolved::Parameter(node, 1.0));
    }
    if graph.is_context_key(key) {
        return Ok(Resolved::Context);
    }
    if let Some((stem, suffix)) = key.rsplit_once('_') {
        if let (Some(node), Some((unit, factor))) = (graph.find_parameter(stem), suffix_conversion(suffix)) {
            if node.kind == ParameterKind::Continuous && node.unit == unit {
                return Ok(Resolved::Parameter(node, factor));
            }
            return Err(InputError::UnitMismatch {
                key: key.to_owned(),
                suffix: suffix.to_owned(),
                param: node.key.clone(),
                unit: node.unit.clone(),
            });
        }
    }
    Ok(Resolved::Unknown)
}

/// Maps every key of `input` to a parameter node, a context entry, or the
/// unknown list. Keys may be canonical names, schema bindings, or a canonical
/// name with a unit suffix (`lane_width_m`, `design_speed_kmh`).
pub fn normalize(input: &Value, graph: &KnowledgeGraph) -> Result<NormalizedInput, InputError> {
    let object = input.as_object().ok_or(InputError::NotAnObject)?;
    let mut out = NormalizedInput {
        context: graph.context_defaults(),
        ..Default::default()
    };
    for (key, raw) in object {
        let invalid = |reason: &str| InputError::InvalidValue {
            key: key.clone(),
            reason: reason.to_owned(),
        };
        match resolve(graph, key)? {
            Resolved::Unknown => out.unknown_keys.push(key.clone()),
            Resolved::Context => {
                let value = ParamValue::from_json(raw).ok_or_else(|| invalid("context values must be scalars"))?;
                out.context.insert(key, value);
            }
            Resolved::Parameter(node, factor) => {
                let value = match (node.kind, ParamValue::from_json(raw)) {
                    (_, None) => return Err(invalid("expected a finite number or a token")),
                    (ParameterKind::Continuous, Some(ParamValue::Number(x))) => ParamValue::Number(x * factor),
                    (ParameterKind::Continuous, Some(ParamValue::Token(_))) => {
                        return Err(invalid("continuous parameter needs a number"))
                    }
                    (ParameterKind::Categorical, Some(v)) => v,
                };
                if out.params.contains_key(&node.key) {
                    return Err(InputError::Duplicate {
                        key: key.clone(),
                        param: node.key.clone(),
                    });
                }
                if graph.is_context_key(&node.key) {
                    out.context.insert(&node.key, value.clone());
                }
                out.params.insert(
                    node.key.clone(),
                    NormalizedParameter {
                        key: node.key.clone(),
                        value,
                        unit: node.unit.clone(),
                    },
                );
            }
        }
    }
    Ok(out)
}
