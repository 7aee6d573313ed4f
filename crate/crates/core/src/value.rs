//! Parameter values and the validation context shared by the graph and the validator.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A parameter value after semantic mapping: a finite number or a categorical token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Token(String),
}

impl ParamValue {
    /// Reads a JSON scalar. Non-finite numbers, booleans, arrays and objects yield `None`.
    pub fn from_json(value: &Value) -> Option<Self> {
        match value {
            Value::Number(n) => n.as_f64().filter(|x| x.is_finite()).map(ParamValue::Number),
            Value::String(s) => Some(ParamValue::Token(s.clone())),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            ParamValue::Number(x) => Some(*x),
            ParamValue::Token(_) => None,
        }
    }

    /// Canonical token used for categorical comparison.
    ///
    /// Integral numbers render without a fractional part, so `3`, `3.0` and `"3"`
    /// all compare equal while `"3 "` does not.
    pub fn token(&self) -> String {
        match self {
            ParamValue::Number(x) => number_token(*x),
            ParamValue::Token(s) => s.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ParamValue::Number(x) => serde_json::Number::from_f64(*x)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            ParamValue::Token(s) => Value::String(s.clone()),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(x) => write!(f, "{}", number_token(*x)),
            ParamValue::Token(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(x: f64) -> Self {
        ParamValue::Number(x)
    }
}

impl From<&str> for ParamValue {
    fn from(s: &str) -> Self {
        ParamValue::Token(s.to_owned())
    }
}

pub(crate) fn number_token(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Canonical token for a JSON scalar appearing in a rules document.
pub(crate) fn json_token(value: &Value) -> Option<String> {
    ParamValue::from_json(value).map(|v| v.token())
}

/// One input parameter mapped onto its graph node, in canonical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedParameter {
    pub key: String,
    pub value: ParamValue,
    pub unit: String,
}

/// Normalized parameters keyed by canonical name.
pub type NormalizedParameterSet = BTreeMap<String, NormalizedParameter>;

/// The global state rules are gated on (facility type, design speed, ...).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValidationContext {
    pub entries: BTreeMap<String, ParamValue>,
}

impl ValidationContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<ParamValue>) -> Self {
        self.entries.insert(key.to_owned(), value.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: &str, value: ParamValue) {
        self.entries.insert(key.to_owned(), value);
    }
}
