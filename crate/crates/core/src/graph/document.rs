//! Wire form of the rules document.

use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RulesDocument {
    #[serde(default)]
    pub version: String,
    #[serde(default)]
    pub context: Vec<ContextKeyDoc>,
    #[serde(default)]
    pub sources: Vec<SourceDoc>,
    #[serde(default)]
    pub conditions: Vec<ConditionDoc>,
    #[serde(default)]
    pub parameters: Vec<ParameterDoc>,
    #[serde(default)]
    pub rules: Vec<RuleDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ContextKeyDoc {
    pub key: String,
    #[serde(default)]
    pub default: Option<Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SourceDoc {
    pub id: String,
    pub doc: String,
    #[serde(default)]
    pub edition: String,
    #[serde(rename = "ref")]
    pub reference: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ConditionDoc {
    pub id: String,
    #[serde(rename = "match")]
    pub clauses: Vec<ClauseDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ClauseDoc {
    pub key: String,
    pub op: String,
    pub value: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ParameterDoc {
    pub id: String,
    pub key: String,
    pub kind: String,
    #[serde(default)]
    pub unit: String,
    pub binding: String,
    #[serde(default)]
    pub domain: Option<Vec<Value>>,
    #[serde(default)]
    pub affects: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RuleDoc {
    pub id: String,
    pub rule_type: String,
    pub severity: String,
    pub validates: String,
    pub predicate: Value,
    #[serde(default)]
    pub requires: Vec<String>,
    pub cited_in: String,
    pub message_template: String,
}
