//! Design-rule knowledge graph.
//!
//! Four node classes are held in keyed maps: parameters, design rules,
//! conditions and provenance sources. Edges are stored as references on the
//! source node:
//!
//! | edge        | from      | to         | field                       |
//! |-------------|-----------|------------|-----------------------------|
//! | VALIDATES   | rule      | parameter  | [`DesignRuleNode::validates`] |
//! | REQUIRES    | rule      | condition  | [`DesignRuleNode::requires`]  |
//! | AFFECTS     | parameter | parameter  | [`ParameterNode::affects`]    |
//! | CITED_IN    | rule      | source     | [`DesignRuleNode::cited_in`]  |
//!
//! Every reference is resolved when the document is loaded, so a
//! [`KnowledgeGraph`] value is referentially closed. There is no mutation API.

mod document;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::value::{json_token, ParamValue, ValidationContext};
use document::{ClauseDoc, RuleDoc, RulesDocument};

/// The rules document shipped with the repository (two-lane highways).
pub const SHIPPED_RULES: &str = include_str!("../../../../rules/two_lane_highway.json");

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("rules document is not valid JSON for the rules schema: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema violation in `{id}`: {reason}")]
    Schema { id: String, reason: String },
    #[error("duplicate id `{id}`")]
    DuplicateId { id: String },
    #[error("`{id}` has a dangling {edge} reference to `{target}`")]
    DanglingReference {
        id: String,
        edge: &'static str,
        target: String,
    },
    #[error("parameter `{0}` not found")]
    NotFound(String),
}

fn schema(id: &str, reason: impl Into<String>) -> GraphError {
    GraphError::Schema {
        id: id.to_owned(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterNode {
    pub id: String,
    pub key: String,
    pub kind: ParameterKind,
    pub unit: String,
    pub binding: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<String>>,
    pub affects: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleType {
    Range,
    Categorical,
    Relational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Relational predicates the validator knows how to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationalExpr {
    /// `value >= R_min(operand[0])`, operand being a design speed.
    MinRadius,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum PredicateSpec {
    Range {
        min: f64,
        max: f64,
    },
    Categorical {
        allowed: BTreeSet<String>,
    },
    Relational {
        expression: RelationalExpr,
        operands: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignRuleNode {
    pub id: String,
    pub rule_type: RuleType,
    pub severity: Severity,
    pub predicate: PredicateSpec,
    pub validates: String,
    pub requires: Vec<String>,
    pub cited_in: String,
    pub message_template: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparator {
    Eq,
    In,
    Ge,
    Le,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionClause {
    pub key: String,
    pub op: Comparator,
    pub value: Value,
}

impl ConditionClause {
    /// A clause whose key is absent from the context never matches.
    pub fn matches(&self, context: &ValidationContext) -> bool {
        let Some(actual) = context.get(&self.key) else {
            return false;
        };
        match self.op {
            Comparator::Eq => json_token(&self.value).is_some_and(|t| t == actual.token()),
            Comparator::In => match &self.value {
                Value::Array(items) => items
                    .iter()
                    .filter_map(json_token)
                    .any(|t| t == actual.token()),
                _ => false,
            },
            Comparator::Ge => match (actual.as_number(), self.value.as_f64()) {
                (Some(a), Some(b)) => a >= b,
                _ => false,
            },
            Comparator::Le => match (actual.as_number(), self.value.as_f64()) {
                (Some(a), Some(b)) => a <= b,
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionNode {
    pub id: String,
    #[serde(rename = "match")]
    pub clauses: Vec<ConditionClause>,
}

impl ConditionNode {
    pub fn matches(&self, context: &ValidationContext) -> bool {
        self.clauses.iter().all(|c| c.matches(context))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvenanceNode {
    pub id: String,
    pub doc: String,
    pub edition: String,
    #[serde(rename = "ref")]
    pub reference: String,
}

impl ProvenanceNode {
    /// `"<doc> <edition>, <ref>"`, dropping the parts that are empty.
    pub fn citation(&self) -> String {
        let mut out = self.doc.clone();
        if !self.edition.is_empty() {
            out.push(' ');
            out.push_str(&self.edition);
        }
        if !self.reference.is_empty() {
            out.push_str(", ");
            out.push_str(&self.reference);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KnowledgeGraph {
    version: String,
    context: BTreeMap<String, Option<ParamValue>>,
    parameters: BTreeMap<String, ParameterNode>,
    rules: BTreeMap<String, DesignRuleNode>,
    conditions: BTreeMap<String, ConditionNode>,
    sources: BTreeMap<String, ProvenanceNode>,
    #[serde(skip)]
    rules_by_parameter: HashMap<String, Vec<String>>,
    #[serde(skip)]
    bindings: HashMap<String, String>,
}

impl KnowledgeGraph {
    /// Parses and checks a rules document.
    pub fn load(document: &[u8]) -> Result<Self, GraphError> {
        let doc: RulesDocument = serde_json::from_slice(document)?;
        Self::from_document(doc)
    }

    /// The shipped two-lane highway rules.
    pub fn shipped() -> Self {
        Self::load(SHIPPED_RULES.as_bytes()).expect("shipped rules document is valid")
    }

    fn from_document(doc: RulesDocument) -> Result<Self, GraphError> {
        let mut ids = BTreeSet::new();
        let mut claim = |id: &str| -> Result<(), GraphError> {
            if id.is_empty() {
                return Err(schema(id, "empty id"));
            }
            if !ids.insert(id.to_owned()) {
                return Err(GraphError::DuplicateId { id: id.to_owned() });
            }
            Ok(())
        };

        let mut context = BTreeMap::new();
        for entry in doc.context {
            let default = match &entry.default {
                None => None,
                Some(v) => Some(
                    ParamValue::from_json(v)
                        .ok_or_else(|| schema(&entry.key, "context default must be a scalar"))?,
                ),
            };
            if context.insert(entry.key.clone(), default).is_some() {
                return Err(GraphError::DuplicateId { id: entry.key });
            }
        }

        let mut sources = BTreeMap::new();
        for s in doc.sources {
            claim(&s.id)?;
            if s.doc.trim().is_empty() {
                return Err(schema(&s.id, "source doc title is empty"));
            }
            sources.insert(
                s.id.clone(),
                ProvenanceNode {
                    id: s.id,
                    doc: s.doc,
                    edition: s.edition,
                    reference: s.reference,
                },
            );
        }

        let mut conditions = BTreeMap::new();
        for c in doc.conditions {
            claim(&c.id)?;
            if c.clauses.is_empty() {
                return Err(schema(&c.id, "condition match list is empty"));
            }
            let clauses = c
                .clauses
                .into_iter()
                .map(|clause| parse_clause(&c.id, clause, &context))
                .collect::<Result<Vec<_>, _>>()?;
            conditions.insert(c.id.clone(), ConditionNode { id: c.id, clauses });
        }

        let mut parameters = BTreeMap::new();
        let mut bindings = HashMap::new();
        for p in doc.parameters {
            claim(&p.id)?;
            let kind = match p.kind.as_str() {
                "continuous" => ParameterKind::Continuous,
                "categorical" => ParameterKind::Categorical,
                other => return Err(schema(&p.id, format!("unknown parameter kind `{other}`"))),
            };
            let domain = match (kind, p.domain) {
                (ParameterKind::Continuous, _) if p.unit.is_empty() => {
                    return Err(schema(&p.id, "continuous parameter needs a unit"))
                }
                (ParameterKind::Categorical, None) => {
                    return Err(schema(&p.id, "categorical parameter needs a domain"))
                }
                (ParameterKind::Categorical, Some(d)) if d.is_empty() => {
                    return Err(schema(&p.id, "categorical domain is empty"))
                }
                (_, Some(d)) => Some(
                    d.iter()
                        .map(|v| json_token(v).ok_or_else(|| schema(&p.id, "domain values must be scalars")))
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                (_, None) => None,
            };
            if p.binding.is_empty() {
                return Err(schema(&p.id, "empty binding"));
            }
            if let Some(other) = bindings.insert(p.binding.clone(), p.key.clone()) {
                return Err(schema(&p.id, format!("binding `{}` already used by `{other}`", p.binding)));
            }
            if parameters.contains_key(&p.key) {
                return Err(GraphError::DuplicateId { id: p.key });
            }
            parameters.insert(
                p.key.clone(),
                ParameterNode {
                    id: p.id,
                    key: p.key,
                    kind,
                    unit: p.unit,
                    binding: p.binding,
                    domain,
                    affects: p.affects,
                },
            );
        }
        for p in parameters.values() {
            for target in &p.affects {
                if !parameters.contains_key(target) {
                    return Err(GraphError::DanglingReference {
                        id: p.id.clone(),
                        edge: "AFFECTS",
                        target: target.clone(),
                    });
                }
            }
        }

        let mut rules = BTreeMap::new();
        let mut rules_by_parameter: HashMap<String, Vec<String>> = HashMap::new();
        for r in doc.rules {
            claim(&r.id)?;
            let rule = parse_rule(r, &parameters, &conditions, &sources)?;
            rules_by_parameter
                .entry(rule.validates.clone())
                .or_default()
                .push(rule.id.clone());
            rules.insert(rule.id.clone(), rule);
        }
        for ids in rules_by_parameter.values_mut() {
            ids.sort();
        }

        Ok(Self {
            version: doc.version,
            context,
            parameters,
            rules,
            conditions,
            sources,
            rules_by_parameter,
            bindings,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn parameters(&self) -> impl Iterator<Item = &ParameterNode> {
        self.parameters.values()
    }

    pub fn rules(&self) -> impl Iterator<Item = &DesignRuleNode> {
        self.rules.values()
    }

    pub fn rule(&self, id: &str) -> Option<&DesignRuleNode> {
        self.rules.get(id)
    }

    pub fn condition(&self, id: &str) -> Option<&ConditionNode> {
        self.conditions.get(id)
    }

    pub fn source(&self, id: &str) -> Option<&ProvenanceNode> {
        self.sources.get(id)
    }

    pub fn is_context_key(&self, key: &str) -> bool {
        self.context.contains_key(key)
    }

    /// Context entries that have a declared default value.
    pub fn context_defaults(&self) -> ValidationContext {
        let mut ctx = ValidationContext::new();
        for (k, v) in &self.context {
            if let Some(v) = v {
                ctx.insert(k, v.clone());
            }
        }
        ctx
    }

    /// Exact lookup on the canonical key.
    pub fn find_parameter(&self, key: &str) -> Option<&ParameterNode> {
        self.parameters.get(key)
    }

    /// Lookup by the analysis-input field name a parameter is bound to.
    pub fn find_binding(&self, field: &str) -> Option<&ParameterNode> {
        self.bindings.get(field).and_then(|k| self.parameters.get(k))
    }

    /// Rules validating `parameter` whose required conditions all match `context`,
    /// sorted by rule id.
    pub fn active_rules(
        &self,
        parameter: &ParameterNode,
        context: &ValidationContext,
    ) -> Vec<&DesignRuleNode> {
        let Some(ids) = self.rules_by_parameter.get(&parameter.key) else {
            return Vec::new();
        };
        ids.iter()
            .map(|id| &self.rules[id])
            .filter(|rule| {
                rule.requires
                    .iter()
                    .all(|c| self.conditions[c].matches(context))
            })
            .collect()
    }

    /// Citation string for the source a rule is cited in.
    pub fn citation(&self, rule: &DesignRuleNode) -> String {
        self.sources
            .get(&rule.cited_in)
            .map(ProvenanceNode::citation)
            .unwrap_or_else(|| rule.cited_in.clone())
    }

    /// Every parameter reachable from `key` over AFFECTS edges, `key` itself excluded.
    pub fn affects_closure(&self, key: &str) -> Result<BTreeSet<String>, GraphError> {
        let start = self
            .parameters
            .get(key)
            .ok_or_else(|| GraphError::NotFound(key.to_owned()))?;
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&str> = start.affects.iter().map(String::as_str).collect();
        while let Some(next) = queue.pop_front() {
            if next == key || !seen.insert(next.to_owned()) {
                continue;
            }
            queue.extend(self.parameters[next].affects.iter().map(String::as_str));
        }
        Ok(seen)
    }

    /// Deterministic serialized form (all maps are ordered).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    /// A copy of the graph with one rule removed. Used to prove the stress
    /// harness notices a weakened rule set.
    pub fn without_rule(&self, id: &str) -> Self {
        let mut copy = self.clone();
        copy.rules.remove(id);
        for ids in copy.rules_by_parameter.values_mut() {
            ids.retain(|r| r != id);
        }
        copy
    }
}

fn parse_clause(
    condition_id: &str,
    clause: ClauseDoc,
    context: &BTreeMap<String, Option<ParamValue>>,
) -> Result<ConditionClause, GraphError> {
    if !context.is_empty() && !context.contains_key(&clause.key) {
        return Err(schema(
            condition_id,
            format!("context key `{}` is not declared", clause.key),
        ));
    }
    let op = match clause.op.as_str() {
        "eq" => Comparator::Eq,
        "in" => Comparator::In,
        "ge" => Comparator::Ge,
        "le" => Comparator::Le,
        other => return Err(schema(condition_id, format!("unknown comparator `{other}`"))),
    };
    let shape_ok = match op {
        Comparator::Eq => json_token(&clause.value).is_some(),
        Comparator::In => clause.value.is_array(),
        Comparator::Ge | Comparator::Le => clause.value.is_number(),
    };
    if !shape_ok {
        return Err(schema(
            condition_id,
            format!("value does not fit comparator `{}`", clause.op),
        ));
    }
    Ok(ConditionClause {
        key: clause.key,
        op,
        value: clause.value,
    })
}

fn parse_rule(
    r: RuleDoc,
    parameters: &BTreeMap<String, ParameterNode>,
    conditions: &BTreeMap<String, ConditionNode>,
    sources: &BTreeMap<String, ProvenanceNode>,
) -> Result<DesignRuleNode, GraphError> {
    let dangling = |edge, target: &str| GraphError::DanglingReference {
        id: r.id.clone(),
        edge,
        target: target.to_owned(),
    };
    if !parameters.contains_key(&r.validates) {
        return Err(dangling("VALIDATES", &r.validates));
    }
    for c in &r.requires {
        if !conditions.contains_key(c) {
            return Err(dangling("REQUIRES", c));
        }
    }
    if !sources.contains_key(&r.cited_in) {
        return Err(dangling("CITED_IN", &r.cited_in));
    }
    let severity = match r.severity.as_str() {
        "error" => Severity::Error,
        "warning" => Severity::Warning,
        other => return Err(schema(&r.id, format!("unknown severity `{other}`"))),
    };
    let (rule_type, predicate) = match r.rule_type.as_str() {
        "range" => {
            let bound = |name: &str| {
                r.predicate
                    .get(name)
                    .and_then(Value::as_f64)
                    .ok_or_else(|| schema(&r.id, format!("range predicate needs numeric `{name}`")))
            };
            let (min, max) = (bound("min")?, bound("max")?);
            if min > max {
                return Err(schema(&r.id, "range predicate has min > max"));
            }
            (RuleType::Range, PredicateSpec::Range { min, max })
        }
        "categorical" => {
            let allowed = r
                .predicate
                .get("allowed")
                .and_then(Value::as_array)
                .ok_or_else(|| schema(&r.id, "categorical predicate needs an `allowed` list"))?
                .iter()
                .map(|v| json_token(v).ok_or_else(|| schema(&r.id, "allowed values must be scalars")))
                .collect::<Result<BTreeSet<_>, _>>()?;
            if allowed.is_empty() {
                return Err(schema(&r.id, "categorical predicate allows nothing"));
            }
            (RuleType::Categorical, PredicateSpec::Categorical { allowed })
        }
        "relational" => {
            let expression = match r.predicate.get("expression").and_then(Value::as_str) {
                Some("min_radius") => RelationalExpr::MinRadius,
                Some(other) => {
                    return Err(schema(&r.id, format!("unknown relational expression `{other}`")))
                }
                None => return Err(schema(&r.id, "relational predicate needs an `expression`")),
            };
            let operands = r
                .predicate
                .get("operands")
                .and_then(Value::as_array)
                .ok_or_else(|| schema(&r.id, "relational predicate needs `operands`"))?
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| schema(&r.id, "operands must be parameter keys"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if operands.len() != 1 {
                return Err(schema(&r.id, "min_radius takes exactly one operand (design speed)"));
            }
            for op in &operands {
                if !parameters.contains_key(op) {
                    return Err(dangling("operand", op));
                }
            }
            (
                RuleType::Relational,
                PredicateSpec::Relational {
                    expression,
                    operands,
                },
            )
        }
        other => return Err(schema(&r.id, format!("unknown rule_type `{other}`"))),
    };
    Ok(DesignRuleNode {
        id: r.id,
        rule_type,
        severity,
        predicate,
        validates: r.validates,
        requires: r.requires,
        cited_in: r.cited_in,
        message_template: r.message_template,
    })
}
