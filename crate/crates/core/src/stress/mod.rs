//! Seeded adversarial stress harness for the semantic validator.
//!
//! Vectors are drawn from a category mix, labelled by [`oracle_valid`] (an
//! independent restatement of the rules), validated through the full
//! pipeline, and tallied into a confusion matrix where "positive" means an
//! invalid design that was rejected.

mod facilities;
mod oracle;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub use facilities::{generate_invalid_facilities, FacilityAttack};
pub use oracle::{oracle_r_min, oracle_valid};

use crate::graph::KnowledgeGraph;
use crate::validator::{validate, RelationalBindings, Status, ValidateOptions};
use crate::value::{NormalizedParameter, NormalizedParameterSet, ParamValue, ValidationContext};

/// Generator used for every stream in this module.
pub type StressRng = ChaCha8Rng;

pub fn stress_rng(seed: u64) -> StressRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Error, PartialEq)]
pub enum StressError {
    #[error("invalid category mix: {0}")]
    Mix(String),
    #[error("F1 is undefined when tp, fp and fn are all zero")]
    UndefinedF1,
    #[error("could not write CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    InRange,
    BoundaryValid,
    BoundaryAttack,
    NegativeDimension,
    CategoricalInvalid,
    RelationalConflict,
    ExcessiveGrade,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::InRange,
        Category::BoundaryValid,
        Category::BoundaryAttack,
        Category::NegativeDimension,
        Category::CategoricalInvalid,
        Category::RelationalConflict,
        Category::ExcessiveGrade,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::InRange => "in_range",
            Category::BoundaryValid => "boundary_valid",
            Category::BoundaryAttack => "boundary_attack",
            Category::NegativeDimension => "negative_dimension",
            Category::CategoricalInvalid => "categorical_invalid",
            Category::RelationalConflict => "relational_conflict",
            Category::ExcessiveGrade => "excessive_grade",
        }
    }

    /// Whether vectors of this category are built to pass.
    pub fn intends_valid(self) -> bool {
        matches!(self, Category::InRange | Category::BoundaryValid)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = StressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| StressError::Mix(format!("unknown category `{s}`")))
    }
}

/// Category weights; they must be non-negative and sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMix {
    weights: BTreeMap<Category, f64>,
}

impl CategoryMix {
    pub fn new(weights: impl IntoIterator<Item = (Category, f64)>) -> Result<Self, StressError> {
        let mut map = BTreeMap::new();
        for (c, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(StressError::Mix(format!("weight for {c} must be finite and >= 0")));
            }
            if map.insert(c, w).is_some() {
                return Err(StressError::Mix(format!("{c} listed twice")));
            }
        }
        let sum: f64 = map.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(StressError::Mix(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self { weights: map })
    }

    /// 26% valid split evenly over the two valid categories, 74% invalid
    /// split evenly over the five attack categories.
    pub fn standard() -> Self {
        let attack = 0.74 / 5.0;
        Self::new([
            (Category::InRange, 0.13),
            (Category::BoundaryValid, 0.13),
            (Category::BoundaryAttack, attack),
            (Category::NegativeDimension, attack),
            (Category::CategoricalInvalid, attack),
            (Category::RelationalConflict, attack),
            (Category::ExcessiveGrade, attack),
        ])
        .expect("standard mix is well formed")
    }

    pub fn weight(&self, c: Category) -> f64 {
        self.weights.get(&c).copied().unwrap_or(0.0)
    }

    /// Integer counts summing to `n` by largest remainder; ties go to the
    /// earlier category.
    pub fn apportion(&self, n: usize) -> BTreeMap<Category, usize> {
        let quotas: Vec<(Category, f64)> = Category::ALL
            .iter()
            .map(|&c| (c, self.weight(c) * n as f64))
            .collect();
        let mut counts: BTreeMap<Category, usize> =
            quotas.iter().map(|&(c, q)| (c, q.floor() as usize)).collect();
        let assigned: usize = counts.values().sum();
        let mut order: Vec<(Category, f64)> = quotas.iter().map(|&(c, q)| (c, q - q.floor())).collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (c, _) in order.into_iter().take(n.saturating_sub(assigned)) {
            *counts.get_mut(&c).expect("all categories present") += 1;
        }
        counts
    }
}

impl Default for CategoryMix {
    fn default() -> Self {
        Self::standard()
    }
}

/// Parses `category=weight` pairs separated by commas.
impl FromStr for CategoryMix {
    type Err = StressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut pairs = Vec::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (name, weight) = item
                .split_once('=')
                .ok_or_else(|| StressError::Mix(format!("expected category=weight, got `{item}`")))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|_| StressError::Mix(format!("bad weight in `{item}`")))?;
            pairs.push((name.trim().parse()?, weight));
        }
        Self::new(pairs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Valid,
    Invalid,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Valid => "valid",
            Label::Invalid => "invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestVector {
    pub id: usize,
    pub category: Category,
    pub params: NormalizedParameterSet,
    pub context: ValidationContext,
    pub ground_truth: Label,
}

impl TestVector {
    /// The request body the validator sees.
    pub fn to_json(&self) -> Value {
        let mut body = Map::new();
        for (k, v) in &self.context.entries {
            body.insert(k.clone(), v.to_json());
        }
        for (k, p) in &self.params {
            body.insert(k.clone(), p.value.to_json());
        }
        Value::Object(body)
    }

    /// `key=value` pairs joined by `;`, for the CSV dump.
    pub fn params_compact(&self) -> String {
        self.params
            .iter()
            .map(|(k, p)| format!("{k}={}", p.value))
            .collect::<Vec<_>>()
            .join(";")
    }
}

const SPEEDS: [f64; 9] = [40.0, 45.0, 50.0, 55.0, 60.0, 65.0, 70.0, 75.0, 80.0];
const PASSING: [&str; 3] = ["Constrained", "Zone", "Lane"];
const BAD_PASSING: [&str; 5] = ["constrained", "Passing", "None", "TwoWay", "lane"];
const BAD_CLASS: [f64; 5] = [6.0, 7.0, 9.0, -1.0, 2.5];

fn put(params: &mut NormalizedParameterSet, key: &str, value: impl Into<ParamValue>, unit: &str) {
    params.insert(
        key.to_owned(),
        NormalizedParameter {
            key: key.to_owned(),
            value: value.into(),
            unit: unit.to_owned(),
        },
    );
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// A design that satisfies every rule, drawn away from the limits.
fn valid_design(rng: &mut StressRng) -> NormalizedParameterSet {
    let mut p = NormalizedParameterSet::new();
    let speed = *SPEEDS.choose(rng).expect("non-empty");
    let limit = oracle_r_min(speed).expect("speeds lie within the friction table");
    put(&mut p, "lane_width", round2(rng.gen_range(9.01..11.99)), "ft");
    put(&mut p, "shoulder_width", round2(rng.gen_range(0.01..7.99)), "ft");
    put(&mut p, "horizontal_class", rng.gen_range(0..=5) as f64, "");
    put(&mut p, "passing_type", *PASSING.choose(rng).expect("non-empty"), "");
    put(&mut p, "design_speed", speed, "mph");
    put(&mut p, "design_radius", (limit * rng.gen_range(1.05..3.0)).ceil(), "ft");
    put(&mut p, "grade", round2(rng.gen_range(-10.99..10.99)), "%");
    p
}

fn mutate(category: Category, p: &mut NormalizedParameterSet, rng: &mut StressRng) {
    match category {
        Category::InRange => {}
        Category::BoundaryValid => match rng.gen_range(0..3) {
            0 => put(p, "lane_width", *[9.0, 12.0].choose(rng).expect("non-empty"), "ft"),
            1 => put(p, "shoulder_width", *[0.0, 8.0].choose(rng).expect("non-empty"), "ft"),
            _ => put(p, "grade", *[-11.0, 11.0].choose(rng).expect("non-empty"), "%"),
        },
        Category::BoundaryAttack => match rng.gen_range(0..3) {
            0 => put(p, "lane_width", *[8.99, 12.01].choose(rng).expect("non-empty"), "ft"),
            1 => put(p, "shoulder_width", *[-0.01, 8.01].choose(rng).expect("non-empty"), "ft"),
            _ => put(p, "grade", *[-11.01, 11.01].choose(rng).expect("non-empty"), "%"),
        },
        Category::NegativeDimension => {
            let x = -round2(rng.gen_range(0.01..20.0));
            match rng.gen_range(0..3) {
                0 => put(p, "lane_width", x, "ft"),
                1 => put(p, "shoulder_width", x, "ft"),
                _ => put(p, "design_radius", x * 100.0, "ft"),
            }
        }
        Category::CategoricalInvalid => {
            if rng.gen_bool(0.5) {
                put(p, "horizontal_class", *BAD_CLASS.choose(rng).expect("non-empty"), "");
            } else {
                put(p, "passing_type", *BAD_PASSING.choose(rng).expect("non-empty"), "");
            }
        }
        Category::RelationalConflict => {
            let speed = *SPEEDS[3..].choose(rng).expect("non-empty");
            let limit = oracle_r_min(speed).expect("speeds lie within the friction table");
            put(p, "design_speed", speed, "mph");
            put(p, "design_radius", (limit * rng.gen_range(0.2..0.95)).floor(), "ft");
        }
        Category::ExcessiveGrade => {
            let g = round2(rng.gen_range(11.5..20.0));
            put(p, "grade", if rng.gen_bool(0.5) { g } else { -g }, "%");
        }
    }
}

/// Deterministic in `(n, seed, mix)`. Category counts follow
/// [`CategoryMix::apportion`]; their order is shuffled.
pub fn generate_vectors(n: usize, seed: u64, mix: &CategoryMix) -> Vec<TestVector> {
    let mut rng = stress_rng(seed);
    let mut plan: Vec<Category> = mix
        .apportion(n)
        .into_iter()
        .flat_map(|(c, k)| std::iter::repeat_n(c, k))
        .collect();
    plan.shuffle(&mut rng);
    plan.into_iter()
        .enumerate()
        .map(|(id, category)| {
            let mut params = valid_design(&mut rng);
            mutate(category, &mut params, &mut rng);
            let context = ValidationContext::new()
                .with("facility_type", "two_lane_highway")
                .with("design_speed", params["design_speed"].value.clone());
            let ground_truth = if oracle_valid(&params) {
                Label::Valid
            } else {
                Label::Invalid
            };
            TestVector {
                id,
                category,
                params,
                context,
                ground_truth,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Invalid, Label::Invalid) => self.tp += 1,
            (Label::Valid, Label::Valid) => self.tn += 1,
            (Label::Valid, Label::Invalid) => self.fp += 1,
            (Label::Invalid, Label::Valid) => self.fn_ += 1,
        }
    }

    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }
}

/// `2tp / (2tp + fp + fn)`.
pub fn f1(tp: usize, fp: usize, fn_: usize) -> Result<f64, StressError> {
    let d = 2 * tp + fp + fn_;
    if d == 0 {
        return Err(StressError::UndefinedF1);
    }
    Ok(2.0 * tp as f64 / d as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub median: f64,
    pub p99: f64,
}

impl LatencyStats {
    /// Median (mean of the middle pair for even counts) and nearest-rank p99.
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 {
            s[n / 2]
        } else {
            (s[n / 2 - 1] + s[n / 2]) / 2.0
        };
        let rank = ((0.99 * n as f64).ceil() as usize).clamp(1, n);
        Self {
            median,
            p99: s[rank - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub category: Category,
    pub ground_truth: Label,
    pub predicted: Label,
    pub violated_rules: Vec<String>,
    pub latency_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressReport {
    pub n: usize,
    pub seed: Option<u64>,
    pub matrix: ConfusionMatrix,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    /// Wall time of one full validation request per vector.
    pub latency_us: LatencyStats,
    #[serde(skip)]
    pub outcomes: Vec<Outcome>,
}

impl StressReport {
    pub fn is_clean(&self) -> bool {
        self.matrix.fp == 0 && self.matrix.fn_ == 0
    }
}

/// Validates each vector through the full request pipeline and tallies the
/// verdicts against the oracle labels.
pub fn run_stress(
    graph: &KnowledgeGraph,
    bindings: &RelationalBindings<f64>,
    vectors: &[TestVector],
) -> StressReport {
    let mut matrix = ConfusionMatrix::default();
    let mut outcomes = Vec::with_capacity(vectors.len());
    for v in vectors {
        let body = v.to_json();
        let start = Instant::now();
        let result = validate(graph, &body, bindings, ValidateOptions::default());
        let latency_us = start.elapsed().as_secs_f64() * 1e6;
        let (predicted, violated_rules) = match result {
            Ok(report) if report.status == Status::Pass => (Label::Valid, Vec::new()),
            Ok(report) => (
                Label::Invalid,
                report.violations.iter().map(|x| x.rule_id.clone()).collect(),
            ),
            Err(_) => (Label::Invalid, Vec::new()),
        };
        matrix.record(v.ground_truth, predicted);
        outcomes.push(Outcome {
            id: v.id,
            category: v.category,
            ground_truth: v.ground_truth,
            predicted,
            violated_rules,
            latency_us,
        });
    }
    let samples: Vec<f64> = outcomes.iter().map(|o| o.latency_us).collect();
    StressReport {
        n: vectors.len(),
        seed: None,
        precision: matrix.precision(),
        recall: matrix.recall(),
        f1: f1(matrix.tp, matrix.fp, matrix.fn_).ok(),
        matrix,
        latency_us: LatencyStats::from_samples(&samples),
        outcomes,
    }
}

/// Generates and runs in one step, recording the seed.
pub fn stress(
    graph: &KnowledgeGraph,
    bindings: &RelationalBindings<f64>,
    n: usize,
    seed: u64,
    mix: &CategoryMix,
) -> (Vec<TestVector>, StressReport) {
    let vectors = generate_vectors(n, seed, mix);
    let mut report = run_stress(graph, bindings, &vectors);
    report.seed = Some(seed);
    (vectors, report)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    id: usize,
    category: &'a str,
    ground_truth: &'a str,
    predicted: &'a str,
    violated_rules: String,
    params: String,
}

/// One row per vector with label, prediction and the violated rules.
/// Latency is left out so the file is reproducible.
pub fn write_csv<W: std::io::Write>(
    out: W,
    vectors: &[TestVector],
    report: &StressReport,
) -> Result<(), StressError> {
    let csv_err = |e: csv::Error| StressError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    for (v, o) in vectors.iter().zip(&report.outcomes) {
        w.serialize(CsvRow {
            id: v.id,
            category: v.category.as_str(),
            ground_truth: v.ground_truth.as_str(),
            predicted: o.predicted.as_str(),
            violated_rules: o.violated_rules.join(";"),
            params: v.params_compact(),
        })
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| StressError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests;
