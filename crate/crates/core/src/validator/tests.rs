use super::*;
use crate::graph::Severity;
use crate::value::ParamValue;
use proptest::prelude::*;
use serde_json::{json, Map};

fn graph() -> KnowledgeGraph {
    KnowledgeGraph::shipped()
}

fn run(input: Value) -> ValidationReport {
    validate(&graph(), &input, &RelationalBindings::default(), ValidateOptions::default()).unwrap()
}

fn rule_ids(report: &ValidationReport) -> Vec<&str> {
    report.violations.iter().map(|v| v.rule_id.as_str()).collect()
}

fn param(key: &str, value: impl Into<ParamValue>) -> NormalizedParameter {
    NormalizedParameter {
        key: key.into(),
        value: value.into(),
        unit: String::new(),
    }
}

/// The design-rule limits and the auxiliary grade limit written out by hand, with the
/// minimum radius taken from the shipped friction table directly.
fn oracle_valid(input: &Map<String, Value>) -> bool {
    let num = |k: &str| input.get(k).and_then(Value::as_f64);
    if let Some(w) = num("lane_width") {
        if !(9.0..=12.0).contains(&w) {
            return false;
        }
    }
    if let Some(w) = num("shoulder_width") {
        if !(0.0..=8.0).contains(&w) {
            return false;
        }
    }
    if let Some(g) = num("grade") {
        if !(-11.0..=11.0).contains(&g) {
            return false;
        }
    }
    if let Some(c) = input.get("horizontal_class") {
        let ok = match c {
            Value::Number(n) => n.as_f64().is_some_and(|x| x.fract() == 0.0 && (0.0..=5.0).contains(&x)),
            Value::String(s) => ["0", "1", "2", "3", "4", "5"].contains(&s.as_str()),
            _ => false,
        };
        if !ok {
            return false;
        }
    }
    if let Some(p) = input.get("passing_type") {
        if !matches!(p.as_str(), Some("Constrained" | "Zone" | "Lane")) {
            return false;
        }
    }
    if let Some(r) = num("design_radius") {
        let Some(v) = num("design_speed") else { return false };
        let table = [(20.0, 0.27), (30.0, 0.20), (40.0, 0.16), (50.0, 0.14), (55.0, 0.13), (60.0, 0.12), (70.0, 0.10), (80.0, 0.08)];
        let Some(&(_, f)) = table.iter().find(|(s, _)| *s >= v) else { return false };
        if v < 0.0 || r < v * v / (15.0 * (0.08 + f)) {
            return false;
        }
    }
    true
}

#[test]
fn all_table_predicates_satisfied() {
    let r = run(json!({ "lane_width": 11.5, "shoulder_width": 6, "horizontal_class": 1, "passing_type": "Zone" }));
    assert_eq!(r.status, Status::Pass);
    assert!(r.violations.is_empty());
    assert_eq!(r.checks_performed, 4);
}

#[test]
fn negative_lane_width_rejected_with_citation() {
    let r = run(json!({ "lane_width": -3 }));
    assert_eq!(r.status, Status::Reject);
    assert_eq!(rule_ids(&r), ["SF-001"]);
    assert!(r.violations[0].citation.contains("HCM 7th Ed."));
    assert_eq!(r.violations[0].constraint, "lane_width = -3 violates [9, 12] ft");
}

#[test]
fn tight_radius_at_55_mph_rejected() {
    let r = run(json!({ "design_speed": 55, "design_radius": 200 }));
    assert_eq!(r.status, Status::Reject);
    assert_eq!(rule_ids(&r), ["SF-005"]);
    assert!(r.violations[0].citation.contains("AASHTO Green Book"));
    assert!(r.violations[0].constraint.contains("R_min(55 mph) = 960.32 ft"), "{}", r.violations[0].constraint);
}

#[test]
fn missing_operand_is_an_error_violation() {
    let r = run(json!({ "design_radius": 5000 }));
    assert_eq!(r.status, Status::Reject);
    assert_eq!(r.violations[0].rule_id, "SF-005");
    assert_eq!(r.violations[0].severity, Severity::Error);
    assert!(r.violations[0].constraint.contains("design_speed required by SF-005"));
}

#[test]
fn speed_above_friction_table_rejected() {
    let r = run(json!({ "design_speed": 90, "design_radius": 100000 }));
    assert_eq!(rule_ids(&r), ["SF-005"]);
}

#[test]
fn every_violation_is_collected() {
    let r = run(json!({ "lane_width": 13, "shoulder_width": 9, "horizontal_class": 6,
                        "passing_type": "Passing", "design_speed": 55, "design_radius": 200, "grade": 12 }));
    assert_eq!(rule_ids(&r), ["SF-005", "GR-001", "SF-003", "SF-001", "SF-004", "SF-002"]);
    assert_eq!(r.checks_performed, 6);
}

#[test]
fn boundary_inclusivity() {
    let g = graph();
    let b = RelationalBindings::default();
    let sf1 = g.rule("SF-001").unwrap();
    let eval = |x: f64| evaluate_predicate(sf1, &param("lane_width", x), &Default::default(), &b).unwrap();
    assert!(eval(9.0) && eval(12.0) && eval(10.5));
    assert!(!eval(8.99) && !eval(12.01));
    let sf3 = g.rule("SF-003").unwrap();
    assert!(!evaluate_predicate(sf3, &param("horizontal_class", 6.0), &Default::default(), &b).unwrap());
    assert!(evaluate_predicate(sf3, &param("horizontal_class", "5"), &Default::default(), &b).unwrap());
}

#[test]
fn unknown_keys_reject_unless_lenient() {
    let g = graph();
    let b = RelationalBindings::default();
    let input = json!({ "lane_widht": 12 });
    let strict = validate(&g, &input, &b, ValidateOptions::default()).unwrap();
    assert_eq!(strict.status, Status::Reject);
    assert_eq!(strict.unknown_keys, ["lane_widht"]);
    let lenient = validate(&g, &input, &b, ValidateOptions::lenient()).unwrap();
    assert_eq!(lenient.status, Status::Pass);
}

#[test]
fn warnings_do_not_block() {
    let doc = json!({
        "sources": [{ "id": "s", "doc": "D", "ref": "r" }],
        "parameters": [{ "id": "p", "key": "x", "kind": "continuous", "unit": "ft", "binding": "x" }],
        "rules": [{ "id": "W", "rule_type": "range", "severity": "warning", "validates": "x",
                    "predicate": { "min": 0, "max": 1 }, "cited_in": "s", "message_template": "" }]
    });
    let g = KnowledgeGraph::load(doc.to_string().as_bytes()).unwrap();
    let r = validate(&g, &json!({ "x": 5 }), &RelationalBindings::default(), ValidateOptions::default()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.violations.len(), 1);
}

#[test]
fn inactive_context_skips_rules() {
    let r = run(json!({ "facility_type": "freeway", "lane_width": 20 }));
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.checks_performed, 0);
}

#[test]
fn enforcement_payloads() {
    let g = graph();
    let b = RelationalBindings::default();
    let (input, report) = validate_str(&g, r#"{"lane_width": 10}"#, &b, ValidateOptions::default()).unwrap();
    match enforce(&report, input) {
        Enforcement::Proceed(token) => {
            assert_eq!(token.payload(), json!({ "status": 200, "validated": { "lane_width": 10.0 } }));
            assert!(token.params().contains_key("lane_width"));
        }
        other => panic!("{other:?}"),
    }
    let (input, report) =
        validate_str(&g, r#"{"lane_width": 12.01, "shoulder_width": -1}"#, &b, ValidateOptions::default()).unwrap();
    match enforce(&report, input) {
        Enforcement::Reject(exc) => {
            assert_eq!(exc.errors.len(), 2);
            let payload = serde_json::to_value(&exc).unwrap();
            assert_eq!(payload["status"], 400);
            assert_eq!(payload["errors"][0]["rule_id"], "SF-001");
            assert_eq!(payload["errors"][0]["citation"], "HCM 7th Ed., Ch.15");
            assert!(payload.get("unknown_parameters").is_none());
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        validate_str(&g, "{", &b, ValidateOptions::default()),
        Err(InputError::Json(_))
    ));
}

fn arb_input() -> impl Strategy<Value = Map<String, Value>> {
    let lane = prop_oneof![Just(9.0), Just(12.0), Just(8.99), Just(12.01), -5.0f64..20.0];
    let shoulder = prop_oneof![Just(0.0), Just(8.0), Just(-0.01), Just(8.01), -3.0f64..12.0];
    let grade = prop_oneof![Just(11.0), Just(-11.0), Just(11.01), -20.0f64..20.0];
    let class = prop_oneof![(-2i64..9).prop_map(|c| json!(c)), (-2i64..9).prop_map(|c| json!(c.to_string()))];
    let passing = prop_oneof![Just("Constrained"), Just("Zone"), Just("Lane"), Just("zone"), Just("None")];
    let speed = 0.0f64..85.0;
    let radius = -100.0f64..4000.0;
    (
        proptest::option::of(lane),
        proptest::option::of(shoulder),
        proptest::option::of(grade),
        proptest::option::of(class),
        proptest::option::of(passing),
        proptest::option::of(speed),
        proptest::option::of(radius),
    )
        .prop_map(|(l, s, g, c, p, v, r)| {
            let mut m = Map::new();
            l.map(|x| m.insert("lane_width".into(), json!(x)));
            s.map(|x| m.insert("shoulder_width".into(), json!(x)));
            g.map(|x| m.insert("grade".into(), json!(x)));
            c.map(|x| m.insert("horizontal_class".into(), x));
            p.map(|x| m.insert("passing_type".into(), json!(x)));
            v.map(|x| m.insert("design_speed".into(), json!(x)));
            r.map(|x| m.insert("design_radius".into(), json!(x)));
            m
        })
}

proptest! {
    #[test]
    fn verdict_matches_brute_force_oracle(input in arb_input()) {
        let report = run(Value::Object(input.clone()));
        prop_assert_eq!(report.is_pass(), oracle_valid(&input), "{:?}", report);
    }

    #[test]
    fn rejects_are_sound_and_rechecked(input in arb_input()) {
        let g = graph();
        let b = RelationalBindings::default();
        let normalized = normalize(&Value::Object(input), &g).unwrap();
        let report = validate_normalized(&g, &normalized, &b, ValidateOptions::default());
        if report.status == Status::Reject {
            prop_assert!(!report.violations.is_empty() || !report.unknown_keys.is_empty());
        }
        for v in &report.violations {
            prop_assert!(!v.citation.is_empty());
            let rule = g.rule(&v.rule_id).unwrap();
            let p = &normalized.params[&v.parameter];
            prop_assert_eq!(&p.value, &v.observed);
            prop_assert!(!matches!(evaluate_predicate(rule, p, &normalized.params, &b), Ok(true)));
        }
        // one evaluation per active rule per parameter; every shipped rule is active here
        let active: usize = normalized.params.keys()
            .map(|k| g.rules().filter(|r| &r.validates == k).count())
            .sum();
        prop_assert_eq!(report.checks_performed, active);
    }

    #[test]
    fn parameter_order_is_irrelevant(input in arb_input(), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut entries: Vec<_> = input.clone().into_iter().collect();
        entries.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let text = format!(
            "{{{}}}",
            entries.iter().map(|(k, v)| format!("{:?}: {}", k, v)).collect::<Vec<_>>().join(",")
        );
        let g = graph();
        let b = RelationalBindings::default();
        let (_, shuffled) = validate_str(&g, &text, &b, ValidateOptions::default()).unwrap();
        let original = run(Value::Object(input));
        prop_assert_eq!(shuffled.status, original.status);
        let mut a: Vec<_> = shuffled.violations.iter().map(|v| (v.rule_id.clone(), v.parameter.clone())).collect();
        let mut o: Vec<_> = original.violations.iter().map(|v| (v.rule_id.clone(), v.parameter.clone())).collect();
        a.sort();
        o.sort();
        prop_assert_eq!(a, o);
    }
}
