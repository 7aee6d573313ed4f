use proptest::prelude::*;

use super::*;
use crate::analysis::{analyze_facility, AnalysisError, CoefficientSet};
use crate::validator::r_min;

fn graph() -> KnowledgeGraph {
    KnowledgeGraph::shipped()
}

fn vector(id: usize, pairs: &[(&str, ParamValue)], truth: Label) -> TestVector {
    let mut params = NormalizedParameterSet::new();
    for (k, v) in pairs {
        put(&mut params, k, v.clone(), "");
    }
    let mut context = ValidationContext::new().with("facility_type", "two_lane_highway");
    if let Some(s) = params.get("design_speed") {
        context.insert("design_speed", s.value.clone());
    }
    TestVector {
        id,
        category: Category::InRange,
        params,
        context,
        ground_truth: truth,
    }
}

#[test]
fn f1_examples() {
    assert_eq!(f1(740, 0, 0), Ok(1.0));
    assert_eq!(f1(0, 0, 0), Err(StressError::UndefinedF1));
    assert_eq!(f1(8, 2, 2), Ok(0.8));
}

#[test]
fn zero_vectors() {
    assert!(generate_vectors(0, 42, &CategoryMix::standard()).is_empty());
    let r = run_stress(&graph(), &RelationalBindings::default(), &[]);
    assert_eq!(r.matrix.total(), 0);
    assert_eq!(r.f1, None);
}

#[test]
fn standard_mix_apportions_exactly() {
    let counts = CategoryMix::standard().apportion(1000);
    assert_eq!(counts[&Category::InRange], 130);
    assert_eq!(counts[&Category::BoundaryValid], 130);
    for c in &Category::ALL[2..] {
        assert_eq!(counts[c], 148);
    }
}

#[test]
fn standard_run_labels_740_260() {
    let v = generate_vectors(1000, 42, &CategoryMix::standard());
    let invalid = v.iter().filter(|t| t.ground_truth == Label::Invalid).count();
    assert_eq!((invalid, v.len() - invalid), (740, 260));
}

#[test]
fn hand_labelled_ten() {
    use ParamValue as P;
    let n = |x: f64| P::Number(x);
    let t = |s: &str| P::Token(s.into());
    let vectors = vec![
        vector(0, &[("lane_width", n(12.01))], Label::Invalid),
        vector(1, &[("lane_width", n(8.99))], Label::Invalid),
        vector(2, &[("shoulder_width", n(-0.01))], Label::Invalid),
        vector(3, &[("horizontal_class", n(6.0))], Label::Invalid),
        vector(4, &[("passing_type", t("Passing"))], Label::Invalid),
        vector(5, &[("design_speed", n(55.0)), ("design_radius", n(200.0))], Label::Invalid),
        vector(6, &[("grade", n(12.0))], Label::Invalid),
        vector(7, &[("lane_width", n(12.0))], Label::Valid),
        vector(8, &[("horizontal_class", n(5.0)), ("passing_type", t("Zone"))], Label::Valid),
        vector(9, &[("design_speed", n(55.0)), ("design_radius", n(961.0))], Label::Valid),
    ];
    for v in &vectors {
        assert_eq!(oracle_valid(&v.params), v.ground_truth == Label::Valid, "vector {}", v.id);
    }
    let r = run_stress(&graph(), &RelationalBindings::default(), &vectors);
    assert_eq!(
        r.matrix,
        ConfusionMatrix { tp: 7, tn: 3, fp: 0, fn_: 0 }
    );
}

#[test]
fn boundary_samples_sit_on_and_just_past_limits() {
    let v = generate_vectors(2000, 7, &CategoryMix::standard());
    let lane = |t: &TestVector| t.params["lane_width"].value.as_number().unwrap();
    let attacks: Vec<f64> = v
        .iter()
        .filter(|t| t.category == Category::BoundaryAttack)
        .map(lane)
        .filter(|w| !(9.0..=12.0).contains(w))
        .collect();
    assert!(!attacks.is_empty());
    assert!(attacks.iter().all(|&w| w == 12.01 || w == 8.99));
    let on_limit = v
        .iter()
        .filter(|t| t.category == Category::BoundaryValid)
        .map(lane)
        .filter(|&w| w == 9.0 || w == 12.0)
        .count();
    assert!(on_limit > 0);
}

#[test]
fn oracle_radius_agrees_with_kernel() {
    let b = RelationalBindings::default();
    for v in [20.0, 25.0, 30.0, 45.0, 55.0, 62.0, 80.0] {
        let ours = oracle_r_min(v).unwrap();
        assert!((ours - r_min(v, &b).unwrap()).abs() < 1e-9);
    }
    assert!((oracle_r_min(55.0).unwrap() - 960.3175).abs() < 1e-4);
    assert_eq!(oracle_r_min(85.0), None);
}

#[test]
fn standard_run_is_perfect() {
    let (_, r) = stress(&graph(), &RelationalBindings::default(), 1000, 42, &CategoryMix::standard());
    assert_eq!(r.matrix, ConfusionMatrix { tp: 740, tn: 260, fp: 0, fn_: 0 });
    assert_eq!(r.f1, Some(1.0));
    assert_eq!(r.precision, Some(1.0));
    assert_eq!(r.recall, Some(1.0));
    assert_eq!(r.seed, Some(42));
}

#[test]
fn twenty_seeds_clean() {
    for seed in 0..20 {
        let (_, r) = stress(&graph(), &RelationalBindings::default(), 500, seed, &CategoryMix::standard());
        assert!(r.is_clean(), "seed {seed}: {:?}", r.matrix);
    }
}

#[test]
fn mutation_is_detected() {
    let mutant = graph().without_rule("SF-005");
    let (_, r) = stress(&mutant, &RelationalBindings::default(), 1000, 42, &CategoryMix::standard());
    assert!(r.matrix.fn_ > 0);
    assert!(!r.is_clean());
}

#[test]
fn mix_parsing() {
    let m: CategoryMix = "in_range=0.5, relational_conflict=0.5".parse().unwrap();
    assert_eq!(m.weight(Category::RelationalConflict), 0.5);
    assert_eq!(m.weight(Category::ExcessiveGrade), 0.0);
    assert!("in_range=0.5".parse::<CategoryMix>().is_err());
    assert!("bogus=1".parse::<CategoryMix>().is_err());
    assert!("in_range=1.5,grade=-0.5".parse::<CategoryMix>().is_err());
    assert!("in_range=0.5,in_range=0.5".parse::<CategoryMix>().is_err());
}

#[test]
fn latency_stats() {
    let s = LatencyStats::from_samples(&[3.0, 1.0, 2.0, 4.0]);
    assert_eq!(s.median, 2.5);
    assert_eq!(s.p99, 4.0);
    let hundred: Vec<f64> = (1..=100).map(f64::from).collect();
    assert_eq!(LatencyStats::from_samples(&hundred).p99, 99.0);
}

#[test]
fn csv_dump_has_one_row_per_vector() {
    let (v, r) = stress(&graph(), &RelationalBindings::default(), 25, 3, &CategoryMix::standard());
    let mut buf = Vec::new();
    write_csv(&mut buf, &v, &r).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 26);
    assert!(text.starts_with("id,category,ground_truth,predicted,violated_rules,params"));
}

#[test]
fn invalid_facilities_are_all_gated() {
    let coeffs = CoefficientSet::<f64>::default();
    let b = RelationalBindings::default();
    let g = graph();
    for (attack, facility) in generate_invalid_facilities(120, 9) {
        match analyze_facility(&facility, &coeffs, &g, &b) {
            Err(AnalysisError::Rejected(e)) => assert!(!e.errors.is_empty()),
            other => panic!("{attack:?} slipped through: {other:?}"),
        }
    }
}

#[test]
fn facility_base_is_valid() {
    // Clean segments must analyse, otherwise a rejection proves nothing
    // about the planted defect.
    let mut rng = stress_rng(5);
    let coeffs = CoefficientSet::<f64>::default();
    for _ in 0..50 {
        let facility = crate::analysis::HighwayFacility {
            name: None,
            facility_type: "two_lane_highway".into(),
            segments: vec![facilities::valid_segment(&mut rng)],
        };
        assert!(analyze_facility(&facility, &coeffs, &graph(), &RelationalBindings::default()).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn labels_match_category_intent(seed in any::<u64>(), n in 0usize..300) {
        for v in generate_vectors(n, seed, &CategoryMix::standard()) {
            prop_assert_eq!(v.ground_truth == Label::Valid, v.category.intends_valid());
        }
    }

    #[test]
    fn generation_reproducible(seed in any::<u64>(), n in 0usize..200) {
        let a = serde_json::to_string(&generate_vectors(n, seed, &CategoryMix::standard())).unwrap();
        let b = serde_json::to_string(&generate_vectors(n, seed, &CategoryMix::standard())).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn no_false_negatives_any_seed(seed in any::<u64>()) {
        let (_, r) = stress(&graph(), &RelationalBindings::default(), 200, seed, &CategoryMix::standard());
        prop_assert_eq!(r.matrix.fn_, 0);
        prop_assert_eq!(r.matrix.fp, 0);
        prop_assert_eq!(r.matrix.total(), 200);
    }

    #[test]
    fn apportion_sums(ws in prop::collection::vec(0.0f64..1.0, 7), n in 0usize..5000) {
        let sum: f64 = ws.iter().sum();
        prop_assume!(sum > 0.0);
        let mix = CategoryMix::new(Category::ALL.iter().copied().zip(ws.iter().map(|w| w / sum))).unwrap();
        let counts = mix.apportion(n);
        prop_assert_eq!(counts.values().sum::<usize>(), n);
        for c in Category::ALL {
            let q = mix.weight(c) * n as f64;
            prop_assert!((counts[&c] as f64 - q).abs() < 1.0 + 1e-9);
        }
    }

    #[test]
    fn f1_formula(tp in 0usize..1000, fp in 0usize..1000, fn_ in 0usize..1000) {
        match f1(tp, fp, fn_) {
            Ok(x) => {
                prop_assert!((0.0..=1.0).contains(&x));
                prop_assert_eq!(x == 1.0, fp == 0 && fn_ == 0 && tp > 0);
            }
            Err(_) => prop_assert_eq!(tp + fp + fn_, 0),
        }
    }
}
