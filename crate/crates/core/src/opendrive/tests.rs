use proptest::prelude::*;

use super::*;
use crate::graph::KnowledgeGraph;
use crate::validator::RelationalBindings;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/xodr");

fn fixture(name: &str) -> Vec<u8> {
    std::fs::read(format!("{FIXTURES}/{name}")).unwrap()
}

fn audit(name: &str) -> ComplianceReport {
    let net = parse_opendrive(name, &fixture(&format!("{name}.xodr"))).unwrap();
    validate_asset(
        &net,
        &KnowledgeGraph::shipped(),
        &RelationalBindings::default(),
        &IngestConfig::default(),
    )
}

fn values(params: &[NormalizedParameter], key: &str) -> Vec<f64> {
    params
        .iter()
        .filter(|p| p.key == key)
        .map(|p| p.value.as_number().unwrap())
        .collect()
}

#[test]
fn minimal_fixture_has_one_straight_road() {
    let net = parse_opendrive("minimal", &fixture("minimal.xodr")).unwrap();
    assert_eq!(net.roads.len(), 1);
    let road = &net.roads[0];
    assert_eq!(road.geometry.len(), 1);
    assert_eq!(road.geometry[0].shape, Shape::Line);
    assert_eq!(road.lane_sections.len(), 1);
    assert_eq!(road.speed_limit, None);
}

#[test]
fn empty_network() {
    let net = parse_opendrive("empty", b"<OpenDRIVE><header/></OpenDRIVE>").unwrap();
    assert!(net.roads.is_empty());
    let report = validate_asset(
        &net,
        &KnowledgeGraph::shipped(),
        &RelationalBindings::default(),
        &IngestConfig::default(),
    );
    assert_eq!(report.params_checked, 0);
    assert_eq!(report.pass_rate, None);
    assert_eq!(report.pass_rate_label(), "n/a");
}

#[test]
fn truncated_file_reports_byte_offset() {
    let bytes = fixture("truncated.xodr");
    match parse_opendrive("truncated", &bytes) {
        Err(OdrError::Xml { line, offset, .. }) => {
            assert_eq!(line, 17);
            assert_eq!(offset, bytes.len());
        }
        other => panic!("expected XML error, got {other:?}"),
    }
}

#[test]
fn xml_error_offset_points_at_the_reported_position() {
    let text = "<OpenDRIVE>\n  <header/>\n  <road id=\"1\" length=\"x\"\n</OpenDRIVE>";
    let Err(OdrError::Xml { line, column, offset, .. }) = parse_opendrive("bad", text.as_bytes()) else {
        panic!("expected XML error");
    };
    let prefix = &text[..offset];
    assert_eq!(prefix.matches('\n').count() + 1, line as usize);
    let line_start = prefix.rfind('\n').map_or(0, |i| i + 1);
    assert_eq!(prefix[line_start..].chars().count() + 1, column as usize);
}

#[test]
fn missing_header_is_fatal() {
    let err = parse_opendrive("nh", &fixture("no_header.xodr")).unwrap_err();
    assert_eq!(err, OdrError::MissingHeader { line: 2, column: 1 });
}

#[test]
fn wrong_root_is_fatal() {
    assert!(matches!(
        parse_opendrive("x", b"<Network><header/></Network>"),
        Err(OdrError::NotOpenDrive { .. })
    ));
}

#[test]
fn duplicate_road_ids_rejected() {
    let xml = br#"<OpenDRIVE><header/><road id="7" length="1"/><road id="7" length="2"/></OpenDRIVE>"#;
    assert!(matches!(parse_opendrive("d", xml), Err(OdrError::Invalid { .. })));
}

#[test]
fn decreasing_geometry_offsets_rejected() {
    let xml = br#"<OpenDRIVE><header/><road id="1" length="20"><planView>
        <geometry s="10" length="10"><line/></geometry>
        <geometry s="0" length="10"><line/></geometry>
      </planView></road></OpenDRIVE>"#;
    assert!(matches!(parse_opendrive("g", xml), Err(OdrError::Invalid { line: 3, .. })));
}

#[test]
fn zero_curvature_arc_reads_as_line() {
    let xml = br#"<OpenDRIVE><header/><road id="1" length="5"><planView>
        <geometry s="0" length="5"><arc curvature="0.0"/></geometry>
      </planView></road></OpenDRIVE>"#;
    let net = parse_opendrive("z", xml).unwrap();
    assert_eq!(net.roads[0].geometry[0].shape, Shape::Line);
}

#[test]
fn speed_records() {
    let xml = br#"<OpenDRIVE><header/>
      <road id="1" length="5"><type s="0" type="town"><speed max="no limit"/></type></road>
      <road id="2" length="5"><type s="0" type="rural"><speed max="25"/></type></road>
      <road id="3" length="5"><type s="0" type="motorway"><speed max="100" unit="km/h"/></type></road>
    </OpenDRIVE>"#;
    let net = parse_opendrive("s", xml).unwrap();
    assert_eq!(net.roads[0].speed_limit, None);
    assert_eq!(net.roads[0].road_type.as_deref(), Some("town"));
    let ms = net.roads[1].speed_limit.unwrap();
    assert_eq!(ms.unit, SpeedUnit::MetresPerSecond);
    assert!((ms.to_mph() - 25.0 / 0.44704).abs() < 1e-9);
    assert!((net.roads[2].speed_limit.unwrap().to_mph() - 62.1371).abs() < 1e-9);
}

#[test]
fn reparse_is_stable() {
    let bytes = fixture("urban.xodr");
    assert_eq!(parse_opendrive("u", &bytes).unwrap(), parse_opendrive("u", &bytes).unwrap());
}

#[test]
fn corpus_never_panics() {
    let mut seen = 0;
    for entry in std::fs::read_dir(FIXTURES).unwrap() {
        let path = entry.unwrap().path();
        let _ = parse_opendrive_file(&path);
        seen += 1;
    }
    assert!(seen >= 6);
}

#[test]
fn four_metre_lane_converts() {
    let net = parse_opendrive("urban", &fixture("urban.xodr")).unwrap();
    let params = extract_parameters(&net.roads[1], &IngestConfig::default());
    assert_eq!(values(&params, "lane_width"), vec![4.0 * 3.28084; 2]);
    assert!((values(&params, "lane_width")[0] - 13.1234).abs() < 1e-4);
    assert_eq!(values(&params, "design_speed"), vec![55.0]);
    assert!(values(&params, "design_radius").is_empty());
    assert_eq!(params.last().unwrap().value, ParamValue::from("Constrained"));
}

#[test]
fn arc_radius_conversion() {
    let xml = br#"<OpenDRIVE><header/><road id="1" length="50"><planView>
        <geometry s="0" length="20"><line/></geometry>
        <geometry s="20" length="30"><arc curvature="0.02"/></geometry>
      </planView></road></OpenDRIVE>"#;
    let net = parse_opendrive("a", xml).unwrap();
    let params = extract_parameters(&net.roads[0], &IngestConfig::default());
    let r = values(&params, "design_radius");
    assert_eq!(r.len(), 1);
    assert!((r[0] - 164.042).abs() < 1e-3);
}

#[test]
fn tightest_element_wins_including_spiral_ends() {
    let net = parse_opendrive("t", &fixture("tight_curves.xodr")).unwrap();
    let params = extract_parameters(&net.roads[0], &IngestConfig::default());
    // Arc at 100 m, spiral ending at 1/0.012 m, parametric cubic ignored.
    let expected = (1.0 / 0.012) * 3.28084;
    assert!((values(&params, "design_radius")[0] - expected).abs() < 1e-9);
}

#[test]
fn sidewalks_and_borders_are_not_lanes() {
    let net = parse_opendrive("urban", &fixture("urban.xodr")).unwrap();
    let params = extract_parameters(&net.roads[3], &IngestConfig::default());
    assert_eq!(values(&params, "lane_width").len(), 2);
    assert!(values(&params, "shoulder_width").is_empty());
}

#[test]
fn polynomial_width_sampling() {
    let xml = br#"<OpenDRIVE><header/><road id="1" length="100"><lanes><laneSection s="0"><right>
        <lane id="-1" type="driving"><width sOffset="0" a="3.0" b="0.01" c="0" d="0"/></lane>
      </right></laneSection></lanes></road></OpenDRIVE>"#;
    let net = parse_opendrive("p", xml).unwrap();
    let one = extract_parameters(&net.roads[0], &IngestConfig::default());
    assert_eq!(values(&one, "lane_width"), vec![3.0 * 3.28084]);
    let four = IngestConfig {
        samples_per_section: 4,
        ..IngestConfig::default()
    };
    let widths = values(&extract_parameters(&net.roads[0], &four), "lane_width");
    let expected: Vec<f64> = [0.0, 25.0, 50.0, 75.0]
        .iter()
        .map(|s| (3.0 + 0.01 * s) * 3.28084)
        .collect();
    assert_eq!(widths.len(), 4);
    for (w, e) in widths.iter().zip(expected) {
        assert!((w - e).abs() < 1e-9);
    }
}

#[test]
fn later_width_record_takes_over() {
    let lane = Lane {
        id: -1,
        lane_type: "driving".into(),
        widths: vec![
            WidthPoly { s_offset: 0.0, a: 3.0, b: 0.0, c: 0.0, d: 0.0 },
            WidthPoly { s_offset: 10.0, a: 3.5, b: 0.1, c: 0.0, d: 0.0 },
        ],
    };
    assert_eq!(lane.width_at(5.0), Some(3.0));
    assert_eq!(lane.width_at(12.0), Some(3.5 + 0.2));
}

#[test]
fn highway_fixture_all_valid() {
    let r = audit("highway");
    assert_eq!(
        (r.roads, r.params_extracted, r.params_checked, r.valid, r.invalid),
        (3, 20, 17, 17, 0)
    );
    assert_eq!(r.pass_rate, Some(100.0));
    assert!(r.violations_by_rule.is_empty());
}

#[test]
fn urban_fixture_counts() {
    let r = audit("urban");
    assert_eq!((r.roads, r.params_checked, r.valid, r.invalid), (4, 13, 6, 7));
    assert_eq!(r.violations_by_rule.get("SF-001"), Some(&5));
    assert_eq!(r.violations_by_rule.get("SF-005"), Some(&2));
    assert!((r.pass_rate.unwrap() - 600.0 / 13.0).abs() < 1e-12);
}

#[test]
fn tight_curve_fixture_counts() {
    let r = audit("tight_curves");
    assert_eq!((r.roads, r.params_checked, r.valid, r.invalid), (2, 10, 9, 1));
    assert_eq!(r.violations_by_rule.get("SF-005"), Some(&1));
}

#[test]
fn urban_gap_below_highway() {
    assert!(audit("urban").pass_rate.unwrap() < audit("highway").pass_rate.unwrap());
}

#[test]
fn totals_and_table() {
    let reports = vec![audit("highway"), audit("urban"), audit("tight_curves")];
    let total = ComplianceReport::total(&reports);
    assert_eq!((total.roads, total.params_checked, total.valid, total.invalid), (9, 40, 32, 8));
    assert_eq!(total.violations_by_rule.get("SF-005"), Some(&3));

    let table = render_table(&reports, true);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("Asset"));
    assert!(lines[4].starts_with("TOTAL"));
    assert!(lines[2].ends_with("46.15%"));
    assert!(lines.iter().all(|l| l.len() == lines[0].len()));
}

fn road_with_lanes(widths: &[f64]) -> OdrRoad {
    OdrRoad {
        id: "r".into(),
        length: 100.0,
        geometry: vec![],
        lane_sections: vec![LaneSection {
            s: 0.0,
            lanes: widths
                .iter()
                .enumerate()
                .map(|(i, &a)| Lane {
                    id: -(i as i32) - 1,
                    lane_type: "driving".into(),
                    widths: vec![WidthPoly { s_offset: 0.0, a, b: 0.0, c: 0.0, d: 0.0 }],
                })
                .collect(),
        }],
        speed_limit: None,
        road_type: None,
    }
}

fn audit_network(roads: Vec<OdrRoad>) -> ComplianceReport {
    let net = OdrNetwork { name: "gen".into(), roads };
    validate_asset(
        &net,
        &KnowledgeGraph::shipped(),
        &RelationalBindings::default(),
        &IngestConfig::default(),
    )
}

proptest! {
    #[test]
    fn metric_round_trip(m in 0.01f64..5000.0) {
        prop_assert!((crate::units::ft_to_m(crate::units::m_to_ft(m)) - m).abs() < 1e-6);
    }

    #[test]
    fn narrowing_lanes_never_adds_violations(
        flags in prop::collection::vec(any::<bool>(), 1..12),
        pick in any::<prop::sample::Index>(),
    ) {
        let before: Vec<f64> = flags.iter().map(|&w| if w { 4.0 } else { 3.5 }).collect();
        let mut after = before.clone();
        let i = pick.index(after.len());
        let was_wide = after[i] == 4.0;
        after[i] = 3.5;
        let rb = audit_network(vec![road_with_lanes(&before)]);
        let ra = audit_network(vec![road_with_lanes(&after)]);
        if was_wide {
            prop_assert!(ra.invalid < rb.invalid);
        } else {
            prop_assert_eq!(ra.invalid, rb.invalid);
        }
    }

    #[test]
    fn counts_conserved(widths in prop::collection::vec(prop::collection::vec(2.0f64..5.0, 0..5), 0..6)) {
        let roads: Vec<OdrRoad> = widths.iter().map(|w| road_with_lanes(w)).collect();
        let checks: usize = roads
            .iter()
            .map(|r| {
                extract_parameters(r, &IngestConfig::default())
                    .iter()
                    .filter(|p| p.key != "design_speed")
                    .count()
            })
            .sum();
        let report = audit_network(roads);
        prop_assert_eq!(report.valid + report.invalid, report.params_checked);
        prop_assert_eq!(report.params_checked, checks);
    }

    #[test]
    fn truncations_are_errors_not_panics(cut in 0usize..3590) {
        let bytes = fixture("highway.xodr");
        let cut = cut.min(bytes.len());
        let _ = parse_opendrive("cut", &bytes[..cut]);
    }

    #[test]
    fn audit_order_independent(seed in any::<u64>()) {
        let mut roads = parse_opendrive("u", &fixture("urban.xodr")).unwrap().roads;
        let n = roads.len();
        roads.rotate_left((seed as usize) % n);
        let shuffled = audit_network(roads);
        let base = audit("urban");
        prop_assert_eq!(shuffled.params_checked, base.params_checked);
        prop_assert_eq!(shuffled.invalid, base.invalid);
        prop_assert_eq!(shuffled.violations_by_rule, base.violations_by_rule);
    }
}
