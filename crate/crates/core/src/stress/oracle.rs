//! Design-rule arithmetic written out by hand, kept apart from the graph and
//! validator so that it can label vectors independently of them.

use crate::value::{NormalizedParameterSet, ParamValue};

const E_MAX: f64 = 8.0;
const SIDE_FRICTION: [(f64, f64); 8] = [
    (20.0, 0.27),
    (30.0, 0.20),
    (40.0, 0.16),
    (50.0, 0.14),
    (55.0, 0.13),
    (60.0, 0.12),
    (70.0, 0.10),
    (80.0, 0.08),
];

/// `V² / (15 (0.01 e + f))`; `None` outside the friction table.
pub fn oracle_r_min(speed_mph: f64) -> Option<f64> {
    if !(speed_mph > 0.0) {
        return None;
    }
    let (_, f) = SIDE_FRICTION.iter().find(|(v, _)| *v >= speed_mph)?;
    Some(speed_mph * speed_mph / (15.0 * (0.01 * E_MAX + f)))
}

fn number(params: &NormalizedParameterSet, key: &str) -> Option<f64> {
    params.get(key).and_then(|p| p.value.as_number())
}

fn in_range(x: Option<f64>, lo: f64, hi: f64) -> bool {
    x.is_none_or(|v| v >= lo && v <= hi)
}

/// True when every two-lane rule holds for the parameters present.
pub fn oracle_valid(params: &NormalizedParameterSet) -> bool {
    let lane = in_range(number(params, "lane_width"), 9.0, 12.0);
    let shoulder = in_range(number(params, "shoulder_width"), 0.0, 8.0);
    let grade = in_range(number(params, "grade"), -11.0, 11.0);
    let class = params.get("horizontal_class").is_none_or(|p| match &p.value {
        ParamValue::Number(x) => x.fract() == 0.0 && (0.0..=5.0).contains(x),
        ParamValue::Token(t) => matches!(t.as_str(), "0" | "1" | "2" | "3" | "4" | "5"),
    });
    let passing = params.get("passing_type").is_none_or(|p| {
        matches!(&p.value, ParamValue::Token(t) if matches!(t.as_str(), "Constrained" | "Zone" | "Lane"))
    });
    let radius = match number(params, "design_radius") {
        None => true,
        Some(r) => number(params, "design_speed")
            .and_then(oracle_r_min)
            .is_some_and(|limit| r >= limit),
    };
    lane && shoulder && grade && class && passing && radius
}
