use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{oracle_r_min, round2, stress_rng, StressRng};
use crate::analysis::{HighwayFacility, PassingType, SegmentInput, Subsegment};

/// The single defect planted in a generated facility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FacilityAttack {
    LaneWidth,
    ShoulderWidth,
    HorizontalClass,
    PassingType,
    SubsegmentRadius,
    Grade,
}

impl FacilityAttack {
    pub const ALL: [FacilityAttack; 6] = [
        FacilityAttack::LaneWidth,
        FacilityAttack::ShoulderWidth,
        FacilityAttack::HorizontalClass,
        FacilityAttack::PassingType,
        FacilityAttack::SubsegmentRadius,
        FacilityAttack::Grade,
    ];
}

const POSTED: [f64; 5] = [45.0, 50.0, 55.0, 60.0, 65.0];

pub(super) fn valid_segment(rng: &mut StressRng) -> SegmentInput<f64> {
    let posted = *POSTED.choose(rng).expect("non-empty");
    let limit = oracle_r_min(posted).expect("posted speeds lie within the friction table");
    let subsegments = (0..rng.gen_range(0..3))
        .map(|_| Subsegment {
            length_mi: round2(rng.gen_range(0.1..0.5)),
            radius_ft: Some((limit * rng.gen_range(1.05..4.0)).ceil()),
            superelevation_pct: None,
        })
        .collect();
    SegmentInput {
        index: 0,
        length_mi: round2(rng.gen_range(0.3..2.0)),
        lane_width_ft: round2(rng.gen_range(9.5..12.0)),
        shoulder_width_ft: round2(rng.gen_range(0.0..8.0)),
        posted_speed_mph: posted,
        demand_vph: rng.gen_range(100..1200) as f64,
        opposing_demand_vph: rng.gen_range(100..1200) as f64,
        phf: round2(rng.gen_range(0.85..1.0)),
        heavy_pct: rng.gen_range(0..10) as f64,
        grade_pct: round2(rng.gen_range(-6.0..6.0)),
        passing_type: PassingType::ALL.choose(rng).expect("non-empty").to_string(),
        horizontal_class: rng.gen_range(0..=5),
        subsegments,
    }
}

fn plant(attack: FacilityAttack, seg: &mut SegmentInput<f64>, rng: &mut StressRng) {
    match attack {
        FacilityAttack::LaneWidth => {
            seg.lane_width_ft = *[8.99, 12.01, 13.12, -3.0].choose(rng).expect("non-empty")
        }
        FacilityAttack::ShoulderWidth => {
            seg.shoulder_width_ft = *[-0.01, 8.01, 12.0].choose(rng).expect("non-empty")
        }
        FacilityAttack::HorizontalClass => seg.horizontal_class = rng.gen_range(6..=12),
        FacilityAttack::PassingType => {
            seg.passing_type = ["Passing", "constrained", "None"]
                .choose(rng)
                .expect("non-empty")
                .to_string()
        }
        FacilityAttack::SubsegmentRadius => {
            let limit = oracle_r_min(seg.posted_speed_mph).expect("posted speeds lie within the table");
            seg.subsegments.push(Subsegment {
                length_mi: 0.2,
                radius_ft: Some((limit * rng.gen_range(0.1..0.95)).floor()),
                superelevation_pct: None,
            });
        }
        FacilityAttack::Grade => {
            let g = round2(rng.gen_range(11.01..15.0));
            seg.grade_pct = if rng.gen_bool(0.5) { g } else { -g };
        }
    }
}

/// Facilities of one to five segments, each otherwise valid, with exactly
/// one planted defect. Deterministic in `(n, seed)`; attacks cycle so every
/// kind is represented.
pub fn generate_invalid_facilities(n: usize, seed: u64) -> Vec<(FacilityAttack, HighwayFacility<f64>)> {
    let mut rng = stress_rng(seed);
    (0..n)
        .map(|i| {
            let attack = FacilityAttack::ALL[i % FacilityAttack::ALL.len()];
            let mut segments: Vec<_> = (0..rng.gen_range(1..=5)).map(|_| valid_segment(&mut rng)).collect();
            let target = rng.gen_range(0..segments.len());
            plant(attack, &mut segments[target], &mut rng);
            let mut facility = HighwayFacility {
                name: Some(format!("attack-{i}")),
                facility_type: "two_lane_highway".into(),
                segments,
            };
            facility.reindex();
            (attack, facility)
        })
        .collect()
}
