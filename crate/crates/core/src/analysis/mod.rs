//! Two-lane highway performance model.
//!
//! Per segment: demand flow rate, free-flow and average speed, percent
//! followers, follower density and a level-of-service letter. Facility results
//! aggregate follower density weighted by segment length. Every model
//! coefficient lives in [`CoefficientSet`].

mod coefficients;
mod facility;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use coefficients::{CoefficientSet, LosTables, LosThresholds, SHIPPED_COEFFICIENTS};
pub use facility::{
    analyze_facility, length_weighted, validate_facility, FacilityResult, HighwayFacility,
};

use crate::scalar::Scalar;
use crate::validator::SemanticException;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("facility has no segments")]
    EmptyFacility,
    #[error("segment {segment}: {reason}")]
    Schema { segment: usize, reason: String },
    #[error("facility input is not valid JSON for the facility schema: {0}")]
    Json(String),
    #[error("invalid coefficient set: {0}")]
    Coefficients(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("facility rejected by semantic validation ({} violation(s))", .0.errors.len())]
    Rejected(SemanticException),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PassingType {
    Constrained,
    Zone,
    Lane,
}

impl PassingType {
    pub const ALL: [PassingType; 3] = [PassingType::Constrained, PassingType::Zone, PassingType::Lane];

    pub fn as_str(self) -> &'static str {
        match self {
            PassingType::Constrained => "Constrained",
            PassingType::Zone => "Zone",
            PassingType::Lane => "Lane",
        }
    }
}

impl FromStr for PassingType {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PassingType::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| AnalysisError::Domain(format!("unknown passing type `{s}`")))
    }
}

impl fmt::Display for PassingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Level of service; the derived order is A < B < ... < F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Los {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl fmt::Display for Los {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self {
            Los::A => "A",
            Los::B => "B",
            Los::C => "C",
            Los::D => "D",
            Los::E => "E",
            Los::F => "F",
        };
        f.write_str(letter)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct Subsegment<T: Scalar> {
    pub length_mi: T,
    /// Absent for tangent sections.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_ft: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superelevation_pct: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct SegmentInput<T: Scalar> {
    /// Position in the facility; assigned on load.
    #[serde(skip)]
    pub index: usize,
    pub length_mi: T,
    pub lane_width_ft: T,
    pub shoulder_width_ft: T,
    pub posted_speed_mph: T,
    /// Analysis-direction demand, veh/h.
    pub demand_vph: T,
    #[serde(default)]
    pub opposing_demand_vph: T,
    pub phf: T,
    #[serde(default)]
    pub heavy_pct: T,
    #[serde(default)]
    pub grade_pct: T,
    pub passing_type: String,
    pub horizontal_class: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subsegments: Vec<Subsegment<T>>,
}

impl<T: Scalar> SegmentInput<T> {
    pub fn passing(&self) -> Result<PassingType, AnalysisError> {
        self.passing_type.parse()
    }

    /// Structural checks that sit below the design rules: a segment that
    /// fails these cannot be analysed at all.
    pub fn check_structure(&self) -> Result<(), AnalysisError> {
        let fail = |reason: &str| {
            Err(AnalysisError::Schema {
                segment: self.index,
                reason: reason.to_owned(),
            })
        };
        let finite = [
            self.length_mi,
            self.lane_width_ft,
            self.shoulder_width_ft,
            self.posted_speed_mph,
            self.demand_vph,
            self.opposing_demand_vph,
            self.phf,
            self.heavy_pct,
            self.grade_pct,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return fail("all numeric fields must be finite");
        }
        if !(self.length_mi > T::zero()) {
            return fail("length_mi must be positive");
        }
        if !(self.phf > T::zero() && self.phf <= T::one()) {
            return fail("phf must lie in (0, 1]");
        }
        if !(self.posted_speed_mph > T::zero()) {
            return fail("posted_speed_mph must be positive");
        }
        if self.demand_vph < T::zero() || self.opposing_demand_vph < T::zero() {
            return fail("demand must be non-negative");
        }
        if !(self.heavy_pct >= T::zero() && self.heavy_pct <= T::lit(100.0)) {
            return fail("heavy_pct must lie in [0, 100]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SegmentResult<T: Scalar> {
    pub index: usize,
    pub flow_pc_h: T,
    pub ffs_mph: T,
    pub as_mph: T,
    pub pf_pct: T,
    pub fd_fol_per_mi: T,
    pub los: Los,
}

/// Peak 15-minute passenger-car flow rate:
/// `v = demand / (phf · f_HV)`, `f_HV = 1 / (1 + P_T (E_T − 1))`.
pub fn demand_flow<T: Scalar>(seg: &SegmentInput<T>, coeffs: &CoefficientSet<T>) -> T {
    let share = seg.heavy_pct / T::lit(100.0);
    let f_hv = T::one() / (T::one() + share * (coeffs.heavy_vehicle_pce - T::one()));
    seg.demand_vph / (seg.phf * f_hv)
}

/// Posted speed plus the base offset, less lane and shoulder narrowing.
pub fn free_flow_speed<T: Scalar>(seg: &SegmentInput<T>, coeffs: &CoefficientSet<T>) -> T {
    let lane_deficit = (T::lit(12.0) - seg.lane_width_ft).max(T::zero());
    let shoulder_deficit = (T::lit(6.0) - seg.shoulder_width_ft).max(T::zero());
    seg.posted_speed_mph + coeffs.bffs_offset
        - coeffs.lane_width_speed_coeff * lane_deficit
        - coeffs.shoulder_width_speed_coeff * shoulder_deficit
}

/// Linear speed-flow relation below free-flow speed, floored at
/// `min(min_speed, FFS)` so it never exceeds FFS.
pub fn average_speed<T: Scalar>(
    seg: &SegmentInput<T>,
    flow: T,
    coeffs: &CoefficientSet<T>,
) -> Result<T, AnalysisError> {
    let passing = seg.passing()?;
    let ffs = free_flow_speed(seg, coeffs);
    if !(ffs > T::zero()) {
        return Err(AnalysisError::Domain(format!(
            "segment {}: free-flow speed {ffs} mph is not positive",
            seg.index
        )));
    }
    let class = T::from_i64(seg.horizontal_class).unwrap_or_else(T::zero);
    let speed = ffs
        - coeffs.slope(passing) * flow / T::lit(1000.0)
        - coeffs.horizontal_class_speed_coeff * class;
    Ok(speed.max(coeffs.min_speed.min(ffs)))
}

/// `PF = 100 (1 − exp(−k v / 1000))`.
pub fn percent_followers<T: Scalar>(
    seg: &SegmentInput<T>,
    flow: T,
    coeffs: &CoefficientSet<T>,
) -> Result<T, AnalysisError> {
    let k = coeffs.pf_rate(seg.passing()?);
    Ok(T::lit(100.0) * (T::one() - (-k * flow / T::lit(1000.0)).exp()))
}

/// `FD = (PF / 100) · v / AS`, followers per mile.
pub fn follower_density<T: Scalar>(pf: T, flow: T, avg_speed: T) -> Result<T, AnalysisError> {
    if !(avg_speed > T::zero()) {
        return Err(AnalysisError::Domain(format!(
            "average speed must be positive, got {avg_speed}"
        )));
    }
    if !(pf >= T::zero() && pf <= T::lit(100.0)) {
        return Err(AnalysisError::Domain(format!(
            "percent followers must lie in [0, 100], got {pf}"
        )));
    }
    Ok(pf / T::lit(100.0) * flow / avg_speed)
}

/// LOS letter from follower density; F whenever flow exceeds capacity.
/// Threshold bounds are inclusive.
pub fn segment_los<T: Scalar>(fd: T, posted_speed: T, flow: T, coeffs: &CoefficientSet<T>) -> Los {
    if flow > coeffs.capacity {
        return Los::F;
    }
    let table = if posted_speed >= coeffs.los_speed_split {
        &coeffs.los_thresholds.high_speed
    } else {
        &coeffs.los_thresholds.low_speed
    };
    if fd <= table.a {
        Los::A
    } else if fd <= table.b {
        Los::B
    } else if fd <= table.c {
        Los::C
    } else if fd <= table.d {
        Los::D
    } else {
        Los::E
    }
}

/// Runs the segment pipeline without the validation gate.
pub fn analyze_segment<T: Scalar>(
    seg: &SegmentInput<T>,
    coeffs: &CoefficientSet<T>,
) -> Result<SegmentResult<T>, AnalysisError> {
    seg.check_structure()?;
    let flow = demand_flow(seg, coeffs);
    let ffs = free_flow_speed(seg, coeffs);
    let avg = average_speed(seg, flow, coeffs)?;
    let pf = percent_followers(seg, flow, coeffs)?;
    let fd = follower_density(pf, flow, avg)?;
    Ok(SegmentResult {
        index: seg.index,
        flow_pc_h: flow,
        ffs_mph: ffs,
        as_mph: avg,
        pf_pct: pf,
        fd_fol_per_mi: fd,
        los: segment_los(fd, seg.posted_speed_mph, flow, coeffs),
    })
}
