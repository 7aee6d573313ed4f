use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, PassingType};
use crate::scalar::Scalar;

pub const SHIPPED_COEFFICIENTS: &str = include_str!("../../../../config/coefficients.json");

/// Upper follower-density bounds (fol/mi) for LOS A through D. Anything
/// above `d` is E.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct LosThresholds<T: Scalar> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct LosTables<T: Scalar> {
    /// Posted speed at or above the split.
    pub high_speed: LosThresholds<T>,
    pub low_speed: LosThresholds<T>,
}

/// Every coefficient of the speed, follower and LOS model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct CoefficientSet<T: Scalar> {
    /// mph added to the posted speed to get base free-flow speed.
    pub bffs_offset: T,
    /// mph lost per ft of lane narrower than 12 ft.
    pub lane_width_speed_coeff: T,
    /// mph lost per ft of shoulder narrower than 6 ft.
    pub shoulder_width_speed_coeff: T,
    /// mph lost per horizontal class step.
    pub horizontal_class_speed_coeff: T,
    /// Passenger-car equivalent of one heavy vehicle.
    pub heavy_vehicle_pce: T,
    /// Average speed floor, mph.
    pub min_speed: T,
    /// mph lost per 1000 pc/h.
    pub slope_by_passing_type: BTreeMap<PassingType, T>,
    /// Follower saturation rate per 1000 pc/h.
    pub pf_rate_by_passing_type: BTreeMap<PassingType, T>,
    /// pc/h; flows above this are LOS F.
    pub capacity: T,
    /// Posted speed (mph) selecting the high-speed threshold table.
    pub los_speed_split: T,
    pub los_thresholds: LosTables<T>,
}

impl<T: Scalar> CoefficientSet<T> {
    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        let set: Self =
            serde_json::from_str(text).map_err(|e| AnalysisError::Coefficients(e.to_string()))?;
        set.check()?;
        Ok(set)
    }

    pub fn check(&self) -> Result<(), AnalysisError> {
        let bad = |what: &str| Err(AnalysisError::Coefficients(what.to_owned()));
        let scalars = [
            self.bffs_offset,
            self.lane_width_speed_coeff,
            self.shoulder_width_speed_coeff,
            self.horizontal_class_speed_coeff,
            self.min_speed,
            self.capacity,
            self.los_speed_split,
        ];
        if scalars.iter().any(|c| !(c.is_finite() && *c >= T::zero())) {
            return bad("coefficients must be finite and non-negative");
        }
        if !(self.heavy_vehicle_pce >= T::one()) {
            return bad("heavy_vehicle_pce must be at least 1");
        }
        for map in [&self.slope_by_passing_type, &self.pf_rate_by_passing_type] {
            if PassingType::ALL.iter().any(|p| !map.contains_key(p)) {
                return bad("per-passing-type tables must cover Constrained, Zone and Lane");
            }
            if map.values().any(|c| !(c.is_finite() && *c >= T::zero())) {
                return bad("per-passing-type coefficients must be finite and non-negative");
            }
        }
        for t in [self.los_thresholds.high_speed, self.los_thresholds.low_speed] {
            if !(T::zero() <= t.a && t.a < t.b && t.b < t.c && t.c < t.d) {
                return bad("LOS thresholds must increase strictly from A to D");
            }
        }
        Ok(())
    }

    pub fn slope(&self, passing: PassingType) -> T {
        self.slope_by_passing_type[&passing]
    }

    pub fn pf_rate(&self, passing: PassingType) -> T {
        self.pf_rate_by_passing_type[&passing]
    }
}

impl<T: Scalar> Default for CoefficientSet<T> {
    fn default() -> Self {
        Self::from_json(SHIPPED_COEFFICIENTS).expect("shipped coefficients are valid")
    }
}
