//! Superelevation and side-friction configuration for the minimum-radius relation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const SHIPPED_BINDINGS: &str = include_str!("../../../../config/bindings.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BindingsError {
    #[error("e_max must lie in [0, 12] percent, got {0}")]
    EMax(f64),
    #[error("side-friction factor at {speed} mph must lie in (0, 1), got {f}")]
    Friction { speed: u32, f: f64 },
    #[error("side-friction table is empty")]
    EmptyTable,
    #[error("bindings file is not valid JSON: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RadiusError {
    #[error("design speed must be finite and non-negative, got {0} mph")]
    InvalidSpeed(f64),
    #[error("design speed {speed} mph is above the side-friction table (max {max} mph)")]
    OutOfRange { speed: f64, max: u32 },
}

/// Maximum superelevation `e_max` (percent) and side-friction factors keyed by
/// design speed (mph).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBindings<T>", into = "RawBindings<T>", bound = "T: Scalar")]
pub struct RelationalBindings<T: Scalar> {
    e_max: T,
    f_table: BTreeMap<u32, T>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct RawBindings<T: Scalar> {
    e_max: T,
    f_table: BTreeMap<u32, T>,
}

impl<T: Scalar> TryFrom<RawBindings<T>> for RelationalBindings<T> {
    type Error = BindingsError;

    fn try_from(raw: RawBindings<T>) -> Result<Self, Self::Error> {
        Self::new(raw.e_max, raw.f_table)
    }
}

impl<T: Scalar> From<RelationalBindings<T>> for RawBindings<T> {
    fn from(b: RelationalBindings<T>) -> Self {
        RawBindings {
            e_max: b.e_max,
            f_table: b.f_table,
        }
    }
}

impl<T: Scalar> RelationalBindings<T> {
    pub fn new(e_max: T, f_table: BTreeMap<u32, T>) -> Result<Self, BindingsError> {
        if !(e_max >= T::zero() && e_max <= T::lit(12.0)) {
            return Err(BindingsError::EMax(e_max.as_f64()));
        }
        if f_table.is_empty() {
            return Err(BindingsError::EmptyTable);
        }
        for (&speed, &f) in &f_table {
            if !(f > T::zero() && f < T::one()) {
                return Err(BindingsError::Friction { speed, f: f.as_f64() });
            }
        }
        Ok(Self { e_max, f_table })
    }

    pub fn from_json(text: &str) -> Result<Self, BindingsError> {
        serde_json::from_str(text).map_err(|e| BindingsError::Parse(e.to_string()))
    }

    pub fn e_max(&self) -> T {
        self.e_max
    }

    pub fn f_table(&self) -> &BTreeMap<u32, T> {
        &self.f_table
    }

    /// Highest speed covered by the friction table.
    pub fn max_speed(&self) -> u32 {
        *self.f_table.keys().next_back().expect("table is non-empty")
    }

    /// Friction factor at the nearest table speed at or above `speed`.
    pub fn side_friction(&self, speed: T) -> Result<T, RadiusError> {
        if !(speed >= T::zero()) || !speed.is_finite() {
            return Err(RadiusError::InvalidSpeed(speed.as_f64()));
        }
        self.f_table
            .iter()
            .find(|(&s, _)| T::lit(f64::from(s)) >= speed)
            .map(|(_, &f)| f)
            .ok_or(RadiusError::OutOfRange {
                speed: speed.as_f64(),
                max: self.max_speed(),
            })
    }
}

impl Default for RelationalBindings<f64> {
    fn default() -> Self {
        Self::from_json(SHIPPED_BINDINGS).expect("shipped bindings are valid")
    }
}

impl Default for RelationalBindings<f32> {
    fn default() -> Self {
        Self::from_json(SHIPPED_BINDINGS).expect("shipped bindings are valid")
    }
}

/// Minimum curve radius (ft) for a design speed (mph):
/// `R_min = V² / (15 (0.01 e_max + f))`.
pub fn r_min<T: Scalar>(design_speed: T, bindings: &RelationalBindings<T>) -> Result<T, RadiusError> {
    let f = bindings.side_friction(design_speed)?;
    let e = T::lit(0.01) * bindings.e_max;
    Ok(design_speed * design_speed / (T::lit(15.0) * (e + f)))
}
