//! Two-lane highway analysis kernel with a knowledge-graph design-rule
//! validator.
//!
//! Every analysis request passes through the semantic validator first: inputs
//! are mapped onto ontology parameters, the rules active in the request's
//! context are evaluated, and any error-severity violation blocks the run
//! with a payload that cites the governing manual. The numeric model is
//! generic over [`Scalar`] (`f32` or `f64`); the aliases below fix it to
//! `f64`.
//!
//! ```
//! use roadkernel::{Bindings, Coefficients, Facility, KnowledgeGraph};
//!
//! let facility = Facility::from_json(r#"{
//!     "facility_type": "two_lane_highway",
//!     "segments": [{
//!         "length_mi": 1.0, "lane_width_ft": 12, "shoulder_width_ft": 6,
//!         "posted_speed_mph": 55, "demand_vph": 500, "phf": 0.95,
//!         "passing_type": "Zone", "horizontal_class": 0
//!     }]
//! }"#).unwrap();
//! let result = roadkernel::analyze_facility(
//!     &facility,
//!     &Coefficients::default(),
//!     &KnowledgeGraph::shipped(),
//!     &Bindings::default(),
//! ).unwrap();
//! assert_eq!(result.segments.len(), 1);
//! ```

// `!(x > 0.0)` style guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod graph;
pub mod opendrive;
pub mod scalar;
pub mod stress;
pub mod sumo;
pub mod units;
pub mod validator;
pub mod value;

pub use analysis::{analyze_facility, validate_facility, AnalysisError, Los, PassingType};
pub use graph::{GraphError, KnowledgeGraph};
pub use opendrive::{parse_opendrive, validate_asset, ComplianceReport, IngestConfig, OdrNetwork};
pub use scalar::Scalar;
pub use stress::{generate_vectors, run_stress, CategoryMix, StressReport};
pub use sumo::{export_sumo, SumoError};
pub use validator::{validate, Enforcement, SemanticException, ValidateOptions, ValidationReport};
pub use value::{NormalizedParameter, NormalizedParameterSet, ParamValue, ValidationContext};

pub type Facility = analysis::HighwayFacility<f64>;
pub type Segment = analysis::SegmentInput<f64>;
pub type SegmentReport = analysis::SegmentResult<f64>;
pub type FacilityReport = analysis::FacilityResult<f64>;
pub type Coefficients = analysis::CoefficientSet<f64>;
pub type Bindings = validator::RelationalBindings<f64>;
