use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{analyze_segment, segment_los, AnalysisError, CoefficientSet, Los, SegmentInput, SegmentResult};
use crate::graph::KnowledgeGraph;
use crate::scalar::Scalar;
use crate::validator::{
    normalize, validate_normalized, RelationalBindings, SemanticException, Status, ValidateOptions,
    ValidationReport,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct HighwayFacility<T: Scalar> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub facility_type: String,
    pub segments: Vec<SegmentInput<T>>,
}

impl<T: Scalar> HighwayFacility<T> {
    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        let mut facility: Self =
            serde_json::from_str(text).map_err(|e| AnalysisError::Json(e.to_string()))?;
        facility.reindex();
        Ok(facility)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("facility serializes")
    }

    /// Sets each segment's `index` to its position.
    pub fn reindex(&mut self) {
        for (i, seg) in self.segments.iter_mut().enumerate() {
            seg.index = i;
        }
    }

    pub fn total_length(&self) -> T {
        self.segments.iter().fold(T::zero(), |acc, s| acc + s.length_mi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FacilityResult<T: Scalar> {
    pub segments: Vec<SegmentResult<T>>,
    /// Length-weighted follower density.
    pub overall_fd: T,
    pub overall_los: Los,
}

fn scalar_json<T: Scalar>(x: T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn prefixed(mut report: ValidationReport, prefix: &str) -> ValidationReport {
    for v in &mut report.violations {
        v.parameter = format!("{prefix}.{}", v.parameter);
    }
    for k in &mut report.unknown_keys {
        *k = format!("{prefix}.{k}");
    }
    report
}

/// Validates every segment and subsegment of a facility.
///
/// Segment fields are mapped through the parameter bindings of the graph.
/// The segment's posted speed stands in as the design speed for the
/// minimum-radius rule on its subsegments. Violation parameters are prefixed
/// with their location, e.g. `segments[2].lane_width`.
pub fn validate_facility<T: Scalar>(
    facility: &HighwayFacility<T>,
    graph: &KnowledgeGraph,
    bindings: &RelationalBindings<f64>,
    options: ValidateOptions,
) -> Result<ValidationReport, AnalysisError> {
    let mut combined = ValidationReport {
        status: Status::Pass,
        violations: Vec::new(),
        unknown_keys: Vec::new(),
        checks_performed: 0,
        elapsed_us: 0.0,
    };
    let mut absorb = |input: Map<String, Value>, prefix: String| -> Result<(), AnalysisError> {
        let normalized = normalize(&Value::Object(input), graph).map_err(|e| AnalysisError::Schema {
            segment: 0,
            reason: format!("{prefix}: {e}"),
        })?;
        let report = prefixed(validate_normalized(graph, &normalized, bindings, options), &prefix);
        combined.violations.extend(report.violations);
        combined.unknown_keys.extend(report.unknown_keys);
        combined.checks_performed += report.checks_performed;
        combined.elapsed_us += report.elapsed_us;
        if report.status == Status::Reject {
            combined.status = Status::Reject;
        }
        Ok(())
    };
    for (i, seg) in facility.segments.iter().enumerate() {
        let Value::Object(mut fields) = serde_json::to_value(seg).expect("segment serializes") else {
            unreachable!("segments serialize to objects")
        };
        fields.remove("subsegments");
        fields.insert("facility_type".into(), Value::String(facility.facility_type.clone()));
        fields.insert("design_speed_mph".into(), scalar_json(seg.posted_speed_mph));
        absorb(fields, format!("segments[{i}]"))?;

        for (j, sub) in seg.subsegments.iter().enumerate() {
            let Value::Object(mut fields) = serde_json::to_value(sub).expect("subsegment serializes") else {
                unreachable!("subsegments serialize to objects")
            };
            fields.insert("facility_type".into(), Value::String(facility.facility_type.clone()));
            fields.insert("design_speed_mph".into(), scalar_json(seg.posted_speed_mph));
            absorb(fields, format!("segments[{i}].subsegments[{j}]"))?;
        }
    }
    Ok(combined)
}

/// `Σ xᵢ Lᵢ / Σ Lᵢ` over `(x, L)` pairs.
pub fn length_weighted<T: Scalar>(parts: impl IntoIterator<Item = (T, T)>) -> T {
    let (num, den) = parts
        .into_iter()
        .fold((T::zero(), T::zero()), |(n, d), (x, l)| (n + x * l, d + l));
    num / den
}

/// Validation-gated facility analysis.
///
/// A facility that fails semantic validation yields
/// [`AnalysisError::Rejected`] carrying the semantic-exception payload and no
/// results. Overall follower density is `Σ FDᵢ Lᵢ / Σ Lᵢ`; the overall LOS
/// reads it against the threshold table for the length-weighted posted speed,
/// and is F if any segment exceeds capacity.
pub fn analyze_facility<T: Scalar>(
    facility: &HighwayFacility<T>,
    coeffs: &CoefficientSet<T>,
    graph: &KnowledgeGraph,
    bindings: &RelationalBindings<f64>,
) -> Result<FacilityResult<T>, AnalysisError> {
    if facility.segments.is_empty() {
        return Err(AnalysisError::EmptyFacility);
    }
    for seg in &facility.segments {
        seg.check_structure()?;
    }
    let report = validate_facility(facility, graph, bindings, ValidateOptions::default())?;
    if report.status == Status::Reject {
        return Err(AnalysisError::Rejected(SemanticException::from_report(&report)));
    }

    let segments = facility
        .segments
        .iter()
        .map(|seg| analyze_segment(seg, coeffs))
        .collect::<Result<Vec<_>, _>>()?;

    let lengths = facility.segments.iter().map(|s| s.length_mi);
    let overall_fd = length_weighted(segments.iter().map(|r| r.fd_fol_per_mi).zip(lengths.clone()));
    let posted = length_weighted(facility.segments.iter().map(|s| s.posted_speed_mph).zip(lengths));
    let overall_los = if segments.iter().any(|s| s.flow_pc_h > coeffs.capacity) {
        Los::F
    } else {
        segment_los(overall_fd, posted, T::zero(), coeffs)
    };
    Ok(FacilityResult {
        segments,
        overall_fd,
        overall_los,
    })
}
