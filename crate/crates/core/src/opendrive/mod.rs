//! OpenDRIVE asset auditing: parse, extract design parameters in canonical
//! units, and tally them against the knowledge graph.

mod parse;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use parse::{
    parse_opendrive, parse_opendrive_file, Geometry, Lane, LaneSection, OdrError, OdrNetwork, OdrRoad,
    Shape, SpeedLimit, SpeedUnit, WidthPoly,
};

use crate::graph::KnowledgeGraph;
use crate::units::m_to_ft;
use crate::validator::{check_parameter, RelationalBindings};
use crate::value::{NormalizedParameter, NormalizedParameterSet, ParamValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Used when a road carries no speed record.
    pub default_design_speed_mph: f64,
    /// Width samples per lane section, evenly spaced from the section start.
    pub samples_per_section: usize,
    pub passing_type: String,
    pub facility_type: String,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            default_design_speed_mph: 55.0,
            samples_per_section: 1,
            passing_type: "Constrained".into(),
            facility_type: "two_lane_highway".into(),
        }
    }
}

fn param(key: &str, value: impl Into<ParamValue>, unit: &str) -> NormalizedParameter {
    NormalizedParameter {
        key: key.into(),
        value: value.into(),
        unit: unit.into(),
    }
}

/// Station offsets (relative to the section start) at which widths are read.
fn sample_offsets(section_length: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(1);
    (0..n).map(|j| section_length * j as f64 / n as f64).collect()
}

/// Extracts the auditable parameters of one road, in ft and mph.
///
/// Emits one `lane_width` per driving lane per sample, one `shoulder_width`
/// per shoulder lane per sample, a single `design_radius` (the tightest arc
/// or spiral end) if the road curves at all, `design_speed`, and
/// `passing_type`.
pub fn extract_parameters(road: &OdrRoad, config: &IngestConfig) -> Vec<NormalizedParameter> {
    let mut out = Vec::new();
    for (i, section) in road.lane_sections.iter().enumerate() {
        let end = road.lane_sections.get(i + 1).map_or(road.length, |next| next.s);
        let offsets = sample_offsets((end - section.s).max(0.0), config.samples_per_section);
        for lane in &section.lanes {
            let key = match lane.lane_type.as_str() {
                "driving" => "lane_width",
                "shoulder" => "shoulder_width",
                _ => continue,
            };
            for &ds in &offsets {
                if let Some(w) = lane.width_at(ds) {
                    out.push(param(key, m_to_ft(w), "ft"));
                }
            }
        }
    }

    let radius = road
        .geometry
        .iter()
        .filter_map(|g| g.shape.min_radius())
        .min_by(f64::total_cmp);
    if let Some(r) = radius {
        out.push(param("design_radius", m_to_ft(r), "ft"));
    }

    let speed = road
        .speed_limit
        .map_or(config.default_design_speed_mph, SpeedLimit::to_mph);
    out.push(param("design_speed", speed, "mph"));
    out.push(param("passing_type", config.passing_type.as_str(), ""));
    out
}

/// Per-asset audit tally.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub asset: String,
    pub roads: usize,
    /// Extracted parameters, whether or not any rule applies to them.
    pub params_extracted: usize,
    /// One per (extracted parameter, active rule) pair.
    pub params_checked: usize,
    pub valid: usize,
    pub invalid: usize,
    /// `None` when nothing was checked.
    pub pass_rate: Option<f64>,
    pub violations_by_rule: BTreeMap<String, usize>,
}

impl ComplianceReport {
    fn finish(mut self) -> Self {
        self.pass_rate =
            (self.params_checked > 0).then(|| 100.0 * self.valid as f64 / self.params_checked as f64);
        self
    }

    /// Sums several reports into one row named `TOTAL`.
    pub fn total<'a>(reports: impl IntoIterator<Item = &'a ComplianceReport>) -> ComplianceReport {
        let mut sum = ComplianceReport {
            asset: "TOTAL".into(),
            ..Default::default()
        };
        for r in reports {
            sum.roads += r.roads;
            sum.params_extracted += r.params_extracted;
            sum.params_checked += r.params_checked;
            sum.valid += r.valid;
            sum.invalid += r.invalid;
            for (rule, n) in &r.violations_by_rule {
                *sum.violations_by_rule.entry(rule.clone()).or_default() += n;
            }
        }
        sum.finish()
    }

    pub fn pass_rate_label(&self) -> String {
        self.pass_rate.map_or_else(|| "n/a".into(), |p| format!("{p:.2}%"))
    }
}

/// Audits every road of a network in the configured facility context.
///
/// Roads are checked independently: each road's design speed is the operand
/// for its own radius rule.
pub fn validate_asset(
    network: &OdrNetwork,
    graph: &KnowledgeGraph,
    bindings: &RelationalBindings<f64>,
    config: &IngestConfig,
) -> ComplianceReport {
    let mut report = ComplianceReport {
        asset: network.name.clone(),
        roads: network.roads.len(),
        ..Default::default()
    };
    for road in &network.roads {
        let params = extract_parameters(road, config);
        report.params_extracted += params.len();

        let mut context = graph.context_defaults();
        context.insert("facility_type", ParamValue::from(config.facility_type.as_str()));
        let mut operands = NormalizedParameterSet::new();
        for p in params.iter().filter(|p| graph.is_context_key(&p.key)) {
            context.insert(&p.key, p.value.clone());
            operands.insert(p.key.clone(), p.clone());
        }

        for p in &params {
            for check in check_parameter(graph, p, &operands, &context, bindings) {
                report.params_checked += 1;
                match check.violation {
                    None => report.valid += 1,
                    Some(_) => {
                        report.invalid += 1;
                        *report.violations_by_rule.entry(check.rule_id).or_default() += 1;
                    }
                }
            }
        }
    }
    report.finish()
}

/// Aligned text table: one row per report, then a `TOTAL` row if asked.
pub fn render_table(reports: &[ComplianceReport], with_total: bool) -> String {
    let mut rows: Vec<[String; 6]> = vec![[
        "Asset".into(),
        "Roads".into(),
        "Params".into(),
        "Valid".into(),
        "Invalid".into(),
        "Pass Rate".into(),
    ]];
    let total = with_total.then(|| ComplianceReport::total(reports));
    for r in reports.iter().chain(total.as_ref()) {
        rows.push([
            r.asset.clone(),
            r.roads.to_string(),
            r.params_checked.to_string(),
            r.valid.to_string(),
            r.invalid.to_string(),
            r.pass_rate_label(),
        ]);
    }
    let mut widths = [0usize; 6];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let _ = write!(out, "{:<w$}", row[0], w = widths[0]);
        for (cell, w) in row.iter().zip(widths).skip(1) {
            let _ = write!(out, "  {cell:>w$}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests;
