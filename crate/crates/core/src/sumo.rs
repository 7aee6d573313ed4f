//! SUMO plain-network export: a straight chain of nodes at cumulative segment
//! distances and one single-lane edge per segment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{validate_facility, AnalysisError, HighwayFacility};
use crate::graph::KnowledgeGraph;
use crate::scalar::Scalar;
use crate::units::{mi_to_m, mph_to_mps};
use crate::validator::{RelationalBindings, SemanticException, Status, ValidateOptions};

#[derive(Debug, Error)]
pub enum SumoError {
    #[error("facility rejected by semantic validation; nothing written")]
    Rejected(SemanticException),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("facility has no segments")]
    Empty,
    #[error("could not write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumoNetwork {
    pub nodes_xml: String,
    pub edges_xml: String,
}

/// Renders the node and edge documents without touching the filesystem.
pub fn render_network<T: Scalar>(facility: &HighwayFacility<T>) -> SumoNetwork {
    let mut nodes = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<nodes>\n");
    let mut edges = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<edges>\n");
    let mut x = 0.0;
    let _ = writeln!(nodes, "    <node id=\"n0\" x=\"0\" y=\"0\"/>");
    for (i, seg) in facility.segments.iter().enumerate() {
        let length = mi_to_m(seg.length_mi.as_f64());
        x += length;
        let _ = writeln!(nodes, "    <node id=\"n{}\" x=\"{x}\" y=\"0\"/>", i + 1);
        let _ = writeln!(
            edges,
            "    <edge id=\"e{i}\" from=\"n{i}\" to=\"n{}\" numLanes=\"1\" speed=\"{}\" length=\"{length}\"/>",
            i + 1,
            mph_to_mps(seg.posted_speed_mph.as_f64()),
        );
    }
    nodes.push_str("</nodes>\n");
    edges.push_str("</edges>\n");
    SumoNetwork {
        nodes_xml: nodes,
        edges_xml: edges,
    }
}

/// Validates the facility and, only if it passes, writes
/// `<stem>.nod.xml` and `<stem>.edg.xml` into `dir`.
pub fn export_sumo<T: Scalar>(
    facility: &HighwayFacility<T>,
    graph: &KnowledgeGraph,
    bindings: &RelationalBindings<f64>,
    dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf), SumoError> {
    if facility.segments.is_empty() {
        return Err(SumoError::Empty);
    }
    for seg in &facility.segments {
        seg.check_structure()?;
    }
    let report = validate_facility(facility, graph, bindings, ValidateOptions::default())?;
    if report.status == Status::Reject {
        return Err(SumoError::Rejected(SemanticException::from_report(&report)));
    }
    let net = render_network(facility);
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SumoError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let nodes = dir.join(format!("{stem}.nod.xml"));
    let edges = dir.join(format!("{stem}.edg.xml"));
    std::fs::write(&nodes, &net.nodes_xml).map_err(io(&nodes))?;
    std::fs::write(&edges, &net.edges_xml).map_err(io(&edges))?;
    Ok((nodes, edges))
}
