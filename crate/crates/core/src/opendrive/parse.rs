//! OpenDRIVE (1.4 to 1.6) reader for the subset the auditor needs.

use roxmltree::{Document, Node};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdrError {
    #[error("malformed XML at line {line}, column {column} (byte {offset}): {message}")]
    Xml {
        line: u32,
        column: u32,
        offset: usize,
        message: String,
    },
    #[error("root element is <{root}>, expected <OpenDRIVE>")]
    NotOpenDrive { root: String },
    #[error("<OpenDRIVE> has no <header> (line {line}, column {column})")]
    MissingHeader { line: u32, column: u32 },
    #[error("<{element}> at line {line}: {message}")]
    Invalid {
        element: String,
        line: u32,
        message: String,
    },
    #[error("could not read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdrNetwork {
    pub name: String,
    pub roads: Vec<OdrRoad>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdrRoad {
    pub id: String,
    /// Reference-line length, m.
    pub length: f64,
    pub geometry: Vec<Geometry>,
    pub lane_sections: Vec<LaneSection>,
    pub speed_limit: Option<SpeedLimit>,
    pub road_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geometry {
    pub s: f64,
    pub length: f64,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Line,
    /// Constant curvature, 1/m, never zero.
    Arc { curvature: f64 },
    Spiral { curv_start: f64, curv_end: f64 },
    Other { element: String },
}

impl Shape {
    /// Smallest radius along the element, m. `None` for straight elements.
    pub fn min_radius(&self) -> Option<f64> {
        let k = match self {
            Shape::Arc { curvature } => curvature.abs(),
            Shape::Spiral { curv_start, curv_end } => curv_start.abs().max(curv_end.abs()),
            Shape::Line | Shape::Other { .. } => return None,
        };
        (k > 0.0).then(|| 1.0 / k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaneSection {
    pub s: f64,
    pub lanes: Vec<Lane>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lane {
    pub id: i32,
    pub lane_type: String,
    pub widths: Vec<WidthPoly>,
}

impl Lane {
    /// Width (m) at `ds` metres into the lane section.
    pub fn width_at(&self, ds: f64) -> Option<f64> {
        self.widths
            .iter()
            .rev()
            .find(|w| w.s_offset <= ds)
            .or_else(|| self.widths.first())
            .map(|w| w.eval(ds - w.s_offset))
    }
}

/// `a + b·ds + c·ds² + d·ds³`, metres, from `s_offset` within the section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthPoly {
    pub s_offset: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl WidthPoly {
    pub fn eval(&self, ds: f64) -> f64 {
        self.a + ds * (self.b + ds * (self.c + ds * self.d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpeedUnit {
    #[serde(rename = "m/s")]
    MetresPerSecond,
    #[serde(rename = "mph")]
    Mph,
    #[serde(rename = "km/h")]
    Kmh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedLimit {
    pub value: f64,
    pub unit: SpeedUnit,
}

impl SpeedLimit {
    pub fn to_mph(self) -> f64 {
        match self.unit {
            SpeedUnit::Mph => self.value,
            SpeedUnit::Kmh => crate::units::kmh_to_mph(self.value),
            SpeedUnit::MetresPerSecond => self.value / crate::units::MPS_PER_MPH,
        }
    }
}

fn line_of(doc: &Document, node: Node) -> u32 {
    doc.text_pos_at(node.range().start).row
}

fn invalid(doc: &Document, node: Node, message: impl Into<String>) -> OdrError {
    OdrError::Invalid {
        element: node.tag_name().name().to_owned(),
        line: line_of(doc, node),
        message: message.into(),
    }
}

fn attr_f64(doc: &Document, node: Node, name: &str) -> Result<f64, OdrError> {
    let raw = node
        .attribute(name)
        .ok_or_else(|| invalid(doc, node, format!("missing attribute `{name}`")))?;
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| invalid(doc, node, format!("attribute `{name}` is not a finite number: {raw:?}")))
}

fn attr_f64_or(doc: &Document, node: Node, name: &str, default: f64) -> Result<f64, OdrError> {
    if node.has_attribute(name) {
        attr_f64(doc, node, name)
    } else {
        Ok(default)
    }
}

fn children<'a, 'i>(node: Node<'a, 'i>, tag: &'a str) -> impl Iterator<Item = Node<'a, 'i>> + 'a {
    node.children().filter(move |c| c.has_tag_name(tag))
}

fn byte_offset(text: &str, line: u32, column: u32) -> usize {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line as usize {
            return offset
                + l.char_indices()
                    .nth(column.saturating_sub(1) as usize)
                    .map_or(l.len(), |(b, _)| b);
        }
        offset += l.len();
    }
    text.len()
}

fn end_position(text: &str) -> (u32, u32) {
    let line = text.matches('\n').count() + 1;
    let last = text.rsplit('\n').next().unwrap_or("");
    (line as u32, last.chars().count() as u32 + 1)
}

/// Parses an OpenDRIVE document. `name` labels the resulting network.
///
/// Elements the auditor has no use for are skipped.
pub fn parse_opendrive(name: &str, xml: &[u8]) -> Result<OdrNetwork, OdrError> {
    let text = std::str::from_utf8(xml).map_err(|e| OdrError::Xml {
        line: 0,
        column: 0,
        offset: e.valid_up_to(),
        message: "input is not UTF-8".into(),
    })?;
    let doc = Document::parse(text).map_err(|e| {
        // roxmltree does not track a position for premature end of input.
        let (line, column, offset) = if matches!(e, roxmltree::Error::UnexpectedEndOfStream) {
            let (line, column) = end_position(text);
            (line, column, text.len())
        } else {
            let pos = e.pos();
            (pos.row, pos.col, byte_offset(text, pos.row, pos.col))
        };
        OdrError::Xml {
            line,
            column,
            offset,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "OpenDRIVE" {
        return Err(OdrError::NotOpenDrive {
            root: root.tag_name().name().to_owned(),
        });
    }
    if children(root, "header").next().is_none() {
        let pos = doc.text_pos_at(root.range().start);
        return Err(OdrError::MissingHeader {
            line: pos.row,
            column: pos.col,
        });
    }

    let mut roads = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for road in children(root, "road") {
        let parsed = parse_road(&doc, road)?;
        if !ids.insert(parsed.id.clone()) {
            return Err(invalid(&doc, road, format!("duplicate road id `{}`", parsed.id)));
        }
        roads.push(parsed);
    }
    Ok(OdrNetwork {
        name: name.to_owned(),
        roads,
    })
}

/// Reads and parses a `.xodr` file, naming the network after the file stem.
pub fn parse_opendrive_file(path: &std::path::Path) -> Result<OdrNetwork, OdrError> {
    let bytes = std::fs::read(path).map_err(|e| OdrError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_opendrive(&name, &bytes)
}

fn parse_road(doc: &Document, road: Node) -> Result<OdrRoad, OdrError> {
    let id = road
        .attribute("id")
        .ok_or_else(|| invalid(doc, road, "missing attribute `id`"))?
        .to_owned();
    let length = attr_f64(doc, road, "length")?;

    let mut geometry = Vec::new();
    for plan in children(road, "planView") {
        for g in children(plan, "geometry") {
            let s = attr_f64(doc, g, "s")?;
            if geometry.last().is_some_and(|prev: &Geometry| s < prev.s - 1e-6) {
                return Err(invalid(doc, g, "geometry s-offsets decrease"));
            }
            let shape = match g.children().find(Node::is_element) {
                Some(n) if n.has_tag_name("line") => Shape::Line,
                Some(n) if n.has_tag_name("arc") => {
                    let curvature = attr_f64(doc, n, "curvature")?;
                    if curvature == 0.0 {
                        Shape::Line
                    } else {
                        Shape::Arc { curvature }
                    }
                }
                Some(n) if n.has_tag_name("spiral") => Shape::Spiral {
                    curv_start: attr_f64(doc, n, "curvStart")?,
                    curv_end: attr_f64(doc, n, "curvEnd")?,
                },
                Some(n) => Shape::Other {
                    element: n.tag_name().name().to_owned(),
                },
                None => Shape::Other { element: String::new() },
            };
            geometry.push(Geometry {
                s,
                length: attr_f64(doc, g, "length")?,
                shape,
            });
        }
    }

    let mut lane_sections = Vec::new();
    for lanes in children(road, "lanes") {
        for section in children(lanes, "laneSection") {
            let mut parsed = Vec::new();
            for side in ["left", "center", "right"] {
                for group in children(section, side) {
                    for lane in children(group, "lane") {
                        parsed.push(parse_lane(doc, lane)?);
                    }
                }
            }
            lane_sections.push(LaneSection {
                s: attr_f64(doc, section, "s")?,
                lanes: parsed,
            });
        }
    }

    let mut speed_limit = None;
    let mut road_type = None;
    for t in children(road, "type") {
        if road_type.is_none() {
            road_type = t.attribute("type").map(str::to_owned);
        }
        if speed_limit.is_none() {
            speed_limit = children(t, "speed").find_map(parse_speed);
        }
    }

    Ok(OdrRoad {
        id,
        length,
        geometry,
        lane_sections,
        speed_limit,
        road_type,
    })
}

fn parse_lane(doc: &Document, lane: Node) -> Result<Lane, OdrError> {
    let id = lane
        .attribute("id")
        .and_then(|v| v.trim().parse::<i32>().ok())
        .ok_or_else(|| invalid(doc, lane, "lane needs an integer `id`"))?;
    let mut widths = Vec::new();
    for w in children(lane, "width") {
        widths.push(WidthPoly {
            s_offset: attr_f64_or(doc, w, "sOffset", 0.0)?,
            a: attr_f64_or(doc, w, "a", 0.0)?,
            b: attr_f64_or(doc, w, "b", 0.0)?,
            c: attr_f64_or(doc, w, "c", 0.0)?,
            d: attr_f64_or(doc, w, "d", 0.0)?,
        });
    }
    widths.sort_by(|x, y| x.s_offset.total_cmp(&y.s_offset));
    Ok(Lane {
        id,
        lane_type: lane.attribute("type").unwrap_or("none").to_owned(),
        widths,
    })
}

/// `max` may be "no limit" or "undefined"; those carry no limit.
fn parse_speed(node: Node) -> Option<SpeedLimit> {
    let value = node.attribute("max")?.trim().parse::<f64>().ok()?;
    if !(value.is_finite() && value > 0.0) {
        return None;
    }
    let unit = match node.attribute("unit").map(str::trim) {
        None | Some("m/s") => SpeedUnit::MetresPerSecond,
        Some("mph") => SpeedUnit::Mph,
        Some("km/h") => SpeedUnit::Kmh,
        Some(_) => return None,
    };
    Some(SpeedLimit { value, unit })
}
