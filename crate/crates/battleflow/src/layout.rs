//! Spline geometry for flow graphs.
//!
//! Every node gets a frame: a principal direction averaging all incoming
//! and outgoing movement, and its normal. Every edge becomes a cubic
//! Hermite band whose endpoints are displaced along the node normals so
//! that bands incident to one node stack side by side instead of
//! overlapping, sorted clockwise to keep crossings down. All bands at a
//! node share the node's tangent direction, which is what makes the
//! piecewise representation read as one continuous flow.
//!
//! Conventions, pinned so tests can be exact: the world frame is y-up,
//! normals are the tangent rotated +90° (counterclockwise), clockwise
//! angles are measured from the node's principal direction, and tangent
//! magnitude equals the distance between the band's endpoints (scale-free
//! curvature without overshoot on short edges).

use crate::flowgraph::FlowGraph;
use crate::geom::Point;
use crate::territory::LandmarkId;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Per-node geometry: position, principal movement direction `tangent`
/// (unit length) and `normal` = tangent rotated +90°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeFrame {
    pub landmark: LandmarkId,
    pub position: Point,
    pub tangent: Point,
    pub normal: Point,
}

/// Cubic Hermite band for one flow edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBand {
    pub from: LandmarkId,
    pub to: LandmarkId,
    pub p0: Point,
    pub m0: Point,
    pub p1: Point,
    pub m1: Point,
    /// Constant ribbon width in world units.
    pub width: f64,
    pub weight: u32,
    /// Unit count shown next to the band, when labeled.
    pub label: Option<u32>,
}

impl SplineBand {
    /// Curve point at `s` in `[0, 1]`.
    pub fn point_at(&self, s: f64) -> Point {
        hermite(self.p0, self.m0, self.p1, self.m1, s)
    }

    /// Curve derivative at `s`.
    pub fn derivative_at(&self, s: f64) -> Point {
        hermite_derivative(self.p0, self.m0, self.p1, self.m1, s)
    }

    /// Label anchor: the curve midpoint displaced by `width/2 + 2` along
    /// the curve normal at `s = 0.5`.
    pub fn label_anchor(&self) -> Point {
        let mid = self.point_at(0.5);
        let normal = self.derivative_at(0.5).normalized().rot90ccw();
        mid + normal * (self.width / 2.0 + 2.0)
    }

    /// Ribbon polygon: the curve swept `±width/2` along its normalized
    /// normal, sampled at `segments` steps (left rail out, right rail
    /// back). Degenerate derivatives reuse the previous sample's normal.
    pub fn ribbon(&self, segments: usize) -> Vec<Point> {
        let half = self.width / 2.0;
        let mut left = Vec::with_capacity(segments + 1);
        let mut right = Vec::with_capacity(segments + 1);
        let mut last_normal = (self.p1 - self.p0).normalized().rot90ccw();
        for i in 0..=segments {
            let s = i as f64 / segments as f64;
            let d = self.derivative_at(s);
            let normal = if d.norm() < 1e-12 {
                last_normal
            } else {
                d.normalized().rot90ccw()
            };
            last_normal = normal;
            let c = self.point_at(s);
            left.push(c + normal * half);
            right.push(c - normal * half);
        }
        right.reverse();
        left.extend(right);
        left
    }
}

/// Spline representation of one flow graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowLayout {
    pub graph: FlowGraph,
    pub frames: BTreeMap<LandmarkId, NodeFrame>,
    pub bands: Vec<SplineBand>,
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("landmark {0} has no incident edges")]
    IsolatedNode(LandmarkId),
}

/// Cubic Hermite interpolation between `p0` and `p1` with tangents `m0`,
/// `m1`:
///
/// `h(s) = (2s³−3s²+1)·p0 + (s³−2s²+s)·m0 + (−2s³+3s²)·p1 + (s³−s²)·m1`
pub fn hermite(p0: Point, m0: Point, p1: Point, m1: Point, s: f64) -> Point {
    let s2 = s * s;
    let s3 = s2 * s;
    p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + m0 * (s3 - 2.0 * s2 + s)
        + p1 * (-2.0 * s3 + 3.0 * s2)
        + m1 * (s3 - s2)
}

/// Derivative of [`hermite`] with respect to `s`.
pub fn hermite_derivative(p0: Point, m0: Point, p1: Point, m1: Point, s: f64) -> Point {
    let s2 = s * s;
    p0 * (6.0 * s2 - 6.0 * s)
        + m0 * (3.0 * s2 - 4.0 * s + 1.0)
        + p1 * (-6.0 * s2 + 6.0 * s)
        + m1 * (3.0 * s2 - 2.0 * s)
}

/// Principal direction at `v`: the weighted average of the unit directions
/// of all incoming and outgoing edges. When opposing flows cancel the sum
/// (magnitude below 1e-9), the direction of the heaviest outgoing edge is
/// used instead, then the heaviest incoming; ties break to the lower
/// neighbor id.
pub fn node_frame(
    graph: &FlowGraph,
    v: LandmarkId,
    positions: &[Point],
) -> Result<NodeFrame, LayoutError> {
    let pos = positions[v.0 as usize];
    let mut sum = Point::ZERO;
    let mut heaviest_out: Option<&crate::flowgraph::FlowEdge> = None;
    let mut heaviest_in: Option<&crate::flowgraph::FlowEdge> = None;
    let mut incident = false;
    for e in &graph.edges {
        if e.from == v {
            incident = true;
            sum = sum + (positions[e.to.0 as usize] - pos).normalized() * e.weight as f64;
            if heaviest_out.is_none_or(|h| {
                (e.weight, std::cmp::Reverse(e.to)) > (h.weight, std::cmp::Reverse(h.to))
            }) {
                heaviest_out = Some(e);
            }
        } else if e.to == v {
            incident = true;
            sum = sum + (pos - positions[e.from.0 as usize]).normalized() * e.weight as f64;
            if heaviest_in.is_none_or(|h| {
                (e.weight, std::cmp::Reverse(e.from)) > (h.weight, std::cmp::Reverse(h.from))
            }) {
                heaviest_in = Some(e);
            }
        }
    }
    if !incident {
        return Err(LayoutError::IsolatedNode(v));
    }
    let tangent = if sum.norm() >= 1e-9 {
        sum.normalized()
    } else if let Some(e) = heaviest_out {
        (positions[e.to.0 as usize] - pos).normalized()
    } else {
        let e = heaviest_in.expect("node has at least one incident edge");
        (pos - positions[e.from.0 as usize]).normalized()
    };
    Ok(NodeFrame {
        landmark: v,
        position: pos,
        tangent,
        normal: tangent.rot90ccw(),
    })
}

/// Band width: `w_max · weight / max_troop`, constant along the band so
/// perceived troop strength does not drift with traveled distance.
pub fn band_width(weight: u32, max_troop: u32, w_max: f64) -> f64 {
    debug_assert!(max_troop >= 1 && weight >= 1 && weight <= max_troop);
    w_max * weight as f64 / max_troop as f64
}

/// An edge incident to the node whose offsets are being stacked.
#[derive(Debug, Clone, Copy)]
pub struct IncidentEdge {
    /// The far endpoint's landmark id (tie-break key).
    pub other: LandmarkId,
    /// The far endpoint's position.
    pub other_pos: Point,
    pub width: f64,
}

/// Signed offsets along the node normal for a set of incident bands,
/// returned in input order. Edges are stacked in clockwise-angle order
/// (measured from the node tangent, ties by far landmark id) with
/// `offset_i = −W/2 + Σ_{j<i} w_j + w_i/2`, so the bands abut exactly and
/// the stack is centered on the node.
pub fn stack_offsets(frame: &NodeFrame, edges: &[IncidentEdge]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    let angle = |e: &IncidentEdge| -> f64 {
        let d = e.other_pos - frame.position;
        let ccw = frame.tangent.cross(d).atan2(frame.tangent.dot(d));
        (-ccw).rem_euclid(std::f64::consts::TAU)
    };
    order.sort_by(|&a, &b| {
        angle(&edges[a])
            .total_cmp(&angle(&edges[b]))
            .then_with(|| edges[a].other.cmp(&edges[b].other))
    });

    let total: f64 = edges.iter().map(|e| e.width).sum();
    let mut offsets = vec![0.0; edges.len()];
    let mut stacked = 0.0;
    for &i in &order {
        offsets[i] = -total / 2.0 + stacked + edges[i].width / 2.0;
        stacked += edges[i].width;
    }
    offsets
}

/// Lays out one flow graph: frames for every node, then one band per edge
/// with endpoints from [`stack_offsets`] at both nodes, tangents along
/// the node directions with magnitude equal to the endpoint distance, and
/// widths from [`band_width`]. Bands are emitted in topological order
/// from the root.
pub fn layout_graph(
    graph: &FlowGraph,
    positions: &[Point],
    w_max: f64,
    max_troop: u32,
) -> Result<FlowLayout, LayoutError> {
    let mut frames: BTreeMap<LandmarkId, NodeFrame> = BTreeMap::new();
    for &v in &graph.nodes {
        frames.insert(v, node_frame(graph, v, positions)?);
    }

    // endpoint offsets per edge, stacked over outgoing and incoming sides
    let mut start_offset: BTreeMap<(LandmarkId, LandmarkId), f64> = BTreeMap::new();
    let mut end_offset: BTreeMap<(LandmarkId, LandmarkId), f64> = BTreeMap::new();
    for (&v, frame) in &frames {
        let outgoing: Vec<&crate::flowgraph::FlowEdge> =
            graph.edges.iter().filter(|e| e.from == v).collect();
        let incident: Vec<IncidentEdge> = outgoing
            .iter()
            .map(|e| IncidentEdge {
                other: e.to,
                other_pos: positions[e.to.0 as usize],
                width: band_width(e.weight, max_troop, w_max),
            })
            .collect();
        for (e, off) in outgoing.iter().zip(stack_offsets(frame, &incident)) {
            start_offset.insert((e.from, e.to), off);
        }

        let incoming: Vec<&crate::flowgraph::FlowEdge> =
            graph.edges.iter().filter(|e| e.to == v).collect();
        let incident: Vec<IncidentEdge> = incoming
            .iter()
            .map(|e| IncidentEdge {
                other: e.from,
                other_pos: positions[e.from.0 as usize],
                width: band_width(e.weight, max_troop, w_max),
            })
            .collect();
        for (e, off) in incoming.iter().zip(stack_offsets(frame, &incident)) {
            end_offset.insert((e.from, e.to), off);
        }
    }

    // edges in topological order of their source, then target id
    let topo = crate::flowgraph::topological_order(graph)
        .expect("flow graphs are acyclic by construction");
    let rank: BTreeMap<LandmarkId, usize> = topo.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges: Vec<&crate::flowgraph::FlowEdge> = graph.edges.iter().collect();
    edges.sort_by_key(|e| (rank[&e.from], e.to));

    let bands = edges
        .into_iter()
        .map(|e| {
            let fu = frames[&e.from];
            let fv = frames[&e.to];
            let p0 = fu.position + fu.normal * start_offset[&(e.from, e.to)];
            let p1 = fv.position + fv.normal * end_offset[&(e.from, e.to)];
            let d = p0.distance(p1);
            SplineBand {
                from: e.from,
                to: e.to,
                p0,
                m0: fu.tangent * d,
                p1,
                m1: fv.tangent * d,
                width: band_width(e.weight, max_troop, w_max),
                weight: e.weight,
                label: None,
            }
        })
        .collect();

    Ok(FlowLayout {
        graph: graph.clone(),
        frames,
        bands,
    })
}

/// Labels the bands that carry information: an edge gets its weight as a
/// label when its source branches (out-degree > 1) or is the root, so the
/// total strength leaving the origin is always readable without labeling
/// every segment.
pub fn place_labels(mut layout: FlowLayout) -> FlowLayout {
    let root = layout.graph.root;
    let out_degree: BTreeMap<LandmarkId, usize> = layout
        .graph
        .nodes
        .iter()
        .map(|&v| (v, layout.graph.out_degree(v)))
        .collect();
    for band in &mut layout.bands {
        band.label = if band.from == root || out_degree[&band.from] > 1 {
            Some(band.weight)
        } else {
            None
        };
    }
    layout
}

/// [`layout_graph`] + [`place_labels`] over all graphs, in parallel when
/// enabled.
pub fn layout_all(
    graphs: &[FlowGraph],
    positions: &[Point],
    w_max: f64,
    max_troop: u32,
) -> Result<Vec<FlowLayout>, LayoutError> {
    crate::parallel::map_collect(graphs, |g| {
        layout_graph(g, positions, w_max, max_troop).map(place_labels)
    })
    .into_iter()
    .collect()
}
