//! Merging representative trajectories into weighted directed acyclic
//! flow graphs, one per team and origin.
//!
//! Before merging, each route is trimmed against the combat enclosure
//! around its destination and split wherever it revisits a landmark
//! (backtracking belongs in a separate graph). Merging then adds every
//! landmark transition as a directed edge, accumulating unit counts on
//! edges that already exist, and records where units stop moving as
//! per-node terminations. The result conserves flow: at every non-root
//! node the incoming weight equals outgoing weight plus termination.

use crate::geom::{polygon_contains, Point, Polygon};
use crate::ingest::TeamId;
use crate::parallel::map_collect;
use crate::semantics::{RepresentativeTrajectory, TimeSpan};
use crate::territory::LandmarkId;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Directed transition between two landmarks, weighted by unit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowEdge {
    pub from: LandmarkId,
    pub to: LandmarkId,
    pub weight: u32,
}

/// Weighted DAG over landmarks describing one team's movement from one
/// origin. Nodes and edges are kept sorted so identical inputs produce
/// byte-identical graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowGraph {
    pub team: TeamId,
    pub root: LandmarkId,
    pub nodes: Vec<LandmarkId>,
    pub edges: Vec<FlowEdge>,
    /// Units whose movement ends at each node.
    pub termination: BTreeMap<LandmarkId, u32>,
    pub time_span: TimeSpan,
}

impl FlowGraph {
    pub fn out_weight(&self, v: LandmarkId) -> u32 {
        self.edges
            .iter()
            .filter(|e| e.from == v)
            .map(|e| e.weight)
            .sum()
    }

    pub fn in_weight(&self, v: LandmarkId) -> u32 {
        self.edges
            .iter()
            .filter(|e| e.to == v)
            .map(|e| e.weight)
            .sum()
    }

    pub fn out_degree(&self, v: LandmarkId) -> usize {
        self.edges.iter().filter(|e| e.from == v).count()
    }

    pub fn termination_at(&self, v: LandmarkId) -> u32 {
        self.termination.get(&v).copied().unwrap_or(0)
    }
}

#[derive(Debug, Error)]
pub enum FlowGraphError {
    #[error("cycle error: {0}")]
    Cycle(String),
}

/// Removes every non-final landmark whose centroid lies inside the
/// enclosure containing the destination, then collapses consecutive
/// duplicates created by the removal. Routes whose destination is inside
/// no enclosure pass through unchanged. The result can degenerate to a
/// single landmark; callers drop such routes from the movement set.
pub fn trim_destination_enclosure(
    rep: &RepresentativeTrajectory,
    enclosures: &[Polygon],
    positions: &[Point],
) -> RepresentativeTrajectory {
    if rep.landmarks.len() < 2 {
        return rep.clone();
    }
    let dest = rep.landmarks[rep.landmarks.len() - 1];
    let enclosure = enclosures
        .iter()
        .find(|e| polygon_contains(e, positions[dest.0 as usize]));
    let Some(enclosure) = enclosure else {
        return rep.clone();
    };

    let last_index = rep.landmarks.len() - 1;
    let mut kept: Vec<LandmarkId> = Vec::with_capacity(rep.landmarks.len());
    for (i, &lm) in rep.landmarks.iter().enumerate() {
        if i != last_index && polygon_contains(enclosure, positions[lm.0 as usize]) {
            continue;
        }
        if kept.last() == Some(&lm) {
            continue;
        }
        kept.push(lm);
    }
    RepresentativeTrajectory {
        landmarks: kept,
        ..rep.clone()
    }
}

/// Splits a route at landmark revisits: when a landmark repeats within
/// the current segment, the segment closes at the previous landmark and a
/// new one opens there, so consecutive segments overlap in exactly one
/// boundary landmark and every segment visits distinct landmarks. Time
/// spans are partitioned proportionally to landmark position, the only
/// resolution available once member visit times have been aggregated.
pub fn split_at_revisit(rep: &RepresentativeTrajectory) -> Vec<RepresentativeTrajectory> {
    let lms = &rep.landmarks;
    if lms.len() < 2 {
        return vec![rep.clone()];
    }
    // (start index in the original sequence, landmarks)
    let mut segments: Vec<(usize, Vec<LandmarkId>)> = Vec::new();
    let mut seen: BTreeSet<LandmarkId> = BTreeSet::new();
    let mut cur: Vec<LandmarkId> = vec![lms[0]];
    let mut cur_start = 0usize;
    seen.insert(lms[0]);
    for (i, &lm) in lms.iter().enumerate().skip(1) {
        if seen.contains(&lm) {
            let prev = *cur.last().expect("segment is nonempty");
            segments.push((cur_start, std::mem::take(&mut cur)));
            cur_start = i - 1;
            cur = vec![prev, lm];
            seen.clear();
            seen.insert(prev);
            seen.insert(lm);
        } else {
            seen.insert(lm);
            cur.push(lm);
        }
    }
    segments.push((cur_start, cur));

    let span = rep.time_span;
    let denom = (lms.len() - 1) as f64;
    let at = |index: usize| span.start + (span.end - span.start) * index as f64 / denom;
    segments
        .into_iter()
        .map(|(start, landmarks)| {
            let end = start + landmarks.len() - 1;
            RepresentativeTrajectory {
                team: rep.team,
                landmarks,
                unit_count: rep.unit_count,
                time_span: TimeSpan::new(at(start), at(end)),
                member_ids: rep.member_ids.clone(),
            }
        })
        .collect()
}

/// Whether adding `rep`'s transitions to `edges` keeps the graph acyclic.
fn acyclic_with(edges: &BTreeMap<(LandmarkId, LandmarkId), u32>, rep: &[LandmarkId]) -> bool {
    let mut adj: BTreeMap<LandmarkId, BTreeSet<LandmarkId>> = BTreeMap::new();
    for &(from, to) in edges.keys() {
        adj.entry(from).or_default().insert(to);
        adj.entry(to).or_default();
    }
    for w in rep.windows(2) {
        adj.entry(w[0]).or_default().insert(w[1]);
        adj.entry(w[1]).or_default();
    }
    // Kahn's algorithm
    let mut in_deg: BTreeMap<LandmarkId, usize> = adj.keys().map(|&v| (v, 0)).collect();
    for tos in adj.values() {
        for &to in tos {
            *in_deg.get_mut(&to).expect("target registered above") += 1;
        }
    }
    let mut queue: Vec<LandmarkId> = in_deg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| v)
        .collect();
    let mut visited = 0usize;
    while let Some(v) = queue.pop() {
        visited += 1;
        for &to in &adj[&v] {
            let d = in_deg.get_mut(&to).expect("target registered above");
            *d -= 1;
            if *d == 0 {
                queue.push(to);
            }
        }
    }
    visited == adj.len()
}

struct GraphBuilder {
    team: TeamId,
    root: LandmarkId,
    edges: BTreeMap<(LandmarkId, LandmarkId), u32>,
    termination: BTreeMap<LandmarkId, u32>,
    time_span: Option<TimeSpan>,
}

impl GraphBuilder {
    fn new(team: TeamId, root: LandmarkId) -> Self {
        GraphBuilder {
            team,
            root,
            edges: BTreeMap::new(),
            termination: BTreeMap::new(),
            time_span: None,
        }
    }

    fn insert(&mut self, rep: &RepresentativeTrajectory) {
        for w in rep.landmarks.windows(2) {
            *self.edges.entry((w[0], w[1])).or_insert(0) += rep.unit_count;
        }
        let last = rep.landmarks[rep.landmarks.len() - 1];
        *self.termination.entry(last).or_insert(0) += rep.unit_count;
        self.time_span = Some(match self.time_span {
            Some(s) => s.union(rep.time_span),
            None => rep.time_span,
        });
    }

    fn finish(self) -> FlowGraph {
        let mut nodes: BTreeSet<LandmarkId> = BTreeSet::new();
        for &(from, to) in self.edges.keys() {
            nodes.insert(from);
            nodes.insert(to);
        }
        FlowGraph {
            team: self.team,
            root: self.root,
            nodes: nodes.into_iter().collect(),
            edges: self
                .edges
                .into_iter()
                .map(|((from, to), weight)| FlowEdge { from, to, weight })
                .collect(),
            termination: self.termination,
            time_span: self.time_span.unwrap_or(TimeSpan::new(0.0, 0.0)),
        }
    }
}

/// Merges routes sharing a team and origin into acyclic graphs. Routes
/// are inserted in ascending `(time start, member id)` order; a route
/// whose insertion would close a directed cycle (opposite traversals of
/// the same landmarks) is evicted into the next sibling graph, repeating
/// until every route is placed. Errors if a single route is itself
/// cyclic, which violates the all-distinct precondition.
pub fn break_cycles(reps: &[&RepresentativeTrajectory]) -> Result<Vec<FlowGraph>, FlowGraphError> {
    if reps.is_empty() {
        return Ok(Vec::new());
    }
    let team = reps[0].team;
    let root = reps[0].landmarks[0];
    for rep in reps {
        let distinct: BTreeSet<&LandmarkId> = rep.landmarks.iter().collect();
        if distinct.len() != rep.landmarks.len() {
            return Err(FlowGraphError::Cycle(format!(
                "route {:?} revisits a landmark; split it before merging",
                rep.landmarks
            )));
        }
    }

    let mut sorted: Vec<&RepresentativeTrajectory> = reps.to_vec();
    sorted.sort_by(|a, b| {
        a.time_span
            .start
            .total_cmp(&b.time_span.start)
            .then_with(|| a.member_ids.cmp(&b.member_ids))
            .then_with(|| a.landmarks.cmp(&b.landmarks))
    });

    let mut graphs = Vec::new();
    let mut remaining = sorted;
    while !remaining.is_empty() {
        let mut builder = GraphBuilder::new(team, root);
        let mut evicted = Vec::new();
        for rep in remaining {
            if acyclic_with(&builder.edges, &rep.landmarks) {
                builder.insert(rep);
            } else {
                evicted.push(rep);
            }
        }
        graphs.push(builder.finish());
        remaining = evicted;
    }
    Ok(graphs)
}

/// Builds all flow graphs: routes are bucketed by `(team, origin)`, then
/// within a bucket merged together only when their time spans pairwise
/// overlap after each is extended by `time_window / 2` (`None` means an
/// unbounded window that merges the whole bucket). Routes with fewer than
/// two landmarks carry no transitions and are skipped.
pub fn build_flow_graphs(
    reps: &[RepresentativeTrajectory],
    time_window: Option<f64>,
) -> Result<Vec<FlowGraph>, FlowGraphError> {
    let mut buckets: BTreeMap<(TeamId, LandmarkId), Vec<&RepresentativeTrajectory>> =
        BTreeMap::new();
    for rep in reps {
        if rep.landmarks.len() < 2 {
            continue;
        }
        buckets
            .entry((rep.team, rep.landmarks[0]))
            .or_default()
            .push(rep);
    }

    let buckets: Vec<Vec<&RepresentativeTrajectory>> = buckets.into_values().collect();
    let results = map_collect(&buckets, |bucket| {
        let mut sorted = bucket.clone();
        sorted.sort_by(|a, b| {
            a.time_span
                .start
                .total_cmp(&b.time_span.start)
                .then_with(|| a.time_span.end.total_cmp(&b.time_span.end))
                .then_with(|| a.member_ids.cmp(&b.member_ids))
        });

        // Greedy grouping into sets with pairwise-overlapping extended
        // spans. Intervals have the Helly property, so maintaining the
        // running intersection is enough to guarantee pairwise overlap.
        let mut time_groups: Vec<Vec<&RepresentativeTrajectory>> = Vec::new();
        match time_window {
            None => time_groups.push(sorted),
            Some(w) => {
                let margin = w / 2.0;
                let mut current: Vec<&RepresentativeTrajectory> = Vec::new();
                let mut intersection_end = f64::INFINITY;
                for rep in sorted {
                    let ext_start = rep.time_span.start - margin;
                    let ext_end = rep.time_span.end + margin;
                    if current.is_empty() || ext_start <= intersection_end {
                        intersection_end = intersection_end.min(ext_end);
                        current.push(rep);
                    } else {
                        time_groups.push(std::mem::take(&mut current));
                        current.push(rep);
                        intersection_end = ext_end;
                    }
                }
                if !current.is_empty() {
                    time_groups.push(current);
                }
            }
        }

        time_groups
            .into_iter()
            .map(|group| break_cycles(&group))
            .collect::<Result<Vec<_>, _>>()
            .map(|gs| gs.into_iter().flatten().collect::<Vec<FlowGraph>>())
    });

    let mut graphs = Vec::new();
    for r in results {
        graphs.extend(r?);
    }
    Ok(graphs)
}

/// Topological-sort acyclicity check used by tests and debug assertions.
pub fn topological_order(graph: &FlowGraph) -> Option<Vec<LandmarkId>> {
    let mut in_deg: BTreeMap<LandmarkId, usize> = graph.nodes.iter().map(|&v| (v, 0)).collect();
    for e in &graph.edges {
        *in_deg.get_mut(&e.to)? += 1;
    }
    let mut ready: Vec<LandmarkId> = in_deg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| v)
        .collect();
    ready.sort();
    let mut order = Vec::with_capacity(graph.nodes.len());
    while let Some(v) = ready.pop() {
        order.push(v);
        for e in graph.edges.iter().filter(|e| e.from == v) {
            let d = in_deg.get_mut(&e.to).expect("node listed in graph");
            *d -= 1;
            if *d == 0 {
                ready.push(e.to);
            }
        }
        ready.sort();
    }
    if order.len() == graph.nodes.len() {
        Some(order)
    } else {
        None
    }
}
