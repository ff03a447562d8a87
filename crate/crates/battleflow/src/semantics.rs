//! Semantic trajectories and representative routes.
//!
//! Raw tracks are abstracted to the sequence of landmarks they visit,
//! split into movement episodes at long dwells, partitioned by team,
//! origin and destination, and clustered by similarity. Each cluster is
//! represented by its medoid — a landmark path some unit actually took —
//! carrying the cluster size as its unit count.

use crate::ingest::{TeamId, UnitTrack};
use crate::parallel::map_collect;
use crate::territory::{LandmarkId, Territory};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Closed time interval in match seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start: f64,
    pub end: f64,
}

impl TimeSpan {
    pub fn new(start: f64, end: f64) -> Self {
        TimeSpan { start, end }
    }

    pub fn union(self, other: TimeSpan) -> TimeSpan {
        TimeSpan {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    /// Whether the intervals intersect after each is widened by
    /// `margin` on both sides.
    pub fn overlaps_within(self, other: TimeSpan, margin: f64) -> bool {
        self.start - margin <= other.end + margin && other.start - margin <= self.end + margin
    }
}

/// One stay inside a landmark cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub landmark: LandmarkId,
    pub enter_t: f64,
    pub exit_t: f64,
}

/// A unit's track abstracted to the landmarks it visited, in order.
/// Consecutive visits always name different landmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticTrajectory {
    pub unit_id: String,
    pub team: TeamId,
    pub visits: Vec<Visit>,
}

impl SemanticTrajectory {
    pub fn origin(&self) -> LandmarkId {
        self.visits[0].landmark
    }

    pub fn destination(&self) -> LandmarkId {
        self.visits[self.visits.len() - 1].landmark
    }

    pub fn landmarks(&self) -> Vec<LandmarkId> {
        self.visits.iter().map(|v| v.landmark).collect()
    }

    pub fn time_span(&self) -> TimeSpan {
        TimeSpan::new(
            self.visits[0].enter_t,
            self.visits[self.visits.len() - 1].exit_t,
        )
    }
}

/// Trajectories of one team sharing origin and destination.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryGroup {
    pub team: TeamId,
    pub origin: LandmarkId,
    pub destination: LandmarkId,
    pub members: Vec<SemanticTrajectory>,
}

/// Medoid landmark path standing in for a cluster of similar routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeTrajectory {
    pub team: TeamId,
    pub landmarks: Vec<LandmarkId>,
    /// Number of member trajectories this route represents.
    pub unit_count: u32,
    pub time_span: TimeSpan,
    pub member_ids: Vec<String>,
}

impl RepresentativeTrajectory {
    pub fn origin(&self) -> LandmarkId {
        self.landmarks[0]
    }
}

/// Maps every sample to its landmark and collapses consecutive runs of
/// the same landmark into one visit spanning the run's sample times.
pub fn semantify(track: &UnitTrack, territory: &Territory) -> SemanticTrajectory {
    let mut visits: Vec<Visit> = Vec::new();
    for sample in &track.samples {
        let lm = territory.nearest(sample.pos);
        match visits.last_mut() {
            Some(v) if v.landmark == lm => v.exit_t = sample.t,
            _ => visits.push(Visit {
                landmark: lm,
                enter_t: sample.t,
                exit_t: sample.t,
            }),
        }
    }
    SemanticTrajectory {
        unit_id: track.unit_id.clone(),
        team: track.team,
        visits,
    }
}

/// [`semantify`] over all units, in parallel when enabled.
pub fn semantify_all(units: &[UnitTrack], territory: &Territory) -> Vec<SemanticTrajectory> {
    map_collect(units, |u| semantify(u, territory))
}

/// Splits a trajectory into movement episodes wherever the unit dwells in
/// one landmark for longer than `idle_gap` seconds. The dwell visit closes
/// one episode and opens the next, so consecutive episodes share exactly
/// one boundary visit and their concatenation reproduces the input.
/// Degenerate single-visit episodes at either end are not emitted — the
/// dwell visit already serves as origin or termination of its neighbor —
/// except when the whole trajectory is one long dwell.
pub fn split_episodes(st: &SemanticTrajectory, idle_gap: f64) -> Vec<SemanticTrajectory> {
    let mut episodes: Vec<SemanticTrajectory> = Vec::new();
    let mut current: Vec<Visit> = Vec::new();
    for &visit in &st.visits {
        current.push(visit);
        if visit.exit_t - visit.enter_t > idle_gap && current.len() > 1 {
            episodes.push(SemanticTrajectory {
                unit_id: st.unit_id.clone(),
                team: st.team,
                visits: std::mem::take(&mut current),
            });
            current.push(visit);
        }
    }
    if current.len() > 1 || episodes.is_empty() {
        episodes.push(SemanticTrajectory {
            unit_id: st.unit_id.clone(),
            team: st.team,
            visits: current,
        });
    }
    episodes
}

/// Buckets trajectories by `(team, origin, destination)`. Stationary
/// trajectories — a single visit, nothing in between — are dropped: they
/// carry no movement (their combat events still count elsewhere).
pub fn group_by_od(trajs: &[SemanticTrajectory]) -> Vec<TrajectoryGroup> {
    let mut groups: BTreeMap<(TeamId, LandmarkId, LandmarkId), Vec<SemanticTrajectory>> =
        BTreeMap::new();
    for st in trajs {
        if st.visits.len() < 2 {
            continue;
        }
        groups
            .entry((st.team, st.origin(), st.destination()))
            .or_default()
            .push(st.clone());
    }
    groups
        .into_iter()
        .map(|((team, origin, destination), members)| TrajectoryGroup {
            team,
            origin,
            destination,
            members,
        })
        .collect()
}

/// Normalized Levenshtein distance between landmark sequences:
/// `edit_distance(a, b) / max(|a|, |b|)`. 0 means identical, 1 disjoint.
pub fn similarity(a: &[LandmarkId], b: &[LandmarkId]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    // two-row dynamic program
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ai) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &bj) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ai != bj);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()] as f64 / a.len().max(b.len()) as f64
}

/// Complete-linkage agglomerative clustering of a group's routes under
/// [`similarity`], merging while the smallest inter-cluster distance is
/// at most `tau`. Every pair inside a cluster therefore has distance
/// <= `tau`. Per cluster the representative is the medoid: the member
/// minimizing summed distance to the rest, ties broken by the
/// lexicographically smaller landmark sequence, then the lower unit id.
pub fn cluster_routes(group: &TrajectoryGroup, tau: f64) -> Vec<RepresentativeTrajectory> {
    let n = group.members.len();
    if n == 0 {
        return Vec::new();
    }
    let routes: Vec<Vec<LandmarkId>> = group.members.iter().map(|m| m.landmarks()).collect();
    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| similarity(&routes[i], &routes[j])).collect())
        .collect();

    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut complete = 0.0_f64;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        complete = complete.max(dist[i][j]);
                    }
                }
                if best.is_none_or(|(_, _, d)| complete < d) {
                    best = Some((a, b, complete));
                }
            }
        }
        match best {
            Some((a, b, d)) if d <= tau => {
                let merged = clusters.remove(b);
                clusters[a].extend(merged);
            }
            _ => break,
        }
    }

    let mut reps: Vec<RepresentativeTrajectory> = clusters
        .into_iter()
        .map(|cluster| {
            let medoid = *cluster
                .iter()
                .min_by(|&&i, &&j| {
                    let cost = |k: usize| cluster.iter().map(|&m| dist[k][m]).sum::<f64>();
                    cost(i)
                        .total_cmp(&cost(j))
                        .then_with(|| routes[i].cmp(&routes[j]))
                        .then_with(|| group.members[i].unit_id.cmp(&group.members[j].unit_id))
                })
                .expect("clusters are nonempty");
            let time_span = cluster
                .iter()
                .map(|&i| group.members[i].time_span())
                .reduce(TimeSpan::union)
                .expect("clusters are nonempty");
            let mut member_ids: Vec<String> = cluster
                .iter()
                .map(|&i| group.members[i].unit_id.clone())
                .collect();
            member_ids.sort();
            RepresentativeTrajectory {
                team: group.team,
                landmarks: routes[medoid].clone(),
                unit_count: cluster.len() as u32,
                time_span,
                member_ids,
            }
        })
        .collect();
    reps.sort_by(|a, b| {
        a.landmarks
            .cmp(&b.landmarks)
            .then_with(|| a.member_ids.cmp(&b.member_ids))
    });
    reps
}

/// Clusters every group (in parallel when enabled) and concatenates the
/// representatives in `(team, origin, destination)` order.
pub fn cluster_all_routes(groups: &[TrajectoryGroup], tau: f64) -> Vec<RepresentativeTrajectory> {
    map_collect(groups, |g| cluster_routes(g, tau))
        .into_iter()
        .flatten()
        .collect()
}
