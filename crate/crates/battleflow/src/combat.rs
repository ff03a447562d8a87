//! Combat sites and long-distance attacks.
//!
//! Combat points — the target positions of hit/kill events, where damage
//! actually lands — are density-clustered (DBSCAN). Each cluster becomes
//! a combat site with a convex hull and a smoothed enclosure curve, the
//! white outline on the rendered map that also trims trajectory tails in
//! the flow-graph stage. Attacks whose attacker-target distance exceeds a
//! range threshold are aggregated into long-range attack arrows instead
//! of movement geometry.

use crate::geom::{centroid, convex_hull, Point, Polygon};
use crate::ingest::{CombatEvent, MatchLog, TeamId};
use crate::semantics::TimeSpan;
use crate::territory::{LandmarkId, Territory};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A cluster of combat events with its enclosing geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombatSite {
    pub id: u32,
    /// Indices into the event list this site was clustered from.
    pub member_indices: Vec<usize>,
    /// Convex hull of the member target positions.
    pub hull: Polygon,
    /// Smoothed closed curve enclosing the hull with an `eps/2` margin.
    pub outline: Polygon,
    pub time_span: TimeSpan,
}

/// Aggregated long-distance attacks from one landmark onto one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRangeAttack {
    pub team: TeamId,
    pub from: Point,
    pub to: Point,
    pub count: u32,
}

/// DBSCAN over target positions: neighbors within `eps` (inclusive),
/// cores need `min_pts` neighbors including themselves. Noise events form
/// no site. Sites are ordered by the `(x, y)` of their member centroid.
pub fn cluster_combat(events: &[CombatEvent], eps: f64, min_pts: usize) -> Vec<CombatSite> {
    let points: Vec<Point> = events.iter().map(|e| e.target_pos).collect();
    let n = points.len();
    let eps_sq = eps * eps;
    let neighbors = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| points[i].distance_sq(points[j]) <= eps_sq)
            .collect()
    };

    const UNCLASSIFIED: usize = usize::MAX;
    const NOISE: usize = usize::MAX - 1;
    let mut label = vec![UNCLASSIFIED; n];
    let mut cluster = 0usize;
    for i in 0..n {
        if label[i] != UNCLASSIFIED {
            continue;
        }
        let seed_neighbors = neighbors(i);
        if seed_neighbors.len() < min_pts {
            label[i] = NOISE;
            continue;
        }
        label[i] = cluster;
        let mut queue: Vec<usize> = seed_neighbors;
        while let Some(j) = queue.pop() {
            if label[j] == NOISE {
                label[j] = cluster; // border point
            }
            if label[j] != UNCLASSIFIED {
                continue;
            }
            label[j] = cluster;
            let nb = neighbors(j);
            if nb.len() >= min_pts {
                queue.extend(nb);
            }
        }
        cluster += 1;
    }

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); cluster];
    for (i, &l) in label.iter().enumerate() {
        if l < cluster {
            clusters[l].push(i);
        }
    }
    clusters.sort_by(|a, b| {
        let ca = centroid(&a.iter().map(|&i| points[i]).collect::<Vec<_>>());
        let cb = centroid(&b.iter().map(|&i| points[i]).collect::<Vec<_>>());
        ca.cmp_xy(&cb)
    });

    clusters
        .into_iter()
        .enumerate()
        .map(|(id, member_indices)| {
            let positions: Vec<Point> = member_indices.iter().map(|&i| points[i]).collect();
            let hull = convex_hull(&positions);
            let outline = enclosure_outline(&hull, eps / 2.0);
            let time_span = member_indices
                .iter()
                .map(|&i| TimeSpan::new(events[i].t, events[i].t))
                .reduce(TimeSpan::union)
                .expect("clusters are nonempty");
            CombatSite {
                id: id as u32,
                member_indices,
                hull,
                outline,
                time_span,
            }
        })
        .collect()
}

/// Builds the smoothed enclosure: hull vertices are buffered outward by
/// `margin` (octagonal offsets keep degenerate one- and two-point hulls
/// working), the buffered hull's vertices become control points, and a
/// closed Catmull-Rom curve through them is sampled into a polygon. For
/// convex control polygons the curve bulges outward mid-segment, so the
/// original hull stays strictly inside.
fn enclosure_outline(hull: &[Point], margin: f64) -> Polygon {
    let mut buffered = Vec::with_capacity(hull.len() * 8);
    for &v in hull {
        for k in 0..8 {
            let a = std::f64::consts::TAU * k as f64 / 8.0;
            buffered.push(v + Point::new(a.cos(), a.sin()) * margin);
        }
    }
    let controls = convex_hull(&buffered);
    if controls.len() < 3 {
        return controls;
    }
    // closed uniform Catmull-Rom through the control points
    let n = controls.len();
    let samples_per_segment = 8;
    let mut out = Vec::with_capacity(n * samples_per_segment);
    for i in 0..n {
        let p_prev = controls[(i + n - 1) % n];
        let p0 = controls[i];
        let p1 = controls[(i + 1) % n];
        let p_next = controls[(i + 2) % n];
        let m0 = (p1 - p_prev) * 0.5;
        let m1 = (p_next - p0) * 0.5;
        for k in 0..samples_per_segment {
            let s = k as f64 / samples_per_segment as f64;
            out.push(crate::layout::hermite(p0, m0, p1, m1, s));
        }
    }
    out
}

/// Target of an aggregated long-range attack: a combat site when the
/// event clustered into one, otherwise the landmark under the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum TargetKey {
    Site(u32),
    Landmark(LandmarkId),
}

/// Filters events whose attacker-target distance exceeds `threshold` and
/// aggregates them by (attacker team, attacker landmark, target site or
/// landmark). `from`/`to` are the centroids of the aggregated positions.
pub fn detect_long_range(
    log: &MatchLog,
    territory: &Territory,
    sites: &[CombatSite],
    threshold: f64,
) -> Vec<LongRangeAttack> {
    let unit_team: BTreeMap<&str, TeamId> = log
        .units
        .iter()
        .map(|u| (u.unit_id.as_str(), u.team))
        .collect();
    let mut event_site: BTreeMap<usize, u32> = BTreeMap::new();
    for site in sites {
        for &i in &site.member_indices {
            event_site.insert(i, site.id);
        }
    }

    let mut groups: BTreeMap<(TeamId, LandmarkId, TargetKey), Vec<&CombatEvent>> = BTreeMap::new();
    for (i, ev) in log.combat_events.iter().enumerate() {
        if ev.attacker_pos.distance(ev.target_pos) <= threshold {
            continue;
        }
        let team = *unit_team
            .get(ev.attacker.as_str())
            .expect("combat events reference validated units");
        let from_landmark = territory.nearest(ev.attacker_pos);
        let target = match event_site.get(&i) {
            Some(&site) => TargetKey::Site(site),
            None => TargetKey::Landmark(territory.nearest(ev.target_pos)),
        };
        groups
            .entry((team, from_landmark, target))
            .or_default()
            .push(ev);
    }

    groups
        .into_iter()
        .map(|((team, _, _), events)| {
            let from = centroid(&events.iter().map(|e| e.attacker_pos).collect::<Vec<_>>());
            let to = centroid(&events.iter().map(|e| e.target_pos).collect::<Vec<_>>());
            LongRangeAttack {
                team,
                from,
                to,
                count: events.len() as u32,
            }
        })
        .collect()
}
