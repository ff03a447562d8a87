//! Territory subdivision derived from the movement data itself.
//!
//! Characteristic points (trip endpoints, sharp turns, stop episodes) are
//! extracted from the unit tracks, greedily clustered into seeds, and the
//! seeds' Voronoi diagram clipped to the map bounds yields the cells.
//! Each cell is a landmark: the atom that semantic trajectories are built
//! from. Construction is sequential and fully deterministic; the
//! resulting [`Territory`] is immutable and cheap to share across
//! threads.

use crate::geom::{clip_halfplane, Point, Polygon, Rect};
use crate::ingest::UnitTrack;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Index of a landmark within its territory, assigned in sorted `(x, y)`
/// order of the seeds so that identical inputs get identical ids.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct LandmarkId(pub u32);

impl fmt::Display for LandmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One territory cell: the seed point that generated it (the position all
/// spline geometry anchors to) and its Voronoi region clipped to bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub id: LandmarkId,
    pub centroid: Point,
    pub cell: Polygon,
}

/// Immutable subdivision of the map into landmark cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Territory {
    pub bounds: Rect,
    pub landmarks: Vec<Landmark>,
}

#[derive(Debug, Error)]
pub enum TerritoryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("point [{0}, {1}] outside map bounds")]
    OutOfBounds(f64, f64),
}

/// Extracts the points that characterize movement: per unit its first and
/// last sample, every sample where the heading changes by more than
/// `turn_angle_deg`, and the mean position of each stop episode (speed
/// below `stop_speed` sustained for at least `stop_min_duration`).
pub fn extract_characteristic_points(
    units: &[UnitTrack],
    turn_angle_deg: f64,
    stop_speed: f64,
    stop_min_duration: f64,
) -> Result<Vec<Point>, TerritoryError> {
    if units.iter().all(|u| u.samples.len() < 2) {
        return Err(TerritoryError::DegenerateInput(
            "every unit has fewer than 2 samples".into(),
        ));
    }
    let turn_threshold = turn_angle_deg.to_radians();
    let mut points = Vec::new();
    for unit in units {
        let samples = &unit.samples;
        if samples.is_empty() {
            continue;
        }
        if samples.len() == 1 {
            points.push(samples[0].pos);
            continue;
        }
        points.push(samples[0].pos);
        points.push(samples[samples.len() - 1].pos);

        // turns
        for i in 1..samples.len() - 1 {
            let v_in = samples[i].pos - samples[i - 1].pos;
            let v_out = samples[i + 1].pos - samples[i].pos;
            if v_in.norm() < 1e-12 || v_out.norm() < 1e-12 {
                continue;
            }
            let angle = v_in.cross(v_out).abs().atan2(v_in.dot(v_out));
            if angle > turn_threshold {
                points.push(samples[i].pos);
            }
        }

        // stop episodes: maximal runs of slow segments
        let mut run_start: Option<usize> = None;
        for i in 0..samples.len() {
            let slow = if i + 1 < samples.len() {
                let dt = samples[i + 1].t - samples[i].t;
                let speed = samples[i].pos.distance(samples[i + 1].pos) / dt;
                speed < stop_speed
            } else {
                false
            };
            match (run_start, slow) {
                (None, true) => run_start = Some(i),
                (Some(start), false) => {
                    let duration = samples[i].t - samples[start].t;
                    if duration >= stop_min_duration {
                        let positions: Vec<Point> =
                            samples[start..=i].iter().map(|s| s.pos).collect();
                        points.push(crate::geom::centroid(&positions));
                    }
                    run_start = None;
                }
                _ => {}
            }
        }
    }
    Ok(points)
}

/// Greedy sequential clustering: points are scanned in sorted `(x, y)`
/// order and each joins the first existing cluster whose running centroid
/// is within `max_radius`, else founds a new one. Deterministic without a
/// seed and near-linear in practice.
pub fn cluster_points(points: &[Point], max_radius: f64) -> Vec<Point> {
    let mut sorted: Vec<Point> = points.to_vec();
    sorted.sort_by(Point::cmp_xy);

    struct Cluster {
        sum: Point,
        count: usize,
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    for p in sorted {
        let found = clusters.iter_mut().find(|c| {
            let center = c.sum / c.count as f64;
            center.distance(p) <= max_radius
        });
        match found {
            Some(c) => {
                c.sum = c.sum + p;
                c.count += 1;
            }
            None => clusters.push(Cluster { sum: p, count: 1 }),
        }
    }
    clusters.iter().map(|c| c.sum / c.count as f64).collect()
}

/// Builds the territory as the Voronoi diagram of `seeds` clipped to
/// `bounds`. Seeds are deduplicated within 1e-9; landmark ids follow the
/// sorted `(x, y)` order of the remaining seeds.
pub fn build_territory(seeds: &[Point], bounds: Rect) -> Result<Territory, TerritoryError> {
    if seeds.is_empty() {
        return Err(TerritoryError::DegenerateInput("no seeds".into()));
    }
    let mut sites: Vec<Point> = seeds.to_vec();
    sites.sort_by(Point::cmp_xy);
    sites.dedup_by(|a, b| a.distance(*b) <= 1e-9);
    if sites.len() == 1 && seeds.len() > 1 {
        return Err(TerritoryError::DegenerateInput("all seeds coincide".into()));
    }

    let frame = bounds.corners().to_vec();
    let landmarks = sites
        .iter()
        .enumerate()
        .map(|(i, &site)| {
            let mut cell = frame.clone();
            for (j, &other) in sites.iter().enumerate() {
                if i == j {
                    continue;
                }
                // keep the half-plane closer to `site` than to `other`
                let mid = (site + other) * 0.5;
                let toward = site - other;
                cell = clip_halfplane(&cell, |q| (q - mid).dot(toward));
            }
            Landmark {
                id: LandmarkId(i as u32),
                centroid: site,
                cell,
            }
        })
        .collect();

    Ok(Territory { bounds, landmarks })
}

impl Territory {
    /// Landmark whose seed is nearest to `p`; ties break to the lower id.
    /// Errors when `p` lies outside the map bounds.
    pub fn locate(&self, p: Point) -> Result<LandmarkId, TerritoryError> {
        if !self.bounds.contains(p) {
            return Err(TerritoryError::OutOfBounds(p.x, p.y));
        }
        Ok(self.nearest(p))
    }

    /// Nearest-seed lookup without the bounds check; total on any point.
    pub fn nearest(&self, p: Point) -> LandmarkId {
        let mut best = LandmarkId(0);
        let mut best_d = f64::INFINITY;
        for lm in &self.landmarks {
            let d = lm.centroid.distance_sq(p);
            if d < best_d {
                best_d = d;
                best = lm.id;
            }
        }
        best
    }

    pub fn position(&self, id: LandmarkId) -> Point {
        self.landmarks[id.0 as usize].centroid
    }

    /// Seed positions indexed by landmark id.
    pub fn positions(&self) -> Vec<Point> {
        self.landmarks.iter().map(|lm| lm.centroid).collect()
    }

    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }
}
