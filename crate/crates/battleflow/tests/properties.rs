//! Property tests for the invariants that hold for all inputs, not just
//! the fixtures: serialization round trips, clamping, similarity metric
//! laws, episode/segment concatenation, Hermite interpolation and offset
//! stacking.

use battleflow::flowgraph::split_at_revisit;
use battleflow::geom::{Point, Rect};
use battleflow::ingest::{
    clamp_to_bounds, parse_match_log, serialize_match_log, MatchLog, Sample, Team, TeamId,
    UnitTrack,
};
use battleflow::layout::{hermite, stack_offsets, IncidentEdge, NodeFrame};
use battleflow::semantics::{
    similarity, split_episodes, RepresentativeTrajectory, SemanticTrajectory, TimeSpan, Visit,
};
use battleflow::territory::LandmarkId;
use proptest::collection::vec;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn arb_point() -> impl Strategy<Value = Point> {
    (-1.0e3..1.0e3, -1.0e3..1.0e3).prop_map(|(x, y)| Point::new(x, y))
}

fn arb_track(unit: usize, team: u32) -> impl Strategy<Value = UnitTrack> {
    vec((0.01..5.0f64, arb_point()), 1..40).prop_map(move |steps| {
        let mut t = 0.0;
        let samples = steps
            .into_iter()
            .map(|(dt, pos)| {
                t += dt;
                Sample { t, pos }
            })
            .collect();
        UnitTrack {
            unit_id: format!("t{team}u{unit}"),
            team: TeamId(team),
            samples,
        }
    })
}

fn arb_log() -> impl Strategy<Value = MatchLog> {
    let bounds = Rect::new(0.0, 0.0, 1000.0, 800.0);
    let teams = 1..3u32;
    teams
        .prop_flat_map(move |n_teams| {
            let tracks: Vec<_> = (1..=n_teams)
                .flat_map(|team| (0..3).map(move |u| arb_track(u, team)))
                .collect();
            tracks
        })
        .prop_map(move |units| {
            let team_ids: BTreeSet<TeamId> = units.iter().map(|u| u.team).collect();
            let colors = ["#d94f4f", "#4f6fd9", "#4fd98a"];
            MatchLog {
                map_name: "prop".into(),
                bounds,
                teams: team_ids
                    .iter()
                    .enumerate()
                    .map(|(i, &id)| Team {
                        id,
                        color: colors[i % colors.len()].into(),
                        base: Some(Point::new(50.0 + i as f64 * 100.0, 60.0)),
                        spawn_points: vec![Point::new(40.0 + i as f64 * 100.0, 40.0)],
                    })
                    .collect(),
                units,
                combat_events: Vec::new(),
            }
        })
}

proptest! {
    #[test]
    fn parse_serialize_identity(log in arb_log()) {
        let text = serialize_match_log(&log);
        let back = parse_match_log(text.as_bytes()).unwrap();
        prop_assert_eq!(back, log);
    }

    #[test]
    fn clamp_is_total_and_idempotent(log in arb_log()) {
        let (clamped, _count) = clamp_to_bounds(log);
        for unit in &clamped.units {
            for s in &unit.samples {
                prop_assert!(clamped.bounds.contains(s.pos));
            }
        }
        let (again, count2) = clamp_to_bounds(clamped.clone());
        prop_assert_eq!(count2, 0);
        prop_assert_eq!(again, clamped);
    }
}

fn arb_landmark_seq(max_len: usize) -> impl Strategy<Value = Vec<LandmarkId>> {
    vec(0..8u32, 1..max_len).prop_map(|raw| {
        let mut out: Vec<LandmarkId> = Vec::with_capacity(raw.len());
        for l in raw {
            let id = LandmarkId(l);
            if out.last() == Some(&id) {
                continue;
            }
            out.push(id);
        }
        out
    })
}

proptest! {
    #[test]
    fn similarity_is_a_normalized_metric(
        a in arb_landmark_seq(12),
        b in arb_landmark_seq(12),
    ) {
        let d = similarity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, similarity(&b, &a));
        prop_assert_eq!(d == 0.0, a == b);
        prop_assert_eq!(similarity(&a, &a), 0.0);
    }

    #[test]
    fn similarity_triangle_on_equal_lengths(
        raw in vec((0..6u32, 0..6u32, 0..6u32), 1..12),
    ) {
        let a: Vec<LandmarkId> = raw.iter().map(|&(x, _, _)| LandmarkId(x)).collect();
        let b: Vec<LandmarkId> = raw.iter().map(|&(_, y, _)| LandmarkId(y)).collect();
        let c: Vec<LandmarkId> = raw.iter().map(|&(_, _, z)| LandmarkId(z)).collect();
        prop_assert!(similarity(&a, &c) <= similarity(&a, &b) + similarity(&b, &c) + 1e-12);
    }
}

fn arb_semantic_trajectory() -> impl Strategy<Value = SemanticTrajectory> {
    vec((0..6u32, 0.0..80.0f64, 0.01..10.0f64), 1..20).prop_map(|raw| {
        let mut t = 0.0;
        let mut visits: Vec<Visit> = Vec::new();
        for (l, dwell, gap) in raw {
            let mut id = LandmarkId(l);
            if visits.last().map(|v| v.landmark) == Some(id) {
                id = LandmarkId((l + 1) % 6);
            }
            visits.push(Visit {
                landmark: id,
                enter_t: t,
                exit_t: t + dwell,
            });
            t += dwell + gap;
        }
        SemanticTrajectory {
            unit_id: "u".into(),
            team: TeamId(1),
            visits,
        }
    })
}

proptest! {
    #[test]
    fn episodes_concatenate_to_input(st in arb_semantic_trajectory()) {
        let episodes = split_episodes(&st, 60.0);
        prop_assert!(!episodes.is_empty());
        let mut rebuilt = episodes[0].visits.clone();
        for e in &episodes[1..] {
            prop_assert_eq!(&e.visits[0], rebuilt.last().unwrap());
            rebuilt.extend_from_slice(&e.visits[1..]);
        }
        prop_assert_eq!(rebuilt, st.visits);
    }

    #[test]
    fn revisit_segments_are_distinct_and_concatenate(seq in arb_landmark_seq(16)) {
        let rep = RepresentativeTrajectory {
            team: TeamId(1),
            landmarks: seq.clone(),
            unit_count: 2,
            time_span: TimeSpan::new(0.0, 100.0),
            member_ids: vec!["u".into()],
        };
        let segments = split_at_revisit(&rep);
        for s in &segments {
            let set: BTreeSet<&LandmarkId> = s.landmarks.iter().collect();
            prop_assert_eq!(set.len(), s.landmarks.len());
            prop_assert_eq!(s.unit_count, rep.unit_count);
        }
        let mut rebuilt = segments[0].landmarks.clone();
        for s in &segments[1..] {
            prop_assert_eq!(&s.landmarks[0], rebuilt.last().unwrap());
            rebuilt.extend_from_slice(&s.landmarks[1..]);
        }
        prop_assert_eq!(rebuilt, seq);
    }
}

proptest! {
    #[test]
    fn hermite_interpolates_endpoints(
        p0 in arb_point(), m0 in arb_point(), p1 in arb_point(), m1 in arb_point(),
    ) {
        prop_assert_eq!(hermite(p0, m0, p1, m1, 0.0), p0);
        prop_assert_eq!(hermite(p0, m0, p1, m1, 1.0), p1);
    }

    #[test]
    fn offset_stack_abuts_and_centers(
        widths in vec(0.05..6.0f64, 1..9),
        angles in vec(0.01..6.27f64, 9),
    ) {
        let frame = NodeFrame {
            landmark: LandmarkId(0),
            position: Point::ZERO,
            tangent: Point::new(1.0, 0.0),
            normal: Point::new(0.0, 1.0),
        };
        let edges: Vec<IncidentEdge> = widths
            .iter()
            .enumerate()
            .map(|(i, &w)| IncidentEdge {
                other: LandmarkId(i as u32 + 1),
                other_pos: Point::new(angles[i].cos(), angles[i].sin()) * 10.0,
                width: w,
            })
            .collect();
        let offsets = stack_offsets(&frame, &edges);
        let total: f64 = widths.iter().sum();
        let mut intervals: Vec<(f64, f64)> = offsets
            .iter()
            .zip(&edges)
            .map(|(&o, e)| (o - e.width / 2.0, o + e.width / 2.0))
            .collect();
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        prop_assert!((intervals[0].0 + total / 2.0).abs() < 1e-9);
        for w in intervals.windows(2) {
            prop_assert!((w[0].1 - w[1].0).abs() < 1e-9);
        }
        prop_assert!((intervals[intervals.len() - 1].1 - total / 2.0).abs() < 1e-9);
    }
}
