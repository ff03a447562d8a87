//! Match telemetry parsing and validation.
//!
//! Input is a UTF-8 JSON document, versioned with a top-level
//! `"schema": 1`:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "map": { "name": "demo", "bounds": [0, 0, 1000, 1000] },
//!   "teams": [ { "id": 1, "color": "#d94f4f", "base": [80, 80], "spawns": [[60, 95]] } ],
//!   "units": [ { "id": "u1", "team": 1, "samples": [[0, 60, 95], [1.5, 64, 98]] } ],
//!   "events": [ { "t": 41.0, "attacker": "u1", "target": "u9",
//!                 "attacker_pos": [120, 130], "target_pos": [420, 455], "kind": "hit" } ]
//! }
//! ```
//!
//! Unit samples are `[t, x, y]` triples in seconds and world units; they
//! may arrive unsorted and are re-sorted by time, but duplicate
//! timestamps within one unit are rejected. Positions outside the map
//! bounds are tolerated at parse time and projected onto the bounds by
//! [`clamp_to_bounds`] — real telemetry is noisy and rejecting it would
//! make the pipeline partial. Everything else that violates the data
//! model is an error: silent repair hides upstream logger bugs.

use crate::geom::{Point, Rect};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;
use thiserror::Error;

/// Team identifier as it appears in the telemetry.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct TeamId(pub u32);

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Team {
    pub id: TeamId,
    /// `#rrggbb` hex color used for this team's map geometry.
    pub color: String,
    pub base: Option<Point>,
    pub spawn_points: Vec<Point>,
}

/// One recorded position sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub pos: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitTrack {
    pub unit_id: String,
    pub team: TeamId,
    /// Time-ordered, strictly increasing timestamps.
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombatKind {
    Hit,
    Kill,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombatEvent {
    pub t: f64,
    pub attacker: String,
    pub target: String,
    pub attacker_pos: Point,
    pub target_pos: Point,
    pub kind: CombatKind,
}

/// Validated match telemetry; the input to every later stage.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchLog {
    pub map_name: String,
    pub bounds: Rect,
    pub teams: Vec<Team>,
    pub units: Vec<UnitTrack>,
    pub combat_events: Vec<CombatEvent>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    /// Structural problem: missing or mistyped field, bad JSON.
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    /// Well-formed document that violates a data-model invariant.
    #[error("invalid log: {subject}: {message}")]
    Validation { subject: String, message: String },
}

fn validation(subject: impl Into<String>, message: impl Into<String>) -> IngestError {
    IngestError::Validation {
        subject: subject.into(),
        message: message.into(),
    }
}

// Raw document shapes, kept separate from the internal model so the file
// format can stay stable independently of it.

#[derive(Serialize, Deserialize)]
struct RawDoc {
    schema: u32,
    map: RawMap,
    teams: Vec<RawTeam>,
    units: Vec<RawUnit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    events: Vec<RawEvent>,
}

#[derive(Serialize, Deserialize)]
struct RawMap {
    name: String,
    bounds: [f64; 4],
}

#[derive(Serialize, Deserialize)]
struct RawTeam {
    id: u32,
    color: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Point>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    spawns: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct RawUnit {
    id: String,
    team: u32,
    samples: Vec<(f64, f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawEvent {
    t: f64,
    attacker: String,
    target: String,
    attacker_pos: Point,
    target_pos: Point,
    kind: CombatKind,
}

const SCHEMA_VERSION: u32 = 1;

fn is_hex_color(s: &str) -> bool {
    s.len() == 7 && s.starts_with('#') && s.bytes().skip(1).all(|b| b.is_ascii_hexdigit())
}

/// Parses and validates a telemetry document.
///
/// Samples are sorted by time; all other invariants (unique ids, valid
/// references, strictly increasing timestamps, in-bounds team points)
/// are enforced and reported with the offending id.
pub fn parse_match_log(raw_bytes: &[u8]) -> Result<MatchLog, IngestError> {
    let text = std::str::from_utf8(raw_bytes).map_err(|e| IngestError::Schema {
        path: ".".into(),
        message: format!("input is not UTF-8: {e}"),
    })?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: RawDoc = serde_path_to_error::deserialize(de).map_err(|e| IngestError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;

    if doc.schema != SCHEMA_VERSION {
        return Err(validation(
            "schema",
            format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                doc.schema
            ),
        ));
    }

    let [xmin, ymin, xmax, ymax] = doc.map.bounds;
    let bounds = Rect::new(xmin, ymin, xmax, ymax);
    if bounds.width().is_nan()
        || bounds.height().is_nan()
        || bounds.width() <= 0.0
        || bounds.height() <= 0.0
    {
        return Err(validation(
            "map.bounds",
            format!(
                "bounds must have positive width and height, got [{xmin}, {ymin}, {xmax}, {ymax}]"
            ),
        ));
    }

    let mut teams = Vec::with_capacity(doc.teams.len());
    let mut team_ids = HashSet::new();
    for raw in doc.teams {
        let id = TeamId(raw.id);
        if !team_ids.insert(id) {
            return Err(validation(format!("team {id}"), "duplicate team id"));
        }
        if !is_hex_color(&raw.color) {
            return Err(validation(
                format!("team {id}"),
                format!("color {:?} is not #rrggbb", raw.color),
            ));
        }
        for p in raw.base.iter().chain(raw.spawns.iter()) {
            if !bounds.contains(*p) {
                return Err(validation(
                    format!("team {id}"),
                    format!("point [{}, {}] outside map bounds", p.x, p.y),
                ));
            }
        }
        teams.push(Team {
            id,
            color: raw.color,
            base: raw.base,
            spawn_points: raw.spawns,
        });
    }

    let mut units = Vec::with_capacity(doc.units.len());
    let mut unit_ids = HashSet::new();
    for raw in doc.units {
        if !unit_ids.insert(raw.id.clone()) {
            return Err(validation(format!("unit {}", raw.id), "duplicate unit id"));
        }
        let team = TeamId(raw.team);
        if !team_ids.contains(&team) {
            return Err(validation(
                format!("unit {}", raw.id),
                format!("references unknown team {team}"),
            ));
        }
        if raw.samples.is_empty() {
            return Err(validation(format!("unit {}", raw.id), "has no samples"));
        }
        let mut samples: Vec<Sample> = raw
            .samples
            .into_iter()
            .map(|(t, x, y)| Sample {
                t,
                pos: Point::new(x, y),
            })
            .collect();
        if samples.iter().any(|s| !s.t.is_finite()) {
            return Err(validation(
                format!("unit {}", raw.id),
                "non-finite sample time",
            ));
        }
        samples.sort_by(|a, b| a.t.total_cmp(&b.t));
        for w in samples.windows(2) {
            if w[0].t == w[1].t {
                return Err(validation(
                    format!("unit {}", raw.id),
                    format!("duplicate sample timestamp {}", w[0].t),
                ));
            }
        }
        units.push(UnitTrack {
            unit_id: raw.id,
            team,
            samples,
        });
    }

    let unit_team: HashMap<&str, TeamId> =
        units.iter().map(|u| (u.unit_id.as_str(), u.team)).collect();
    let mut combat_events = Vec::with_capacity(doc.events.len());
    for (i, raw) in doc.events.into_iter().enumerate() {
        let subject = format!("event {i}");
        let attacker_team = *unit_team.get(raw.attacker.as_str()).ok_or_else(|| {
            validation(
                &subject,
                format!("unknown attacker unit {:?}", raw.attacker),
            )
        })?;
        let target_team = *unit_team
            .get(raw.target.as_str())
            .ok_or_else(|| validation(&subject, format!("unknown target unit {:?}", raw.target)))?;
        if raw.attacker == raw.target {
            return Err(validation(
                &subject,
                "attacker and target are the same unit",
            ));
        }
        if attacker_team == target_team {
            return Err(validation(
                &subject,
                format!("attacker and target are both on team {attacker_team}"),
            ));
        }
        combat_events.push(CombatEvent {
            t: raw.t,
            attacker: raw.attacker,
            target: raw.target,
            attacker_pos: raw.attacker_pos,
            target_pos: raw.target_pos,
            kind: raw.kind,
        });
    }

    Ok(MatchLog {
        map_name: doc.map.name,
        bounds,
        teams,
        units,
        combat_events,
    })
}

/// Serializes a log back into the schema-1 document format.
/// `parse_match_log(serialize_match_log(log)) == log` for valid logs.
pub fn serialize_match_log(log: &MatchLog) -> String {
    let doc = RawDoc {
        schema: SCHEMA_VERSION,
        map: RawMap {
            name: log.map_name.clone(),
            bounds: [
                log.bounds.min.x,
                log.bounds.min.y,
                log.bounds.max.x,
                log.bounds.max.y,
            ],
        },
        teams: log
            .teams
            .iter()
            .map(|t| RawTeam {
                id: t.id.0,
                color: t.color.clone(),
                base: t.base,
                spawns: t.spawn_points.clone(),
            })
            .collect(),
        units: log
            .units
            .iter()
            .map(|u| RawUnit {
                id: u.unit_id.clone(),
                team: u.team.0,
                samples: u.samples.iter().map(|s| (s.t, s.pos.x, s.pos.y)).collect(),
            })
            .collect(),
        events: log
            .combat_events
            .iter()
            .map(|e| RawEvent {
                t: e.t,
                attacker: e.attacker.clone(),
                target: e.target.clone(),
                attacker_pos: e.attacker_pos,
                target_pos: e.target_pos,
                kind: e.kind,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("match log serialization cannot fail")
}

/// Projects every out-of-bounds sample and event position onto the map
/// bounds. Returns the clamped log and how many positions were moved.
pub fn clamp_to_bounds(mut log: MatchLog) -> (MatchLog, usize) {
    let bounds = log.bounds;
    let mut clamped = 0;
    for unit in &mut log.units {
        for sample in &mut unit.samples {
            let c = bounds.clamp(sample.pos);
            if c != sample.pos {
                sample.pos = c;
                clamped += 1;
            }
        }
    }
    for ev in &mut log.combat_events {
        for pos in [&mut ev.attacker_pos, &mut ev.target_pos] {
            let c = bounds.clamp(*pos);
            if c != *pos {
                *pos = c;
                clamped += 1;
            }
        }
    }
    (log, clamped)
}
