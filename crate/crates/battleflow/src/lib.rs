//! Battle-map generation from team-based match telemetry.
//!
//! The pipeline turns recorded unit trajectories and combat events into a
//! static battle map: the map territory is subdivided into cells derived
//! from the movement data, raw tracks become semantic trajectories over
//! the resulting landmarks, similar routes are grouped into representative
//! trajectories, and per team and origin those are merged into weighted
//! directed acyclic flow graphs that render as smooth width-encoded spline
//! bands. Combat events contribute hotspot enclosures and long-distance
//! attack arrows.
//!
//! Stages are exposed as modules in pipeline order:
//!
//! * [`ingest`] — parse and validate the JSON telemetry schema
//! * [`territory`] — characteristic points, clustering, Voronoi cells
//! * [`semantics`] — semantic trajectories, grouping, representatives
//! * [`combat`] — combat-site clustering and long-range attacks
//! * [`flowgraph`] — merge representatives into weighted DAGs
//! * [`layout`] — Hermite spline bands with offsets, widths, labels
//! * [`render`] — deterministic SVG emission
//! * [`cli`] — end-to-end pipeline driver used by the binary
//!
//! With the default `parallel` feature the data-parallel inner loops
//! (per-unit semantification, per-group route clustering, per-graph
//! layout) run on rayon; disabling it yields a dependency-free
//! sequential build with identical output.

pub mod cli;
pub mod combat;
pub mod flowgraph;
pub mod geom;
pub mod ingest;
pub mod layout;
pub mod parallel;
pub mod render;
pub mod semantics;
pub mod synth;
pub mod territory;

pub use geom::{Point, Rect};
