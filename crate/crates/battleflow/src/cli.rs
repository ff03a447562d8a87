//! End-to-end pipeline: ingest → territory → semantics → combat →
//! flow graphs → layout → SVG, with optional intermediate dumps.
//!
//! [`run_pipeline`] is the pure core (log in, artifacts out) used by the
//! test suites; [`run`] wraps it with file I/O, dump writing and the
//! summary printed by the binary.

use crate::combat::{cluster_combat, detect_long_range, CombatSite, LongRangeAttack};
use crate::flowgraph::{
    build_flow_graphs, split_at_revisit, trim_destination_enclosure, FlowGraph,
};
use crate::geom::Polygon;
use crate::ingest::{clamp_to_bounds, parse_match_log, IngestError, MatchLog};
use crate::layout::{layout_all, FlowLayout};
use crate::render::{build_scene, emit_svg, RenderMode, SceneInputs};
use crate::semantics::{
    cluster_all_routes, group_by_od, semantify_all, split_episodes, RepresentativeTrajectory,
    SemanticTrajectory,
};
use crate::territory::{build_territory, cluster_points, extract_characteristic_points, Territory};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Intermediate artifacts that can be dumped next to the SVG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum DumpStage {
    Territory,
    Semantics,
    Flowgraphs,
    Layout,
}

impl DumpStage {
    fn file_name(self) -> &'static str {
        match self {
            DumpStage::Territory => "territory.json",
            DumpStage::Semantics => "semantics.json",
            DumpStage::Flowgraphs => "flowgraphs.json",
            DumpStage::Layout => "layout.json",
        }
    }
}

/// All tunables of the pipeline. Defaults follow the module
/// documentation; radii and thresholds given as `None` are derived from
/// the map diagonal.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    /// Greedy clustering radius for territory seeds; default 5% of the
    /// bounds diagonal.
    pub cell_radius: Option<f64>,
    /// Heading change that marks a turn, degrees.
    pub turn_angle: f64,
    /// Speed below which a unit counts as stopped, units/s.
    pub stop_speed: f64,
    /// Minimum stop duration, seconds.
    pub stop_duration: f64,
    /// Dwell that splits a trajectory into episodes, seconds.
    pub idle_gap: f64,
    /// Route-similarity clustering threshold in [0, 1].
    pub tau: f64,
    /// Merge window for flow graphs, seconds; `None` merges everything.
    pub time_window: Option<f64>,
    /// Combat clustering radius; default 4% of the bounds diagonal.
    pub combat_eps: Option<f64>,
    /// Minimum combat events per site.
    pub min_pts: usize,
    /// Long-range attack distance; default 25% of the bounds diagonal.
    pub range_threshold: Option<f64>,
    /// Width of a band carrying the maximum troop size, world units.
    pub band_max_width: f64,
    /// Render one arrow per representative trajectory instead of flow
    /// bands.
    pub legacy_arrows: bool,
    pub dumps: BTreeSet<DumpStage>,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            out: out.into(),
            cell_radius: None,
            turn_angle: 30.0,
            stop_speed: 0.5,
            stop_duration: 5.0,
            idle_gap: 60.0,
            tau: 0.5,
            time_window: None,
            combat_eps: None,
            min_pts: 3,
            range_threshold: None,
            band_max_width: 12.0,
            legacy_arrows: false,
            dumps: BTreeSet::new(),
        }
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let positive = [
            ("--turn-angle", self.turn_angle),
            ("--stop-speed", self.stop_speed),
            ("--stop-duration", self.stop_duration),
            ("--idle-gap", self.idle_gap),
            ("--band-max-width", self.band_max_width),
        ];
        for (name, v) in positive {
            if v.is_nan() || v <= 0.0 {
                return Err(PipelineError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("--cell-radius", self.cell_radius),
            ("--combat-eps", self.combat_eps),
            ("--range-threshold", self.range_threshold),
            ("--time-window", self.time_window),
        ] {
            if let Some(v) = v {
                if v.is_nan() || v <= 0.0 {
                    return Err(PipelineError::Config(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(PipelineError::Config(format!(
                "--tau must lie in [0, 1], got {}",
                self.tau
            )));
        }
        if self.min_pts < 1 {
            return Err(PipelineError::Config("--min-pts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Territory(#[from] crate::territory::TerritoryError),
    #[error(transparent)]
    Flow(#[from] crate::flowgraph::FlowGraphError),
    #[error(transparent)]
    Layout(#[from] crate::layout::LayoutError),
    #[error(transparent)]
    Render(#[from] crate::render::RenderError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl PipelineError {
    /// 1 for schema/validation problems, 2 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. } => 2,
            _ => 1,
        }
    }
}

/// Everything the pipeline computes before rendering.
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub log: MatchLog,
    pub clamped_positions: usize,
    pub territory: Territory,
    /// Per-unit semantic trajectories (before episode splitting).
    pub trajectories: Vec<SemanticTrajectory>,
    /// Output of route clustering, before the flow-graph preprocessing.
    pub raw_representatives: Vec<RepresentativeTrajectory>,
    /// Trimmed against combat enclosures and split at revisits; the
    /// movement set both render modes draw.
    pub representatives: Vec<RepresentativeTrajectory>,
    pub sites: Vec<CombatSite>,
    pub attacks: Vec<LongRangeAttack>,
    pub graphs: Vec<FlowGraph>,
    /// Maximum edge weight across all graphs; widths normalize to it.
    pub max_troop: u32,
    pub layouts: Vec<FlowLayout>,
}

/// Runs every stage on an already-parsed log. Maps with no usable
/// movement (no unit has two samples) degrade to an empty territory and
/// no movement geometry instead of failing; combat sites still render.
pub fn run_pipeline(
    log: MatchLog,
    config: &PipelineConfig,
) -> Result<PipelineArtifacts, PipelineError> {
    config.validate()?;
    let (log, clamped_positions) = clamp_to_bounds(log);
    let diagonal = log.bounds.diagonal();
    let cell_radius = config.cell_radius.unwrap_or(diagonal * 0.05);
    let combat_eps = config.combat_eps.unwrap_or(diagonal * 0.04);
    let range_threshold = config.range_threshold.unwrap_or(diagonal * 0.25);

    let has_movement = log.units.iter().any(|u| u.samples.len() >= 2);
    if !has_movement {
        let sites = cluster_combat(&log.combat_events, combat_eps, config.min_pts);
        return Ok(PipelineArtifacts {
            clamped_positions,
            territory: Territory {
                bounds: log.bounds,
                landmarks: Vec::new(),
            },
            trajectories: Vec::new(),
            raw_representatives: Vec::new(),
            representatives: Vec::new(),
            sites,
            attacks: Vec::new(),
            graphs: Vec::new(),
            max_troop: 1,
            layouts: Vec::new(),
            log,
        });
    }

    let points = extract_characteristic_points(
        &log.units,
        config.turn_angle,
        config.stop_speed,
        config.stop_duration,
    )?;
    let seeds = cluster_points(&points, cell_radius);
    let territory = build_territory(&seeds, log.bounds)?;

    let trajectories = semantify_all(&log.units, &territory);
    let episodes: Vec<SemanticTrajectory> = trajectories
        .iter()
        .flat_map(|st| split_episodes(st, config.idle_gap))
        .collect();
    let groups = group_by_od(&episodes);
    let raw_representatives = cluster_all_routes(&groups, config.tau);

    let sites = cluster_combat(&log.combat_events, combat_eps, config.min_pts);
    let attacks = detect_long_range(&log, &territory, &sites, range_threshold);

    let enclosures: Vec<Polygon> = sites.iter().map(|s| s.outline.clone()).collect();
    let positions = territory.positions();
    let representatives: Vec<RepresentativeTrajectory> = raw_representatives
        .iter()
        .map(|rep| trim_destination_enclosure(rep, &enclosures, &positions))
        .filter(|rep| rep.landmarks.len() >= 2)
        .flat_map(|rep| split_at_revisit(&rep))
        .filter(|rep| rep.landmarks.len() >= 2)
        .collect();

    let graphs = build_flow_graphs(&representatives, config.time_window)?;
    let max_troop = graphs
        .iter()
        .flat_map(|g| g.edges.iter().map(|e| e.weight))
        .max()
        .unwrap_or(1);
    let layouts = layout_all(&graphs, &positions, config.band_max_width, max_troop)?;

    Ok(PipelineArtifacts {
        log,
        clamped_positions,
        territory,
        trajectories,
        raw_representatives,
        representatives,
        sites,
        attacks,
        graphs,
        max_troop,
        layouts,
    })
}

/// Renders the artifacts in the given mode.
pub fn render_svg(
    artifacts: &PipelineArtifacts,
    config: &PipelineConfig,
    mode: RenderMode,
) -> Result<String, PipelineError> {
    let positions = artifacts.territory.positions();
    let scene = build_scene(&SceneInputs {
        layouts: &artifacts.layouts,
        representatives: &artifacts.representatives,
        positions: &positions,
        sites: &artifacts.sites,
        attacks: &artifacts.attacks,
        teams: &artifacts.log.teams,
        bounds: artifacts.log.bounds,
        w_max: config.band_max_width,
        max_troop: artifacts.max_troop,
        mode,
    })?;
    Ok(emit_svg(&scene))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SemanticsDump {
    pub trajectories: Vec<SemanticTrajectory>,
    pub representatives: Vec<RepresentativeTrajectory>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FlowGraphsDump {
    pub graphs: Vec<FlowGraph>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LayoutDump {
    pub max_troop: u32,
    pub layouts: Vec<FlowLayout>,
}

pub fn dump_json(artifacts: &PipelineArtifacts, stage: DumpStage) -> String {
    let value = match stage {
        DumpStage::Territory => serde_json::to_string_pretty(&artifacts.territory),
        DumpStage::Semantics => serde_json::to_string_pretty(&SemanticsDump {
            trajectories: artifacts.trajectories.clone(),
            representatives: artifacts.raw_representatives.clone(),
        }),
        DumpStage::Flowgraphs => serde_json::to_string_pretty(&FlowGraphsDump {
            graphs: artifacts.graphs.clone(),
        }),
        DumpStage::Layout => serde_json::to_string_pretty(&LayoutDump {
            max_troop: artifacts.max_troop,
            layouts: artifacts.layouts.clone(),
        }),
    };
    value.expect("dump serialization cannot fail")
}

/// Result summary printed by [`run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub landmarks: usize,
    pub representatives: usize,
    pub flow_graphs: usize,
    pub combat_sites: usize,
    pub clamped_positions: usize,
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    std::fs::write(path, contents).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Executes the full pipeline: reads the input log, writes the SVG and
/// any requested dumps, prints a one-line-per-count summary to stdout and
/// warnings to stderr.
pub fn run(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    let raw = std::fs::read(&config.input).map_err(|source| PipelineError::Io {
        path: config.input.clone(),
        source,
    })?;
    let log = parse_match_log(&raw)?;
    let artifacts = run_pipeline(log, config)?;

    if artifacts.clamped_positions > 0 {
        warn(&format!(
            "clamped {} out-of-bounds position(s) onto the map bounds",
            artifacts.clamped_positions
        ));
    }

    let mode = if config.legacy_arrows {
        RenderMode::Legacy
    } else {
        RenderMode::Flow
    };
    let svg = render_svg(&artifacts, config, mode)?;
    write_file(&config.out, &svg)?;

    let dump_dir = config.out.parent().unwrap_or_else(|| Path::new("."));
    for &stage in &config.dumps {
        let path = dump_dir.join(stage.file_name());
        write_file(&path, &dump_json(&artifacts, stage))?;
    }

    let summary = RunSummary {
        landmarks: artifacts.territory.len(),
        representatives: artifacts.raw_representatives.len(),
        flow_graphs: artifacts.graphs.len(),
        combat_sites: artifacts.sites.len(),
        clamped_positions: artifacts.clamped_positions,
    };
    println!("map: {}", artifacts.log.map_name);
    println!("landmarks: {}", summary.landmarks);
    println!("representatives: {}", summary.representatives);
    println!("flow graphs: {}", summary.flow_graphs);
    println!("combat sites: {}", summary.combat_sites);
    println!("wrote {}", config.out.display());
    Ok(summary)
}

/// Parses and validates the input without running the pipeline.
pub fn validate_only(input: &Path) -> Result<MatchLog, PipelineError> {
    let raw = std::fs::read(input).map_err(|source| PipelineError::Io {
        path: input.to_path_buf(),
        source,
    })?;
    Ok(parse_match_log(&raw)?)
}

fn warn(message: &str) {
    let color =
        std::env::var_os("BATTLEFLOW_NO_COLOR").is_none() && std::io::stderr().is_terminal();
    if color {
        eprintln!("\x1b[33mwarning\x1b[0m: {message}");
    } else {
        eprintln!("warning: {message}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn pipeline_runs_on_synthetic_log() {
        let log = synth::match_log(5, &synth::SynthParams::default());
        let config = PipelineConfig::new("in.json", "out.svg");
        let artifacts = run_pipeline(log, &config).unwrap();
        assert!(artifacts.territory.len() > 1);
        assert!(!artifacts.raw_representatives.is_empty());
        assert!(!artifacts.graphs.is_empty());
        assert_eq!(artifacts.layouts.len(), artifacts.graphs.len());
        let svg = render_svg(&artifacts, &config, RenderMode::Flow).unwrap();
        assert!(svg.contains("class=\"band\""));
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let log = synth::match_log(5, &synth::SynthParams::default());
        let mut config = PipelineConfig::new("in.json", "out.svg");
        config.tau = 1.5;
        assert!(matches!(
            run_pipeline(log.clone(), &config),
            Err(PipelineError::Config(_))
        ));
        let mut config = PipelineConfig::new("in.json", "out.svg");
        config.turn_angle = -3.0;
        assert!(matches!(
            run_pipeline(log, &config),
            Err(PipelineError::Config(_))
        ));
    }

    #[test]
    fn movement_free_log_degrades_gracefully() {
        let mut log = synth::match_log(5, &synth::SynthParams::default());
        for unit in &mut log.units {
            unit.samples.truncate(1);
        }
        log.combat_events.clear();
        let config = PipelineConfig::new("in.json", "out.svg");
        let artifacts = run_pipeline(log, &config).unwrap();
        assert_eq!(artifacts.territory.len(), 0);
        assert!(artifacts.graphs.is_empty());
        let svg = render_svg(&artifacts, &config, RenderMode::Flow).unwrap();
        assert!(svg.contains("background"));
    }

    #[test]
    fn dumps_round_trip() {
        let log = synth::match_log(9, &synth::SynthParams::default());
        let config = PipelineConfig::new("in.json", "out.svg");
        let artifacts = run_pipeline(log, &config).unwrap();

        let graphs: FlowGraphsDump =
            serde_json::from_str(&dump_json(&artifacts, DumpStage::Flowgraphs)).unwrap();
        assert_eq!(graphs.graphs, artifacts.graphs);

        let territory: Territory =
            serde_json::from_str(&dump_json(&artifacts, DumpStage::Territory)).unwrap();
        assert_eq!(territory, artifacts.territory);

        let layout: LayoutDump =
            serde_json::from_str(&dump_json(&artifacts, DumpStage::Layout)).unwrap();
        assert_eq!(layout.layouts, artifacts.layouts);

        let semantics: SemanticsDump =
            serde_json::from_str(&dump_json(&artifacts, DumpStage::Semantics)).unwrap();
        assert_eq!(semantics.trajectories, artifacts.trajectories);
        assert_eq!(semantics.representatives, artifacts.raw_representatives);
    }
}
