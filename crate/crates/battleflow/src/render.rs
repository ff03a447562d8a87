//! Scene assembly and SVG output.
//!
//! The scene is a flat list of draw primitives in canvas coordinates,
//! layered back to front: background, combat-site outlines, movement
//! geometry (flow bands or legacy arrows), long-range attack arrows,
//! base/spawn icons, labels. Emission is deterministic: fixed element
//! order, fixed 6-significant-digit number formatting, ids derived from
//! stable indices — the same scene always serializes to the same bytes.

use crate::combat::{CombatSite, LongRangeAttack};
use crate::geom::{polyline_length, Point, Rect};
use crate::ingest::Team;
use crate::layout::FlowLayout;
use crate::semantics::RepresentativeTrajectory;
use crate::territory::LandmarkId;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Canvas width in pixels; height follows the padded map aspect ratio.
const CANVAS_WIDTH: f64 = 800.0;
/// Samples per band ribbon.
const BAND_SEGMENTS: usize = 32;
/// Samples per legacy-arrow ribbon.
const LEGACY_SEGMENTS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    /// Flow-graph bands (the extension).
    Flow,
    /// One arrow per representative trajectory, width growing with
    /// traveled distance (the original rendering this work improves on).
    Legacy,
}

/// World-to-canvas mapping: uniform scale, y flipped (SVG is y-down).
/// The scene builder fits it to the content bounding box, so everything
/// drawn lands inside the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldTransform {
    bounds: Rect,
    scale: f64,
    height: f64,
}

impl WorldTransform {
    /// Maps `bounds` (already padded by the caller) onto a canvas of
    /// fixed width, preserving the aspect ratio.
    pub fn new(bounds: Rect) -> Self {
        let scale = CANVAS_WIDTH / bounds.width();
        let height = bounds.height() * scale;
        WorldTransform {
            bounds,
            scale,
            height,
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            (p.x - self.bounds.min.x) * self.scale,
            self.height - (p.y - self.bounds.min.y) * self.scale,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenePath {
    pub team: crate::ingest::TeamId,
    /// Closed ribbon polygon in canvas coordinates.
    pub points: Vec<Point>,
    /// Unit count this ribbon carries.
    pub weight: u32,
    /// Origin landmark of the movement this ribbon belongs to.
    pub origin: LandmarkId,
    /// Whether the ribbon leaves the origin; per-origin unit totals sum
    /// the weights of these ribbons in both modes.
    pub from_origin: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneArrowhead {
    pub team: crate::ingest::TeamId,
    /// Triangle vertices in canvas coordinates.
    pub points: [Point; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneAttack {
    pub team: crate::ingest::TeamId,
    pub from: Point,
    pub to: Point,
    pub width: f64,
    pub count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IconKind {
    Base,
    Spawn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneIcon {
    pub team: crate::ingest::TeamId,
    pub kind: IconKind,
    pub at: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneLabel {
    pub text: String,
    pub at: Point,
}

/// Renderable battle map in canvas space.
#[derive(Debug, Clone, PartialEq)]
pub struct BattleMapScene {
    pub width: f64,
    pub height: f64,
    pub mode: RenderMode,
    pub team_colors: BTreeMap<crate::ingest::TeamId, String>,
    pub site_outlines: Vec<Vec<Point>>,
    pub bands: Vec<ScenePath>,
    pub arrowheads: Vec<SceneArrowhead>,
    pub attacks: Vec<SceneAttack>,
    pub icons: Vec<SceneIcon>,
    pub labels: Vec<SceneLabel>,
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
}

/// Everything the scene is assembled from; all pieces must come from the
/// same match log and territory.
pub struct SceneInputs<'a> {
    pub layouts: &'a [FlowLayout],
    /// Trimmed and split representatives; legacy mode draws one arrow per
    /// entry so both modes represent the same movement set.
    pub representatives: &'a [RepresentativeTrajectory],
    pub positions: &'a [Point],
    pub sites: &'a [CombatSite],
    pub attacks: &'a [LongRangeAttack],
    pub teams: &'a [Team],
    pub bounds: Rect,
    pub w_max: f64,
    pub max_troop: u32,
    pub mode: RenderMode,
}

pub fn build_scene(inputs: &SceneInputs) -> Result<BattleMapScene, RenderError> {
    let team_colors: BTreeMap<crate::ingest::TeamId, String> = inputs
        .teams
        .iter()
        .map(|t| (t.id, t.color.clone()))
        .collect();
    for layout in inputs.layouts {
        if !team_colors.contains_key(&layout.graph.team) {
            return Err(RenderError::InconsistentInput(format!(
                "flow graph references unknown team {}",
                layout.graph.team
            )));
        }
    }
    for rep in inputs.representatives {
        if !team_colors.contains_key(&rep.team) {
            return Err(RenderError::InconsistentInput(format!(
                "representative trajectory references unknown team {}",
                rep.team
            )));
        }
    }

    // Assemble in world coordinates first; band offsets, arrowheads and
    // site outlines can stick out past the map bounds.
    let mut scene = BattleMapScene {
        width: 0.0,
        height: 0.0,
        mode: inputs.mode,
        team_colors,
        site_outlines: Vec::new(),
        bands: Vec::new(),
        arrowheads: Vec::new(),
        attacks: Vec::new(),
        icons: Vec::new(),
        labels: Vec::new(),
    };

    for site in inputs.sites {
        scene.site_outlines.push(site.outline.clone());
    }

    match inputs.mode {
        RenderMode::Flow => build_flow_movement(inputs, &mut scene),
        RenderMode::Legacy => build_legacy_movement(inputs, &mut scene),
    }

    for attack in inputs.attacks {
        scene.attacks.push(SceneAttack {
            team: attack.team,
            from: attack.from,
            to: attack.to,
            width: (1.0 + 0.4 * attack.count as f64).min(5.0),
            count: attack.count,
        });
    }

    for team in inputs.teams {
        if let Some(base) = team.base {
            scene.icons.push(SceneIcon {
                team: team.id,
                kind: IconKind::Base,
                at: base,
            });
        }
        for &spawn in &team.spawn_points {
            scene.icons.push(SceneIcon {
                team: team.id,
                kind: IconKind::Spawn,
                at: spawn,
            });
        }
    }

    // Fit the canvas to everything actually drawn so the containment
    // invariant holds no matter how far geometry overhangs the map.
    // Padding is per-axis so a bare map keeps its aspect ratio exactly.
    let mut content = inputs.bounds;
    scene.for_each_point(|p| content = content.including(p));
    let transform =
        WorldTransform::new(content.inflated(content.width() * 0.01, content.height() * 0.01));
    scene.width = CANVAS_WIDTH;
    scene.height = transform.height;
    scene.for_each_point_mut(|p| *p = transform.apply(*p));

    Ok(scene)
}

impl BattleMapScene {
    fn for_each_point(&self, mut f: impl FnMut(Point)) {
        for outline in &self.site_outlines {
            outline.iter().copied().for_each(&mut f);
        }
        for band in &self.bands {
            band.points.iter().copied().for_each(&mut f);
        }
        for head in &self.arrowheads {
            head.points.iter().copied().for_each(&mut f);
        }
        for attack in &self.attacks {
            f(attack.from);
            f(attack.to);
        }
        for icon in &self.icons {
            f(icon.at);
        }
        for label in &self.labels {
            f(label.at);
        }
    }

    fn for_each_point_mut(&mut self, mut f: impl FnMut(&mut Point)) {
        for outline in &mut self.site_outlines {
            outline.iter_mut().for_each(&mut f);
        }
        for band in &mut self.bands {
            band.points.iter_mut().for_each(&mut f);
        }
        for head in &mut self.arrowheads {
            head.points.iter_mut().for_each(&mut f);
        }
        for attack in &mut self.attacks {
            f(&mut attack.from);
            f(&mut attack.to);
        }
        for icon in &mut self.icons {
            f(&mut icon.at);
        }
        for label in &mut self.labels {
            f(&mut label.at);
        }
    }
}

fn build_flow_movement(inputs: &SceneInputs, scene: &mut BattleMapScene) {
    for layout in inputs.layouts {
        let team = layout.graph.team;
        let root = layout.graph.root;
        for band in &layout.bands {
            scene.bands.push(ScenePath {
                team,
                points: band.ribbon(BAND_SEGMENTS),
                weight: band.weight,
                origin: root,
                from_origin: band.from == root,
            });
            if let Some(value) = band.label {
                scene.labels.push(SceneLabel {
                    text: value.to_string(),
                    at: band.label_anchor(),
                });
            }
        }
        // one arrowhead per termination node, pointing along its frame;
        // terminations aggregate several routes so their size can exceed
        // any single band width, capped to keep heads proportionate
        for (&node, &count) in &layout.graph.termination {
            let frame = layout.frames[&node];
            let width =
                (inputs.w_max * count as f64 / inputs.max_troop as f64).min(inputs.w_max * 1.5);
            let len = (width * 1.8).max(3.0);
            let half = (width * 0.9).max(1.5);
            scene.arrowheads.push(SceneArrowhead {
                team,
                points: [
                    frame.position + frame.tangent * len,
                    frame.position + frame.normal * half,
                    frame.position - frame.normal * half,
                ],
            });
        }
    }
}

fn build_legacy_movement(inputs: &SceneInputs, scene: &mut BattleMapScene) {
    // widths normalized against the strongest representative so the two
    // modes share the same visual anchor
    let max_count = inputs
        .representatives
        .iter()
        .map(|r| r.unit_count)
        .max()
        .unwrap_or(1);
    let max_len = inputs
        .representatives
        .iter()
        .map(|r| {
            let pts: Vec<Point> = r
                .landmarks
                .iter()
                .map(|l| inputs.positions[l.0 as usize])
                .collect();
            polyline_length(&pts)
        })
        .fold(0.0_f64, f64::max)
        .max(1e-9);

    for rep in inputs.representatives {
        if rep.landmarks.len() < 2 {
            continue;
        }
        let pts: Vec<Point> = rep
            .landmarks
            .iter()
            .map(|l| inputs.positions[l.0 as usize])
            .collect();
        let w0 = crate::layout::band_width(rep.unit_count, max_count, inputs.w_max);
        let total_len = polyline_length(&pts);
        // the width growth with traveled distance that flow bands avoid
        let width_at = |s: f64| w0 * (1.0 + 0.5 * s * total_len / max_len);
        let ribbon = legacy_ribbon(&pts, width_at);
        scene.bands.push(ScenePath {
            team: rep.team,
            points: ribbon,
            weight: rep.unit_count,
            origin: rep.landmarks[0],
            from_origin: true,
        });
        scene.labels.push(SceneLabel {
            text: rep.unit_count.to_string(),
            at: pts[0].lerp(pts[1], 0.3),
        });

        // arrowhead at the destination, along the last segment
        let dir = (pts[pts.len() - 1] - pts[pts.len() - 2]).normalized();
        let tipw = width_at(1.0);
        let end = pts[pts.len() - 1];
        scene.arrowheads.push(SceneArrowhead {
            team: rep.team,
            points: [
                end + dir * (tipw * 1.8).max(3.0),
                end + dir.rot90ccw() * (tipw * 0.9).max(1.5),
                end - dir.rot90ccw() * (tipw * 0.9).max(1.5),
            ],
        });
    }
}

/// Ribbon around a Catmull-Rom curve through `pts` with arc-parameterized
/// varying width.
fn legacy_ribbon(pts: &[Point], width_at: impl Fn(f64) -> f64) -> Vec<Point> {
    // closed-form Catmull-Rom sampling over the whole polyline
    let n = pts.len();
    let mut center = Vec::with_capacity(LEGACY_SEGMENTS + 1);
    for k in 0..=LEGACY_SEGMENTS {
        let u = k as f64 / LEGACY_SEGMENTS as f64 * (n - 1) as f64;
        let i = (u.floor() as usize).min(n - 2);
        let s = u - i as f64;
        let p0 = pts[i];
        let p1 = pts[i + 1];
        let m0 = if i == 0 {
            p1 - p0
        } else {
            (p1 - pts[i - 1]) * 0.5
        };
        let m1 = if i + 2 >= n {
            p1 - p0
        } else {
            (pts[i + 2] - p0) * 0.5
        };
        center.push(crate::layout::hermite(p0, m0, p1, m1, s));
    }
    let mut left = Vec::with_capacity(center.len());
    let mut right = Vec::with_capacity(center.len());
    let mut last_normal = (pts[n - 1] - pts[0]).normalized().rot90ccw();
    for (k, &c) in center.iter().enumerate() {
        let s = k as f64 / LEGACY_SEGMENTS as f64;
        let d = if k == 0 {
            center[1] - center[0]
        } else if k == center.len() - 1 {
            center[k] - center[k - 1]
        } else {
            center[k + 1] - center[k - 1]
        };
        let normal = if d.norm() < 1e-12 {
            last_normal
        } else {
            d.normalized().rot90ccw()
        };
        last_normal = normal;
        let half = width_at(s) / 2.0;
        left.push(c + normal * half);
        right.push(c - normal * half);
    }
    right.reverse();
    left.extend(right);
    left
}

/// Formats a coordinate with 6 significant digits, trailing zeros
/// trimmed. `-0` normalizes to `0`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 12) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn path_data(points: &[Point]) -> String {
    let mut d = String::with_capacity(points.len() * 16);
    for (i, p) in points.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{} {} ", fmt_num(p.x), fmt_num(p.y));
    }
    d.push('Z');
    d
}

/// Emits a standalone SVG 1.1 document. Byte-identical for equal scenes.
pub fn emit_svg(scene: &BattleMapScene) -> String {
    let mut svg = String::with_capacity(16 * 1024);
    let w = fmt_num(scene.width);
    let h = fmt_num(scene.height);
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );

    // defs: one 45-degree hatch pattern per team, one gradient per attack
    let _ = writeln!(svg, "<defs>");
    for (team, color) in &scene.team_colors {
        let _ = writeln!(
            svg,
            concat!(
                r#"<pattern id="hatch-t{id}" patternUnits="userSpaceOnUse" width="6" height="6" patternTransform="rotate(45)">"#,
                r#"<rect width="6" height="6" fill="{color}" fill-opacity="0.3"/>"#,
                r#"<line x1="0" y1="0" x2="0" y2="6" stroke="{color}" stroke-width="2.2"/>"#,
                r#"</pattern>"#
            ),
            id = team.0,
            color = color
        );
    }
    for (i, attack) in scene.attacks.iter().enumerate() {
        let color = &scene.team_colors[&attack.team];
        let _ = writeln!(
            svg,
            concat!(
                r#"<linearGradient id="grad-a{i}" gradientUnits="userSpaceOnUse" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}">"#,
                r#"<stop offset="0" stop-color="{color}" stop-opacity="0.85"/>"#,
                r#"<stop offset="1" stop-color="{color}" stop-opacity="0.05"/>"#,
                r#"</linearGradient>"#
            ),
            i = i,
            x1 = fmt_num(attack.from.x),
            y1 = fmt_num(attack.from.y),
            x2 = fmt_num(attack.to.x),
            y2 = fmt_num(attack.to.y),
            color = color
        );
    }
    let _ = writeln!(svg, "</defs>");

    let _ = writeln!(
        svg,
        r##"<rect class="background" width="{w}" height="{h}" fill="#23282d"/>"##
    );

    for outline in &scene.site_outlines {
        let _ = writeln!(
            svg,
            r##"<path class="site-outline" d="{}" fill="none" stroke="#ffffff" stroke-width="1.4"/>"##,
            path_data(outline)
        );
    }

    let band_class = match scene.mode {
        RenderMode::Flow => "band",
        RenderMode::Legacy => "legacy-arrow",
    };
    for band in &scene.bands {
        let color = &scene.team_colors[&band.team];
        let _ = writeln!(
            svg,
            r#"<path class="{band_class}" d="{}" fill="url(#hatch-t{})" stroke="{color}" stroke-width="0.7"/>"#,
            path_data(&band.points),
            band.team.0
        );
    }

    for head in &scene.arrowheads {
        let color = &scene.team_colors[&head.team];
        let _ = writeln!(
            svg,
            r#"<path class="arrowhead" d="{}" fill="{color}"/>"#,
            path_data(&head.points)
        );
    }

    for (i, attack) in scene.attacks.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<line class="attack" x1="{}" y1="{}" x2="{}" y2="{}" stroke="url(#grad-a{i})" stroke-width="{}" stroke-linecap="round"/>"#,
            fmt_num(attack.from.x),
            fmt_num(attack.from.y),
            fmt_num(attack.to.x),
            fmt_num(attack.to.y),
            fmt_num(attack.width),
        );
    }

    for icon in &scene.icons {
        let color = &scene.team_colors[&icon.team];
        let x = icon.at.x;
        let y = icon.at.y;
        match icon.kind {
            IconKind::Base => {
                // flag: pole plus pennant
                let _ = writeln!(
                    svg,
                    concat!(
                        r#"<g class="icon-base" stroke="{c}" fill="{c}">"#,
                        r#"<line x1="{x}" y1="{y}" x2="{x}" y2="{yt}" stroke-width="1.6"/>"#,
                        r#"<path d="M{x} {yt} L{xr} {ym} L{x} {yb} Z"/>"#,
                        r#"</g>"#
                    ),
                    c = color,
                    x = fmt_num(x),
                    y = fmt_num(y),
                    yt = fmt_num(y - 12.0),
                    xr = fmt_num(x + 9.0),
                    ym = fmt_num(y - 9.0),
                    yb = fmt_num(y - 6.0),
                );
            }
            IconKind::Spawn => {
                // circle with cross
                let _ = writeln!(
                    svg,
                    concat!(
                        r#"<g class="icon-spawn" stroke="{c}" fill="none" stroke-width="1.4">"#,
                        r#"<circle cx="{x}" cy="{y}" r="4.5"/>"#,
                        r#"<line x1="{xl}" y1="{y}" x2="{xr}" y2="{y}"/>"#,
                        r#"<line x1="{x}" y1="{yt}" x2="{x}" y2="{yb}"/>"#,
                        r#"</g>"#
                    ),
                    c = color,
                    x = fmt_num(x),
                    y = fmt_num(y),
                    xl = fmt_num(x - 4.5),
                    xr = fmt_num(x + 4.5),
                    yt = fmt_num(y - 4.5),
                    yb = fmt_num(y + 4.5),
                );
            }
        }
    }

    for label in &scene.labels {
        let _ = writeln!(
            svg,
            r##"<text class="band-label" x="{}" y="{}" font-family="sans-serif" font-size="11" fill="#ffffff" text-anchor="middle">{}</text>"##,
            fmt_num(label.at.x),
            fmt_num(label.at.y),
            label.text
        );
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraph::build_flow_graphs;
    use crate::ingest::TeamId;
    use crate::layout::{layout_all, layout_graph, place_labels};
    use crate::semantics::TimeSpan;

    fn team(id: u32, color: &str) -> Team {
        Team {
            id: TeamId(id),
            color: color.into(),
            base: Some(Point::new(10.0, 10.0)),
            spawn_points: vec![Point::new(5.0, 15.0)],
        }
    }

    fn rep(ids: &[u32], units: u32) -> RepresentativeTrajectory {
        RepresentativeTrajectory {
            team: TeamId(1),
            landmarks: ids.iter().map(|&i| LandmarkId(i)).collect(),
            unit_count: units,
            time_span: TimeSpan::new(0.0, 10.0),
            member_ids: vec!["u".into()],
        }
    }

    fn positions() -> Vec<Point> {
        vec![
            Point::new(10.0, 10.0),
            Point::new(50.0, 20.0),
            Point::new(90.0, 60.0),
        ]
    }

    fn inputs<'a>(
        layouts: &'a [FlowLayout],
        reps: &'a [RepresentativeTrajectory],
        positions: &'a [Point],
        teams: &'a [Team],
        mode: RenderMode,
    ) -> SceneInputs<'a> {
        SceneInputs {
            layouts,
            representatives: reps,
            positions,
            sites: &[],
            attacks: &[],
            teams,
            bounds: Rect::new(0.0, 0.0, 100.0, 100.0),
            w_max: 12.0,
            max_troop: 3,
            mode,
        }
    }

    #[test]
    fn empty_match_renders_background_and_icons() {
        let teams = vec![team(1, "#d94f4f")];
        let scene = build_scene(&inputs(&[], &[], &positions(), &teams, RenderMode::Flow)).unwrap();
        let svg = emit_svg(&scene);
        assert!(svg.contains("<rect class=\"background\""));
        assert!(svg.contains("icon-base"));
        assert!(svg.contains("icon-spawn"));
        assert!(!svg.contains("class=\"band\""));
        assert!(svg.starts_with("<?xml"));
    }

    #[test]
    fn path_graph_scene_counts() {
        let teams = vec![team(1, "#d94f4f")];
        let reps = vec![rep(&[0, 1, 2], 3)];
        let graphs = build_flow_graphs(&reps, None).unwrap();
        let layouts = layout_all(&graphs, &positions(), 12.0, 3).unwrap();
        let scene = build_scene(&inputs(
            &layouts,
            &reps,
            &positions(),
            &teams,
            RenderMode::Flow,
        ))
        .unwrap();
        let svg = emit_svg(&scene);
        assert_eq!(svg.matches("class=\"band\"").count(), 2);
        assert_eq!(svg.matches("class=\"arrowhead\"").count(), 1);
        assert_eq!(svg.matches("class=\"band-label\"").count(), 1);
        assert_eq!(svg.matches("url(#hatch-t1)").count(), 2);
        assert!(svg.contains(">3</text>"));
    }

    #[test]
    fn unknown_team_is_inconsistent_input() {
        let teams = vec![team(2, "#4f6fd9")]; // layout references team 1
        let reps = vec![rep(&[0, 1], 1)];
        let graphs = build_flow_graphs(&reps, None).unwrap();
        let layouts = vec![place_labels(
            layout_graph(&graphs[0], &positions(), 12.0, 1).unwrap(),
        )];
        let err = build_scene(&inputs(
            &layouts,
            &[],
            &positions(),
            &teams,
            RenderMode::Flow,
        ))
        .unwrap_err();
        assert!(matches!(err, RenderError::InconsistentInput(_)));
    }

    #[test]
    fn double_render_is_byte_identical() {
        let teams = vec![team(1, "#d94f4f")];
        let reps = vec![rep(&[0, 1, 2], 3), rep(&[0, 2], 1)];
        let graphs = build_flow_graphs(&reps, None).unwrap();
        let layouts = layout_all(&graphs, &positions(), 12.0, 4).unwrap();
        let make = || {
            let scene = build_scene(&inputs(
                &layouts,
                &reps,
                &positions(),
                &teams,
                RenderMode::Flow,
            ))
            .unwrap();
            emit_svg(&scene)
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn svg_is_well_formed_xml() {
        let teams = vec![team(1, "#d94f4f"), team(2, "#4f6fd9")];
        let reps = vec![rep(&[0, 1, 2], 2)];
        let graphs = build_flow_graphs(&reps, None).unwrap();
        let layouts = layout_all(&graphs, &positions(), 12.0, 2).unwrap();
        for mode in [RenderMode::Flow, RenderMode::Legacy] {
            let scene = build_scene(&inputs(&layouts, &reps, &positions(), &teams, mode)).unwrap();
            let svg = emit_svg(&scene);
            let doc = roxmltree::Document::parse(&svg).expect("well-formed XML");
            assert_eq!(doc.root_element().tag_name().name(), "svg");
        }
    }

    #[test]
    fn legacy_mode_draws_one_arrow_per_representative() {
        let teams = vec![team(1, "#d94f4f")];
        let reps = vec![rep(&[0, 1, 2], 3), rep(&[0, 2], 1)];
        let scene = build_scene(&inputs(
            &[],
            &reps,
            &positions(),
            &teams,
            RenderMode::Legacy,
        ))
        .unwrap();
        assert_eq!(scene.bands.len(), 2);
        assert_eq!(scene.arrowheads.len(), 2);
        let svg = emit_svg(&scene);
        assert_eq!(svg.matches("class=\"legacy-arrow\"").count(), 2);
    }

    #[test]
    fn legacy_width_grows_with_distance() {
        let teams = vec![team(1, "#d94f4f")];
        let reps = vec![rep(&[0, 1, 2], 2)];
        let scene = build_scene(&inputs(
            &[],
            &reps,
            &positions(),
            &teams,
            RenderMode::Legacy,
        ))
        .unwrap();
        let ribbon = &scene.bands[0].points;
        let n = LEGACY_SEGMENTS + 1;
        let width_at = |i: usize| ribbon[i].distance(ribbon[ribbon.len() - 1 - i]);
        assert!(
            width_at(n - 1) > width_at(0) * 1.3,
            "tip {} vs root {}",
            width_at(n - 1),
            width_at(0)
        );
    }

    #[test]
    fn all_geometry_stays_on_canvas() {
        let teams = vec![team(1, "#d94f4f"), team(2, "#4f6fd9")];
        let reps = vec![rep(&[0, 1, 2], 3), rep(&[0, 2], 1)];
        let graphs = build_flow_graphs(&reps, None).unwrap();
        let layouts = layout_all(&graphs, &positions(), 12.0, 3).unwrap();
        let sites = crate::combat::cluster_combat(
            &(0..6)
                .map(|i| crate::ingest::CombatEvent {
                    t: i as f64,
                    attacker: "a".into(),
                    target: "b".into(),
                    attacker_pos: Point::new(5.0, 5.0),
                    // hotspot hugging the map corner: its outline overhangs
                    target_pos: Point::new(94.0 + (i % 3) as f64, 97.0),
                    kind: crate::ingest::CombatKind::Hit,
                })
                .collect::<Vec<_>>(),
            8.0,
            3,
        );
        assert!(!sites.is_empty());
        let attacks = vec![crate::combat::LongRangeAttack {
            team: crate::ingest::TeamId(1),
            from: Point::new(2.0, 2.0),
            to: Point::new(98.0, 95.0),
            count: 4,
        }];
        let pos = positions();
        for mode in [RenderMode::Flow, RenderMode::Legacy] {
            let mut input = inputs(&layouts, &reps, &pos, &teams, mode);
            input.sites = &sites;
            input.attacks = &attacks;
            let scene = build_scene(&input).unwrap();
            let mut count = 0;
            scene.for_each_point(|p| {
                assert!(p.x >= 0.0 && p.x <= scene.width, "{p:?} off canvas");
                assert!(p.y >= 0.0 && p.y <= scene.height, "{p:?} off canvas");
                count += 1;
            });
            assert!(count > 100, "scene unexpectedly sparse");
        }
    }

    #[test]
    fn empty_scene_canvas_follows_map_aspect() {
        let teams = vec![team(1, "#d94f4f")];
        let mut input = inputs(&[], &[], &[], &teams, RenderMode::Flow);
        input.bounds = Rect::new(0.0, 0.0, 1000.0, 750.0);
        // icons sit inside the bounds, so the content box is the map
        let scene = build_scene(&input).unwrap();
        let svg = emit_svg(&scene);
        assert!(svg.contains(r#"viewBox="0 0 800 600""#), "{}", &svg[..200]);
    }

    #[test]
    fn single_band_scene_structure() {
        let teams = vec![team(1, "#d94f4f")];
        let reps = vec![rep(&[0, 1], 2)];
        let graphs = build_flow_graphs(&reps, None).unwrap();
        let layouts = layout_all(&graphs, &positions(), 12.0, 2).unwrap();
        let scene = build_scene(&inputs(
            &layouts,
            &reps,
            &positions(),
            &teams,
            RenderMode::Flow,
        ))
        .unwrap();
        let svg = emit_svg(&scene);
        assert_eq!(svg.matches("class=\"band\"").count(), 1);
        assert_eq!(svg.matches("url(#hatch-t1)").count(), 1);
        assert!(svg.contains("<pattern id=\"hatch-t1\""));
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let viewbox = doc.root_element().attribute("viewBox").unwrap();
        assert_eq!(
            viewbox,
            format!("0 0 {} {}", fmt_num(scene.width), fmt_num(scene.height))
        );
    }

    #[test]
    fn svg_labels_equal_band_weights() {
        let teams = vec![team(1, "#d94f4f")];
        let reps = vec![rep(&[0, 1, 2], 3), rep(&[0, 2], 1)];
        let graphs = build_flow_graphs(&reps, None).unwrap();
        let layouts = layout_all(&graphs, &positions(), 12.0, 4).unwrap();
        let scene = build_scene(&inputs(
            &layouts,
            &reps,
            &positions(),
            &teams,
            RenderMode::Flow,
        ))
        .unwrap();
        let svg = emit_svg(&scene);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let mut from_svg: Vec<u32> = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("band-label"))
            .map(|n| n.text().unwrap().parse().unwrap())
            .collect();
        from_svg.sort_unstable();
        let mut from_layout: Vec<u32> = layouts
            .iter()
            .flat_map(|l| l.bands.iter().filter_map(|b| b.label))
            .collect();
        from_layout.sort_unstable();
        assert!(!from_svg.is_empty());
        assert_eq!(from_svg, from_layout);
        // every labeled value is a real edge weight
        for v in &from_svg {
            assert!(graphs
                .iter()
                .any(|g| g.edges.iter().any(|e| e.weight == *v)));
        }
    }

    #[test]
    fn svg_numbers_are_finite() {
        let teams = vec![team(1, "#d94f4f")];
        let reps = vec![rep(&[0, 1, 2], 3)];
        let graphs = build_flow_graphs(&reps, None).unwrap();
        let layouts = layout_all(&graphs, &positions(), 12.0, 3).unwrap();
        let scene = build_scene(&inputs(
            &layouts,
            &reps,
            &positions(),
            &teams,
            RenderMode::Flow,
        ))
        .unwrap();
        let svg = emit_svg(&scene);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn fmt_num_is_compact_and_stable() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(800.0), "800");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(123.456789), "123.457");
        assert_eq!(fmt_num(-1.25), "-1.25");
        assert_eq!(fmt_num(0.000123456), "0.000123456");
        assert_eq!(fmt_num(1234567.0), "1234567");
    }
}
