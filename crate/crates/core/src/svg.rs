//! SVG rendering of scenes, grasp sets, regrasp maps and plans.
//!
//! World y points up; the SVG y axis points down, so every coordinate is
//! flipped about the drawing bounds.

use crate::geometry::{Pose2, Rect, Shape, Vec2};
use crate::grasp::GraspSet;
use crate::plan::{Plan, Step};
use crate::rmap::MapExport;
use crate::scene::Scene;
use std::fmt::Write;

const OBSTACLE: &str = "fill:#333";
const GOAL: &str = "fill:#e33;fill-opacity:0.35;stroke:#c00;stroke-width:0.02";
const OBJECT: &str = "fill:#d9a441;stroke:#7a5a1a;stroke-width:0.015";
const AGENT: &str = "fill:#3a7bd5;stroke:#1d3f6e;stroke-width:0.015";

/// Minimal SVG writer in world coordinates.
pub struct Svg {
    view: Rect,
    scale: f64,
    body: String,
}

impl Svg {
    /// `scale` is pixels per meter of the output's nominal size.
    pub fn new(view: Rect, scale: f64) -> Self {
        Self {
            view,
            scale,
            body: String::new(),
        }
    }

    fn y(&self, y: f64) -> f64 {
        self.view.max.y - y + self.view.min.y
    }

    fn pt(&self, p: Vec2) -> String {
        format!("{:.4},{:.4}", p.x, self.y(p.y))
    }

    pub fn raw(&mut self, s: &str) {
        self.body.push_str(s);
        self.body.push('\n');
    }

    pub fn rect(&mut self, r: &Rect, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}" style="{style}"/>"#,
            r.min.x,
            self.y(r.max.y),
            r.width(),
            r.height()
        );
    }

    pub fn circle(&mut self, c: Vec2, r: f64, style: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{:.4}" cy="{:.4}" r="{r:.4}" style="{style}"/>"#, c.x, self.y(c.y));
    }

    pub fn polygon(&mut self, pts: &[Vec2], style: &str) {
        let p: Vec<String> = pts.iter().map(|&v| self.pt(v)).collect();
        let _ = writeln!(self.body, r#"<polygon points="{}" style="{style}"/>"#, p.join(" "));
    }

    pub fn polyline(&mut self, pts: &[Vec2], style: &str) {
        if pts.len() < 2 {
            return;
        }
        let p: Vec<String> = pts.iter().map(|&v| self.pt(v)).collect();
        let _ = writeln!(self.body, r#"<polyline points="{}" style="fill:none;{style}"/>"#, p.join(" "));
    }

    pub fn shape(&mut self, shape: &Shape, pose: &Pose2, style: &str) {
        match shape.local_polygon() {
            Some(local) => {
                let pts: Vec<Vec2> = local.iter().map(|&v| pose.transform_point(v)).collect();
                self.polygon(&pts, style);
            }
            None => self.circle(pose.position(), shape.circumradius(), style),
        }
    }

    pub fn text(&mut self, at: Vec2, size: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.4}" y="{:.4}" font-size="{size:.3}" font-family="sans-serif">{}</text>"#,
            at.x,
            self.y(at.y),
            escape(s)
        );
    }

    pub fn finish(self) -> String {
        let (w, h) = (self.view.width(), self.view.height());
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"{:.4} {:.4} {w:.4} {h:.4}\">\n\
             <rect x=\"{:.4}\" y=\"{:.4}\" width=\"{w:.4}\" height=\"{h:.4}\" style=\"fill:#fff\"/>\n{}</svg>\n",
            w * self.scale,
            h * self.scale,
            self.view.min.x,
            self.view.min.y,
            self.view.min.x,
            self.view.min.y,
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Walls, goal, and the start configuration.
pub fn draw_scene(svg: &mut Svg, scene: &Scene, with_start: bool) {
    svg.rect(&scene.goal.rect, GOAL);
    for o in &scene.obstacles {
        svg.shape(&o.shape, &o.pose, OBSTACLE);
    }
    if with_start {
        svg.shape(&scene.object_shape, &scene.object_start, OBJECT);
        svg.circle(scene.agent_start, scene.agent_radius, AGENT);
    }
}

pub fn scene_svg(scene: &Scene) -> String {
    let mut svg = Svg::new(scene.bounds, 100.0);
    draw_scene(&mut svg, scene, true);
    svg.finish()
}

/// The object at the origin with every grasp anchor numbered.
pub fn grasps_svg(grasps: &GraspSet) -> String {
    let r = grasps.object_shape.circumradius() + 2.5 * grasps.agent_radius;
    let mut svg = Svg::new(Rect::from_center(Vec2::ZERO, r, r), 300.0);
    svg.shape(&grasps.object_shape, &Pose2::identity(), OBJECT);
    for a in &grasps.anchors {
        let p = a.pose.position();
        svg.circle(p, grasps.agent_radius, "fill:#3a7bd5;fill-opacity:0.4;stroke:#1d3f6e;stroke-width:0.005");
        svg.text(p, grasps.agent_radius * 0.8, &a.id.to_string());
    }
    svg.finish()
}

/// Distinct, stable color for an area id.
fn area_color(id: usize) -> String {
    let hue = (id as f64 * 137.508) % 360.0;
    let (s, l) = (0.65, 0.55 + (id % 3) as f64 * 0.1);
    let c = (1.0 - (2.0 * l - 1.0_f64).abs()) * s;
    let x = c * (1.0 - ((hue / 60.0) % 2.0 - 1.0).abs());
    let (r, g, b) = match (hue / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let byte = |v: f64| ((v + l - c / 2.0) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// Areas colored by id at the first orientation layer, occupied voxels black.
pub fn map_svg(map: &MapExport, scene: Option<&Scene>) -> String {
    let mut svg = Svg::new(map.bounds, 100.0);
    for iy in 0..map.ny {
        for ix in 0..map.nx {
            let min = Vec2::new(map.bounds.min.x + ix as f64 * map.voxel, map.bounds.min.y + iy as f64 * map.voxel);
            let cell = Rect::new(min, Vec2::new(min.x + map.voxel, min.y + map.voxel));
            let style = match map.voxel_area.get(iy * map.nx + ix).copied().flatten() {
                Some(a) => format!("fill:{}", area_color(a)),
                None => "fill:#000".into(),
            };
            svg.rect(&cell, &style);
        }
    }
    if let Some(scene) = scene {
        for o in &scene.obstacles {
            svg.shape(&o.shape, &o.pose, "fill:none;stroke:#fff;stroke-width:0.02");
        }
        svg.rect(&scene.goal.rect, "fill:none;stroke:#c00;stroke-width:0.04");
    }
    svg.finish()
}

/// Where the object and agent are after each step.
fn snapshots(plan: &Plan, scene: &Scene, grasps: Option<&GraspSet>) -> Vec<(Pose2, Option<Vec2>)> {
    let mut object = scene.object_start;
    let mut agent = Some(scene.agent_start);
    let mut out = Vec::with_capacity(plan.steps.len());
    for step in &plan.steps {
        match step {
            Step::Transit { path } => agent = path.last().copied().or(agent),
            Step::Pick { .. } | Step::Place { .. } => {}
            Step::Transfer { grasp, path } => {
                object = *path.last().unwrap_or(&object);
                agent = grasps.map(|g| g.anchors[*grasp].world_position(&object));
            }
        }
        out.push((object, agent));
    }
    out
}

/// Overview of the whole plan plus one animated frame per step. Each frame
/// shows the configuration at the end of its step for `frame_s` seconds;
/// static viewers only see the overview.
pub fn plan_svg(plan: &Plan, scene: &Scene, grasps: Option<&GraspSet>, frame_s: f64) -> String {
    let mut svg = Svg::new(scene.bounds, 100.0);
    draw_scene(&mut svg, scene, true);
    for step in &plan.steps {
        match step {
            Step::Transit { path } => svg.polyline(path, "stroke:#3a7bd5;stroke-width:0.03;stroke-dasharray:0.08,0.05"),
            Step::Transfer { path, .. } => {
                let pts: Vec<Vec2> = path.iter().map(Pose2::position).collect();
                svg.polyline(&pts, "stroke:#d9a441;stroke-width:0.04");
            }
            Step::Pick { object, .. } => svg.circle(object.position(), 0.05, "fill:#2a2"),
            Step::Place { object } => svg.shape(&scene.object_shape, object, "fill:none;stroke:#7a5a1a;stroke-width:0.02;stroke-dasharray:0.04,0.03"),
        }
    }
    for (i, (object, agent)) in snapshots(plan, scene, grasps).into_iter().enumerate() {
        svg.raw(&format!(
            r#"<g class="frame" id="frame-{i}" visibility="hidden"><set attributeName="visibility" to="visible" begin="{:.3}s" dur="{frame_s:.3}s"/>"#,
            i as f64 * frame_s
        ));
        svg.shape(&scene.object_shape, &object, OBJECT);
        if let Some(a) = agent {
            svg.circle(a, scene.agent_radius, AGENT);
        }
        svg.raw("</g>");
    }
    svg.finish()
}
