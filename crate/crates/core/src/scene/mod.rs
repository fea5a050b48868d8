//! Scene description, JSON format, goal predicate and scene generators.
//!
//! A scene holds static obstacles, the movable stick object, the disc agent
//! and a rectangular goal region. Lengths are meters, angles radians, poses
//! `[x, y, theta]`.

pub mod fixtures;
mod maze;
mod stratify;
mod world;

pub use maze::{generate_maze, MazeError, MazeParams};
pub use stratify::{stratify_by_regrasps, RegraspDepth, Strata};
pub use world::CollisionWorld;

use crate::geometry::{angle_diff, collide, Placed, Pose2, Rect, Shape, ShapeError, Vec2};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scene schema violation: {0}")]
    Schema(String),
    #[error("invalid scene: {0}")]
    Invalid(String),
}

/// Static obstacle: a shape at a fixed pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub shape: Shape,
    pub pose: Pose2,
}

/// Optional heading requirement for the goal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGoal {
    pub target: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalRegion {
    pub rect: Rect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaGoal>,
}

impl GoalRegion {
    pub fn new(rect: Rect) -> Self {
        Self { rect, theta: None }
    }

    /// Closed-region test on the object pose.
    pub fn contains(&self, pose: &Pose2) -> bool {
        self.rect.contains(pose.position())
            && self
                .theta
                .is_none_or(|t| angle_diff(pose.theta, t.target) <= t.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    shape: Shape,
    start: Pose2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    radius: f64,
    start: Vec2,
}

/// On-disk layout. Field order here fixes the key order of saved files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    version: u32,
    name: String,
    bounds: Rect,
    obstacles: Vec<Obstacle>,
    object: ObjectDoc,
    agent: AgentDoc,
    goal: GoalRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub bounds: Rect,
    pub obstacles: Vec<Obstacle>,
    pub object_shape: Shape,
    pub object_start: Pose2,
    pub agent_radius: f64,
    pub agent_start: Vec2,
    pub goal: GoalRegion,
}

/// Agent position, object pose and the grasp currently held (if any).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub agent: Vec2,
    pub object: Pose2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attached: Option<usize>,
}

impl Configuration {
    pub fn start(scene: &Scene) -> Self {
        Self {
            agent: scene.agent_start,
            object: scene.object_start,
            attached: None,
        }
    }
}

impl Scene {
    pub fn agent_shape(&self) -> Shape {
        Shape::disc(self.agent_radius)
    }

    pub fn placed_obstacles(&self) -> Vec<Placed> {
        self.obstacles.iter().map(|o| o.shape.place(&o.pose)).collect()
    }

    pub fn obstacle_pairs(&self) -> Vec<(Shape, Pose2)> {
        self.obstacles.iter().map(|o| (o.shape.clone(), o.pose)).collect()
    }

    /// Checks every scene invariant; the error names the first violation.
    pub fn validate(&self) -> Result<(), SceneError> {
        let invalid = |m: String| Err(SceneError::Invalid(m));
        if self.bounds.is_degenerate() {
            return invalid("bounds are empty".into());
        }
        if self.goal.rect.is_degenerate() {
            return invalid("goal rect has no area".into());
        }
        if !self.bounds.contains_rect(&self.goal.rect) {
            return invalid("goal outside bounds".into());
        }
        if let Some(t) = self.goal.theta {
            if !(t.tolerance >= 0.0 && t.tolerance.is_finite() && t.target.is_finite()) {
                return invalid("goal theta tolerance must be non-negative".into());
            }
        }
        if !(self.agent_radius.is_finite() && self.agent_radius > 0.0) {
            return invalid(format!("agent radius must be positive, got {}", self.agent_radius));
        }
        let shape_err = |what: &str, e: ShapeError| SceneError::Invalid(format!("{what}: {e}"));
        self.object_shape.validate().map_err(|e| shape_err("object shape", e))?;
        for (i, o) in self.obstacles.iter().enumerate() {
            o.shape.validate().map_err(|e| shape_err(&format!("obstacle {i}"), e))?;
        }
        let agent = self.agent_shape();
        let agent_pose = Pose2::from_parts(self.agent_start, 0.0);
        let object = self.object_shape.place(&self.object_start);
        if !strictly_inside(&self.bounds, &object.aabb()) {
            return invalid("object start outside bounds".into());
        }
        if !strictly_inside(&self.bounds, &agent.place(&agent_pose).aabb()) {
            return invalid("agent start outside bounds".into());
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if collide(&o.shape, &o.pose, &self.object_shape, &self.object_start) {
                return invalid(format!("object start collides with obstacle {i}"));
            }
            if collide(&o.shape, &o.pose, &agent, &agent_pose) {
                return invalid(format!("agent start collides with obstacle {i}"));
            }
        }
        if collide(&agent, &agent_pose, &self.object_shape, &self.object_start) {
            return invalid("agent start overlaps the object".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let doc: SceneDoc = serde_json::from_str(text).map_err(|e| SceneError::Schema(e.to_string()))?;
        if doc.version != SCHEMA_VERSION {
            return Err(SceneError::Schema(format!(
                "field `version`: unsupported value {}, expected {SCHEMA_VERSION}",
                doc.version
            )));
        }
        let scene = Scene {
            name: doc.name,
            bounds: doc.bounds,
            obstacles: doc.obstacles,
            object_shape: doc.object.shape,
            object_start: doc.object.start,
            agent_radius: doc.agent.radius,
            agent_start: doc.agent.start,
            goal: doc.goal,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json(&self) -> String {
        let doc = SceneDoc {
            version: SCHEMA_VERSION,
            name: self.name.clone(),
            bounds: self.bounds,
            obstacles: self.obstacles.clone(),
            object: ObjectDoc {
                shape: self.object_shape.clone(),
                start: self.object_start,
            },
            agent: AgentDoc {
                radius: self.agent_radius,
                start: self.agent_start,
            },
            goal: self.goal.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("scene serializes");
        s.push('\n');
        s
    }
}

fn strictly_inside(outer: &Rect, inner: &Rect) -> bool {
    inner.min.x > outer.min.x && inner.min.y > outer.min.y && inner.max.x < outer.max.x && inner.max.y < outer.max.y
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene, SceneError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scene::from_json(&text)
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<(), SceneError> {
    let path = path.as_ref();
    std::fs::write(path, scene.to_json()).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// True iff the object center lies in the closed goal rectangle (and the
/// heading matches when the goal constrains it).
pub fn goal_satisfied(scene: &Scene, config: &Configuration) -> bool {
    scene.goal.contains(&config.object)
}
