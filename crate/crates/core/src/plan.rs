//! Multi-modal plans: agent-only transits and object transfers joined by pick
//! and place events, plus an independent replay checker.

use crate::geometry::{Placed, Pose2, Vec2};
use crate::grasp::GraspSet;
use crate::motion::replay_steps;
use crate::scene::{goal_satisfied, CollisionWorld, Configuration, Scene};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    /// Agent moves alone; the object stays put.
    Transit { path: Vec<Vec2> },
    Pick { grasp: usize, object: Pose2 },
    /// Object poses while held; the agent follows at the anchor.
    Transfer { grasp: usize, path: Vec<Pose2> },
    Place { object: Pose2 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Plan {
    pub steps: Vec<Step>,
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    version: u32,
    steps: Vec<Step>,
    #[serde(default)]
    cost: f64,
    #[serde(default)]
    regrasps: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanViolation {
    #[error("step {step}: {message}")]
    Structure { step: usize, message: String },
    #[error("step {step}: collision at {at:?}")]
    Collision { step: usize, at: Pose2 },
    #[error("terminal object pose {0:?} is outside the goal")]
    Goal(Pose2),
}

fn path_len<T: Copy>(path: &[T], pos: impl Fn(T) -> Vec2) -> f64 {
    path.windows(2).map(|w| pos(w[0]).dist(pos(w[1]))).sum()
}

impl Plan {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn picks(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Pick { .. })).count()
    }

    pub fn regrasps(&self) -> usize {
        self.picks().saturating_sub(1)
    }

    /// Transit and Transfer segments in order.
    pub fn phases(&self) -> impl Iterator<Item = &Step> {
        self.steps.iter().filter(|s| matches!(s, Step::Transit { .. } | Step::Transfer { .. }))
    }

    /// Pick and Place events in order.
    pub fn mode_switches(&self) -> impl Iterator<Item = &Step> {
        self.steps.iter().filter(|s| matches!(s, Step::Pick { .. } | Step::Place { .. }))
    }

    /// Agent path length during transits plus object path length during
    /// transfers (meters).
    pub fn cost(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Transit { path } => path_len(path, |p| p),
                Step::Transfer { path, .. } => path_len(path, |p: Pose2| p.position()),
                _ => 0.0,
            })
            .sum()
    }

    pub fn extend(&mut self, other: Plan) {
        self.steps.extend(other.steps);
    }

    /// Configuration after executing the plan from `start`.
    pub fn end_config(&self, start: Configuration, grasps: &GraspSet) -> Configuration {
        let mut c = start;
        for s in &self.steps {
            match s {
                Step::Transit { path } => c.agent = *path.last().unwrap_or(&c.agent),
                Step::Pick { grasp, .. } => c.attached = Some(*grasp),
                Step::Transfer { grasp, path } => {
                    c.object = *path.last().unwrap_or(&c.object);
                    c.agent = grasps.anchors[*grasp].world_position(&c.object);
                }
                Step::Place { .. } => c.attached = None,
            }
        }
        c
    }

    /// Drops empty transits and fuses `Place, Pick` pairs that re-take the
    /// same grasp at the same pose into one continuous transfer.
    pub fn normalize(&mut self) {
        let mut out: Vec<Step> = Vec::with_capacity(self.steps.len());
        for s in self.steps.drain(..) {
            if let Step::Transit { path } = &s {
                if path_len(path, |p| p) < 1e-12 {
                    continue;
                }
            }
            if let Step::Transfer { grasp, path } = &s {
                let n = out.len();
                if n >= 3 {
                    if let (Step::Transfer { grasp: g0, path: p0 }, Step::Place { .. }, Step::Pick { grasp: g1, object }) =
                        (&out[n - 3], &out[n - 2], &out[n - 1])
                    {
                        if *g0 == *grasp && *g1 == *grasp && p0.last().is_some_and(|q| q.approx_eq(object, 1e-9)) {
                            let mut joined = p0.clone();
                            joined.extend(path.iter().skip(1));
                            out.truncate(n - 3);
                            out.push(Step::Transfer { grasp: *grasp, path: joined });
                            continue;
                        }
                    }
                }
            }
            out.push(s);
        }
        self.steps = out;
    }

    pub fn to_json(&self) -> String {
        let doc = PlanDoc {
            version: 1,
            steps: self.steps.clone(),
            cost: self.cost(),
            regrasps: self.regrasps(),
        };
        serde_json::to_string_pretty(&doc).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let doc: PlanDoc = serde_json::from_str(text)?;
        Ok(Self { steps: doc.steps })
    }
}

/// Replays `plan` from the scene's start configuration, checking mode
/// consistency and collisions (touching counts) every `spacing` meters of
/// displacement, and that the final object pose satisfies the goal.
pub fn validate_plan(
    plan: &Plan,
    scene: &Scene,
    world: &CollisionWorld,
    grasps: &GraspSet,
    spacing: f64,
) -> Result<(), PlanViolation> {
    const TOL: f64 = 1e-6;
    let r = scene.agent_radius;
    let shape = &scene.object_shape;
    let reach = grasps
        .anchors
        .iter()
        .map(|a| a.pose.position().norm() + r)
        .fold(shape.circumradius(), f64::max);
    let mut c = Configuration::start(scene);
    let bad = |step: usize, message: String| PlanViolation::Structure { step, message };
    for (i, s) in plan.steps.iter().enumerate() {
        match s {
            Step::Transit { path } => {
                if c.attached.is_some() {
                    return Err(bad(i, "transit while holding the object".into()));
                }
                let Some(first) = path.first() else {
                    return Err(bad(i, "empty transit".into()));
                };
                if first.dist(c.agent) > TOL {
                    return Err(bad(i, format!("transit starts at {first:?}, agent is at {:?}", c.agent)));
                }
                let object = shape.place(&c.object);
                for w in path.windows(2) {
                    let (a, b) = (Pose2::from_parts(w[0], 0.0), Pose2::from_parts(w[1], 0.0));
                    let n = replay_steps(&a, &b, 0.0, spacing);
                    for k in 0..=n {
                        let p = w[0].lerp(w[1], k as f64 / n as f64);
                        if !world.disc_free(p, r, 0.0) || object.collides(&Placed::disc(p, r)) {
                            return Err(PlanViolation::Collision { step: i, at: Pose2::from_parts(p, 0.0) });
                        }
                    }
                }
                c.agent = *path.last().unwrap();
            }
            Step::Pick { grasp, object } => {
                if c.attached.is_some() {
                    return Err(bad(i, "pick while already holding".into()));
                }
                let Some(anchor) = grasps.anchors.get(*grasp) else {
                    return Err(bad(i, format!("unknown grasp {grasp}")));
                };
                if !object.approx_eq(&c.object, TOL) {
                    return Err(bad(i, "pick pose differs from the object pose".into()));
                }
                if anchor.world_position(&c.object).dist(c.agent) > TOL {
                    return Err(bad(i, format!("agent is not at anchor {grasp}")));
                }
                c.attached = Some(*grasp);
            }
            Step::Transfer { grasp, path } => {
                if c.attached != Some(*grasp) {
                    return Err(bad(i, format!("transfer with grasp {grasp} but holding {:?}", c.attached)));
                }
                let Some(first) = path.first() else {
                    return Err(bad(i, "empty transfer".into()));
                };
                if !first.approx_eq(&c.object, TOL) {
                    return Err(bad(i, "transfer starts away from the object".into()));
                }
                let anchor = grasps.anchors[*grasp];
                let free = |p: &Pose2| {
                    world.shape_free(shape, p, 0.0) && world.disc_free(anchor.world_position(p), r, 0.0)
                };
                if !free(first) {
                    return Err(PlanViolation::Collision { step: i, at: *first });
                }
                for w in path.windows(2) {
                    let n = replay_steps(&w[0], &w[1], reach, spacing);
                    for k in 1..=n {
                        let p = w[0].lerp(&w[1], k as f64 / n as f64);
                        if !free(&p) {
                            return Err(PlanViolation::Collision { step: i, at: p });
                        }
                    }
                }
                c.object = *path.last().unwrap();
                c.agent = anchor.world_position(&c.object);
            }
            Step::Place { object } => {
                if c.attached.is_none() {
                    return Err(bad(i, "place without holding".into()));
                }
                if !object.approx_eq(&c.object, TOL) {
                    return Err(bad(i, "place pose differs from the object pose".into()));
                }
                c.attached = None;
            }
        }
    }
    if !goal_satisfied(scene, &c) {
        return Err(PlanViolation::Goal(c.object));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grasp::generate_grasps;
    use crate::scene::fixtures;

    fn setup() -> (Scene, CollisionWorld, GraspSet) {
        let scene = fixtures::open_room();
        let world = CollisionWorld::new(&scene, 0.05);
        let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, 8, 0).unwrap();
        (scene, world, grasps)
    }

    /// Straight carry with grasp 1 from the start into the goal.
    fn carry(scene: &Scene, grasps: &GraspSet) -> Plan {
        let o = scene.object_start;
        let goal = Pose2::new(7.5, 5.5, o.theta);
        let anchor = grasps.anchors[1].world_position(&o);
        Plan {
            steps: vec![
                Step::Transit { path: vec![scene.agent_start, anchor] },
                Step::Pick { grasp: 1, object: o },
                Step::Transfer { grasp: 1, path: vec![o, Pose2::new(5.0, 5.5, o.theta), goal] },
                Step::Place { object: goal },
            ],
        }
    }

    #[test]
    fn valid_carry_passes_replay() {
        let (scene, world, grasps) = setup();
        let plan = carry(&scene, &grasps);
        assert_eq!(validate_plan(&plan, &scene, &world, &grasps, 0.0125), Ok(()));
        assert_eq!(plan.regrasps(), 0);
        assert_eq!(plan.phases().count(), 2);
        assert_eq!(plan.mode_switches().count(), 2);
        let end = plan.end_config(Configuration::start(&scene), &grasps);
        assert!(end.attached.is_none() && goal_satisfied(&scene, &end));
    }

    #[test]
    fn empty_plan_needs_start_in_goal() {
        let (mut scene, world, grasps) = setup();
        assert!(matches!(validate_plan(&Plan::default(), &scene, &world, &grasps, 0.0125), Err(PlanViolation::Goal(_))));
        scene.goal.rect = crate::geometry::Rect::from_center(scene.object_start.position(), 0.5, 0.5);
        assert_eq!(validate_plan(&Plan::default(), &scene, &world, &grasps, 0.0125), Ok(()));
    }

    #[test]
    fn detects_mode_errors() {
        let (scene, world, grasps) = setup();
        let mut plan = carry(&scene, &grasps);
        plan.steps[1] = Step::Pick { grasp: 2, object: scene.object_start };
        assert!(matches!(validate_plan(&plan, &scene, &world, &grasps, 0.0125), Err(PlanViolation::Structure { step: 1, .. })));
        let mut plan = carry(&scene, &grasps);
        plan.steps.remove(1);
        assert!(matches!(validate_plan(&plan, &scene, &world, &grasps, 0.0125), Err(PlanViolation::Structure { step: 1, .. })));
    }

    #[test]
    fn detects_collisions() {
        let (scene, world, grasps) = setup();
        let mut plan = carry(&scene, &grasps);
        // Agent cuts straight through the object.
        let far = grasps.anchors[5].world_position(&scene.object_start);
        let near = grasps.anchors[1].world_position(&scene.object_start);
        plan.steps[0] = Step::Transit { path: vec![scene.agent_start, far, near] };
        assert!(matches!(validate_plan(&plan, &scene, &world, &grasps, 0.0125), Err(PlanViolation::Collision { step: 0, .. })));
        let mut plan = carry(&scene, &grasps);
        let o = scene.object_start;
        plan.steps[2] = Step::Transfer { grasp: 1, path: vec![o, Pose2::new(9.8, 5.05, 0.0)] };
        assert!(matches!(validate_plan(&plan, &scene, &world, &grasps, 0.0125), Err(PlanViolation::Collision { step: 2, .. })));
    }

    #[test]
    fn normalize_fuses_same_grasp_handover() {
        let a = Pose2::new(1.0, 1.0, 0.0);
        let b = Pose2::new(2.0, 1.0, 0.0);
        let c = Pose2::new(3.0, 1.0, 0.0);
        let mut plan = Plan {
            steps: vec![
                Step::Transit { path: vec![Vec2::new(0.0, 0.0), Vec2::new(0.5, 0.0)] },
                Step::Pick { grasp: 0, object: a },
                Step::Transfer { grasp: 0, path: vec![a, b] },
                Step::Place { object: b },
                Step::Transit { path: vec![Vec2::new(1.5, 1.0)] },
                Step::Pick { grasp: 0, object: b },
                Step::Transfer { grasp: 0, path: vec![b, c] },
                Step::Place { object: c },
            ],
        };
        plan.normalize();
        assert_eq!(plan.steps.len(), 4);
        assert_eq!(plan.steps[2], Step::Transfer { grasp: 0, path: vec![a, b, c] });
        assert_eq!(plan.regrasps(), 0);
        assert!((plan.cost() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let (scene, _, grasps) = setup();
        let plan = carry(&scene, &grasps);
        let text = plan.to_json();
        assert!(text.contains("\"type\": \"transfer\""));
        assert_eq!(Plan::from_json(&text).unwrap(), plan);
    }
}
