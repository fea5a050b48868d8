//! Sampling baselines without a regrasp map.
//!
//! Both grow a forward tree of object placements. Each round draws a random
//! placement, connects the nearest tree node to it with one pick, transfer and
//! place using a randomly chosen grasp, and then tries to carry the new node's
//! object into the goal. The filtered variant only keeps placements visible
//! from the nearest node or the goal center that some grasp can hold.

use crate::geometry::{Pose2, Vec2};
use crate::grasp::{FeasibilityParams, GraspScorer, GraspSet};
use crate::motion::{MotionConfig, MotionPlanner, Target};
use crate::plan::Plan;
use crate::refine::{carry_to_goal, fragment};
use crate::scene::{goal_satisfied, CollisionWorld, Configuration, Scene};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sampler {
    /// Uniform placements (RND).
    Uniform,
    /// Uniform placements passing the visibility and grasp filters (RNDh).
    Visible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineConfig {
    /// Maximum sub-problem attempts (connections plus goal solves).
    pub budget: usize,
    pub seed: u64,
    pub sampler: Sampler,
    pub motion: MotionConfig,
    /// Grasp scoring for the filtered sampler's "some grasp holds" test.
    pub feasibility: FeasibilityParams,
    /// Draws allowed per attempt before giving up on finding a placement.
    pub draws_per_attempt: usize,
}

impl BaselineConfig {
    pub fn new(sampler: Sampler, budget: usize, seed: u64, agent_radius: f64) -> Self {
        Self {
            budget,
            seed,
            sampler,
            motion: MotionConfig::default(),
            feasibility: FeasibilityParams {
                seed,
                ..FeasibilityParams::for_agent(agent_radius)
            },
            draws_per_attempt: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Random,
    Visible,
}

/// A sampled intermediate placement and the grasp chosen to reach it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubgoalSample {
    pub pose: Pose2,
    pub grasp: Option<usize>,
    pub provenance: Provenance,
    /// Tree node the connection started from.
    pub from: usize,
    pub connected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BaselineFailure {
    BudgetExceeded,
    /// No acceptable placement turned up within the draw limit.
    NoSubgoal,
}

impl fmt::Display for BaselineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BudgetExceeded => "attempt budget exceeded",
            Self::NoSubgoal => "no acceptable subgoal found",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BaselineReport {
    pub result: Result<Plan, BaselineFailure>,
    pub attempts: usize,
    /// Accepted samples in draw order.
    pub samples: Vec<SubgoalSample>,
    pub tree_size: usize,
}

impl BaselineReport {
    pub fn succeeded(&self) -> bool {
        self.result.is_ok()
    }
}

/// Whether the straight segment from `a` to `b` keeps at least `radius` of
/// clearance, sampled at half the distance field's cell size.
pub fn segment_visible(world: &CollisionWorld, a: Vec2, b: Vec2, radius: f64) -> bool {
    let esdf = world.esdf();
    let n = (a.dist(b) / (esdf.cell() / 2.0)).ceil().max(1.0) as usize;
    (0..=n).all(|i| {
        let p = a.lerp(b, i as f64 / n as f64);
        esdf.clearance(p).is_ok_and(|c| c >= radius)
    })
}

struct Node {
    config: Configuration,
    plan: Plan,
    /// Grasp that placed the object here.
    held: Option<usize>,
}

struct Search<'a> {
    scene: &'a Scene,
    world: &'a CollisionWorld,
    grasps: &'a GraspSet,
    motion: MotionPlanner<'a>,
    scorer: GraspScorer<'a>,
    cfg: BaselineConfig,
    rng: ChaCha8Rng,
    tree: Vec<Node>,
    attempts: usize,
    draws: u64,
    samples: Vec<SubgoalSample>,
}

impl<'a> Search<'a> {
    fn spend(&mut self) -> Result<(), BaselineFailure> {
        if self.attempts >= self.cfg.budget {
            return Err(BaselineFailure::BudgetExceeded);
        }
        self.attempts += 1;
        Ok(())
    }

    fn goal_attempt(&mut self, node: usize) -> Result<Option<Plan>, BaselineFailure> {
        self.spend()?;
        let n = &self.tree[node];
        let free: Vec<usize> = (0..self.grasps.len())
            .filter(|&g| self.motion.compound_free_at(g, &n.config.object))
            .collect();
        let order = n.held.filter(|g| free.contains(g)).into_iter().chain(free.iter().copied().filter(|&g| Some(g) != n.held));
        Ok(carry_to_goal(self.scene, &self.motion, &n.config, order).map(|(frag, _)| {
            let mut plan = n.plan.clone();
            plan.extend(frag);
            plan.normalize();
            plan
        }))
    }

    fn nearest(&self, p: Vec2) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, n) in self.tree.iter().enumerate() {
            let d = n.config.object.position().dist(p);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    fn draw(&mut self) -> Pose2 {
        let b = self.world.bounds();
        let x = self.rng.gen_range(b.min.x..b.max.x);
        let y = self.rng.gen_range(b.min.y..b.max.y);
        self.draws += 1;
        Pose2::new(x, y, self.scene.object_start.theta)
    }

    /// Draws until a placement passes the sampler's filters; returns it with
    /// the tree node to connect from.
    fn sample(&mut self) -> Option<(Pose2, usize, Provenance)> {
        for _ in 0..self.cfg.draws_per_attempt {
            let pose = self.draw();
            if !self.scorer.object_free(&pose) {
                continue;
            }
            let from = self.nearest(pose.position());
            match self.cfg.sampler {
                Sampler::Uniform => return Some((pose, from, Provenance::Random)),
                Sampler::Visible => {
                    let r = self.scene.agent_radius;
                    let seen = segment_visible(self.world, pose.position(), self.tree[from].config.object.position(), r)
                        || segment_visible(self.world, pose.position(), self.scene.goal.rect.center(), r);
                    if seen && !self.scorer.signature(&pose, self.draws).1.is_empty() {
                        return Some((pose, from, Provenance::Visible));
                    }
                }
            }
        }
        None
    }

    fn run(mut self) -> BaselineReport {
        let start = Configuration::start(self.scene);
        if goal_satisfied(self.scene, &start) {
            return self.finish(Ok(Plan::default()));
        }
        self.tree.push(Node {
            config: start,
            plan: Plan::default(),
            held: None,
        });
        let result = self.grow();
        self.finish(result)
    }

    fn grow(&mut self) -> Result<Plan, BaselineFailure> {
        if let Some(plan) = self.goal_attempt(0)? {
            return Ok(plan);
        }
        loop {
            if self.attempts >= self.cfg.budget {
                return Err(BaselineFailure::BudgetExceeded);
            }
            let (pose, from, provenance) = self.sample().ok_or(BaselineFailure::NoSubgoal)?;
            let object = self.tree[from].config.object;
            let usable: Vec<usize> = (0..self.grasps.len())
                .filter(|&g| self.motion.compound_free_at(g, &object) && self.motion.compound_free_at(g, &pose))
                .collect();
            let grasp = usable.choose(&mut self.rng).copied();
            self.spend()?;
            let reached = grasp.and_then(|g| {
                let config = &self.tree[from].config;
                let anchor = self.grasps.anchors[g].world_position(&object);
                let transit = self.motion.transit(config.agent, anchor, &object)?;
                let carry = self.motion.transfer(g, &object, &Target::Pose(pose))?;
                Some(fragment(self.grasps, g, transit, carry))
            });
            self.samples.push(SubgoalSample {
                pose,
                grasp,
                provenance,
                from,
                connected: reached.is_some(),
            });
            let Some((frag, config)) = reached else { continue };
            let mut plan = self.tree[from].plan.clone();
            plan.extend(frag);
            self.tree.push(Node { config, plan, held: grasp });
            if let Some(plan) = self.goal_attempt(self.tree.len() - 1)? {
                return Ok(plan);
            }
        }
    }

    fn finish(self, result: Result<Plan, BaselineFailure>) -> BaselineReport {
        BaselineReport {
            result,
            attempts: self.attempts,
            samples: self.samples,
            tree_size: self.tree.len(),
        }
    }
}

/// Forward search over sampled placements; `cfg.sampler` picks RND or RNDh.
pub fn plan_baseline(scene: &Scene, world: &CollisionWorld, grasps: &GraspSet, cfg: BaselineConfig) -> BaselineReport {
    let motion = MotionPlanner::new(world, grasps, scene.object_start.theta, cfg.motion);
    Search {
        scene,
        world,
        grasps,
        motion,
        scorer: GraspScorer::new(world, grasps, cfg.feasibility),
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        tree: Vec::new(),
        attempts: 0,
        draws: 0,
        samples: Vec::new(),
    }
    .run()
}

pub fn plan_rnd(scene: &Scene, world: &CollisionWorld, grasps: &GraspSet, budget: usize, seed: u64) -> BaselineReport {
    plan_baseline(scene, world, grasps, BaselineConfig::new(Sampler::Uniform, budget, seed, scene.agent_radius))
}

pub fn plan_rndh(scene: &Scene, world: &CollisionWorld, grasps: &GraspSet, budget: usize, seed: u64) -> BaselineReport {
    plan_baseline(scene, world, grasps, BaselineConfig::new(Sampler::Visible, budget, seed, scene.agent_radius))
}
