//! Turns the regrasp map into a concrete plan.
//!
//! A queue of reached configurations is expanded best-first by the map's
//! distance-to-goal. Each selected configuration first tries to carry the
//! object straight into the goal; failing that it steps along the map to the
//! next (area, grasp) state with one pick, transfer and place. Failed steps
//! lower the attempted edge's feasibility and the distances are recomputed,
//! which reroutes later choices.

use crate::geometry::{Pose2, Vec2};
use crate::grasp::GraspSet;
use crate::motion::{MotionConfig, MotionPlanner, Target};
use crate::plan::{Plan, Step};
use crate::rmap::{cmp_label, EdgeKind, RegraspMap};
use crate::scene::{goal_satisfied, CollisionWorld, Configuration, Scene};
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefineConfig {
    /// Maximum sub-problem attempts (goal solves plus steps).
    pub budget: usize,
    /// Adjust edge feasibility after every step (off for the fixed-map variant).
    pub update_weights: bool,
    /// Use the grasp named by the map's next state; when off only the area is
    /// prescribed and any grasp valid in both areas may carry the object.
    pub constrain_grasp: bool,
    /// Placement candidates tried per step.
    pub candidates: usize,
    pub motion: MotionConfig,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            budget: 200,
            update_weights: true,
            constrain_grasp: true,
            candidates: 5,
            motion: MotionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RefineFailure {
    /// The map has no path from the start to the goal.
    NoAbstractPath,
    QueueExhausted,
    BudgetExceeded,
}

impl fmt::Display for RefineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NoAbstractPath => "no abstract path in the regrasp map",
            Self::QueueExhausted => "queue exhausted",
            Self::BudgetExceeded => "attempt budget exceeded",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepFailure {
    /// The agent could not reach the anchor.
    Transit,
    /// No placement candidate in the target area was reachable.
    Transfer,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Attempt {
    Goal { entry: usize, solved: bool },
    Step { entry: usize, from: usize, to: usize, failure: Option<StepFailure> },
}

#[derive(Debug, Clone)]
pub struct RefineReport {
    pub result: Result<Plan, RefineFailure>,
    pub attempts: usize,
    pub log: Vec<Attempt>,
}

impl RefineReport {
    pub fn succeeded(&self) -> bool {
        self.result.is_ok()
    }
}

#[derive(Debug, Clone)]
struct Entry {
    config: Configuration,
    plan: Plan,
    area: Option<usize>,
    /// Map nodes this configuration may continue from: its area's grasp
    /// states, minus those whose anchor proved unreachable.
    nodes: Vec<usize>,
    /// Grasp that placed the object here.
    held: Option<usize>,
    /// Steps (target, next grasp) already taken from here.
    tried: Vec<(usize, Option<usize>)>,
    enabled: bool,
    alive: bool,
    goal_tried: bool,
}

pub struct Refiner<'a> {
    scene: &'a Scene,
    world: &'a CollisionWorld,
    grasps: &'a GraspSet,
    map: &'a mut RegraspMap,
    motion: MotionPlanner<'a>,
    cfg: RefineConfig,
    queue: Vec<Entry>,
    attempts: usize,
    log: Vec<Attempt>,
}

impl<'a> Refiner<'a> {
    pub fn new(scene: &'a Scene, world: &'a CollisionWorld, grasps: &'a GraspSet, map: &'a mut RegraspMap, cfg: RefineConfig) -> Self {
        let motion = MotionPlanner::new(world, grasps, map.grid.theta0, MotionConfig { n_theta: map.grid.n_theta(), ..cfg.motion });
        Self {
            scene,
            world,
            grasps,
            map,
            motion,
            cfg,
            queue: Vec::new(),
            attempts: 0,
            log: Vec::new(),
        }
    }

    fn priority(&self, e: &Entry) -> f64 {
        e.nodes.iter().map(|&n| self.map.dist(n)).fold(f64::INFINITY, f64::min)
    }

    /// Enabled entry with the smallest distance to the goal; FIFO on ties.
    pub fn select_node(&self) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (i, e) in self.queue.iter().enumerate() {
            if !e.alive || !e.enabled {
                continue;
            }
            let p = self.priority(e);
            if best.is_none_or(|(b, _)| p < b) {
                best = Some((p, i));
            }
        }
        best.map(|(_, i)| i)
    }

    /// Best pick from an entry: over its remaining grasp states, the
    /// transport edge minimizing weight plus distance, extended by
    /// `carry_run`. Steps already taken from the entry are skipped.
    /// Returns the start node, the final node and the edges covered.
    fn step(&self, e: &Entry) -> Option<(usize, usize, Vec<usize>)> {
        let mut best: Option<((f64, u32), usize, usize, Vec<usize>)> = None;
        for &n in &e.nodes {
            for &(m, edge) in self.map.neighbors(n) {
                if self.map.edges[edge].kind != EdgeKind::Transport || !self.map.dist(m).is_finite() {
                    continue;
                }
                let label = (self.map.edges[edge].weight + self.map.dist(m), self.map.table.regrasps[m]);
                if best.as_ref().is_some_and(|b| cmp_label(label, b.0).then(m.cmp(&b.2)) != Ordering::Less) {
                    continue;
                }
                let (to, chain) = self.carry_run(m, edge);
                if e.tried.contains(&(to, self.then(to))) {
                    continue;
                }
                best = Some((label, n, to, chain));
            }
        }
        best.map(|(_, n, to, chain)| (n, to, chain))
    }

    /// Grasp the map switches to after `node`, if it stays in that area.
    fn then(&self, node: usize) -> Option<usize> {
        self.map.table.next[node]
            .filter(|&n| self.map.nodes[n].area == self.map.nodes[node].area)
            .map(|n| self.map.nodes[n].grasp)
    }

    /// Tries every grasp valid at the current pose, best map state first:
    /// reach the anchor, then carry the object into the goal.
    /// `held` (the grasp that placed the object) goes first among equals.
    pub fn solve_goal_attempt(&self, config: &Configuration, area: Option<usize>, held: Option<usize>) -> Option<(Plan, Configuration)> {
        let mut order: Vec<((f64, u32), usize)> = (0..self.grasps.len())
            .filter(|&g| self.motion.compound_free_at(g, &config.object))
            .map(|g| {
                let d = area.and_then(|a| self.map.node(a, g)).map_or(f64::INFINITY, |n| self.map.dist(n));
                ((d, (held != Some(g)) as u32), g)
            })
            .collect();
        order.sort_by(|a, b| cmp_label(a.0, b.0).then(a.1.cmp(&b.1)));
        carry_to_goal(self.scene, &self.motion, config, order.into_iter().map(|(_, g)| g))
    }

    /// Neighbor of `node` minimizing edge weight plus its distance to the
    /// goal; near-ties go to fewer regrasps, then the lower node id. This is
    /// the shortest-path successor except at goal nodes.
    pub fn next(map: &RegraspMap, node: usize) -> Option<(usize, usize)> {
        if let Some(n) = map.table.next[node] {
            return Some((n, map.edge_between(node, n).expect("successor is a neighbor")));
        }
        let mut best: Option<((f64, u32), usize, usize)> = None;
        for &(n, e) in map.neighbors(node) {
            if !map.dist(n).is_finite() {
                continue;
            }
            let regrasp = (map.edges[e].kind == EdgeKind::Regrasp) as u32;
            let label = (map.edges[e].weight + map.dist(n), regrasp + map.table.regrasps[n]);
            let better = best.is_none_or(|(b, bn, _)| cmp_label(label, b).then(n.cmp(&bn)) == Ordering::Less);
            if better {
                best = Some((label, n, e));
            }
        }
        best.map(|(_, n, e)| (n, e))
    }

    /// Follows the shortest path from the step `to` (reached over `edge`)
    /// to the last state within one pick: leading regrasps choose the grasp,
    /// then transports with that grasp continue until the next regrasp.
    /// Returns the final node and the edges covered.
    fn carry_run(&self, to: usize, edge: usize) -> (usize, Vec<usize>) {
        let mut chain = vec![edge];
        let mut last = to;
        let mut moved = self.map.edges[edge].kind == EdgeKind::Transport;
        while let Some(n) = self.map.table.next[last] {
            let e = self.map.edge_between(last, n).expect("successor is a neighbor");
            let transport = self.map.edges[e].kind == EdgeKind::Transport;
            if moved && !transport {
                break;
            }
            moved |= transport;
            chain.push(e);
            last = n;
        }
        (last, chain)
    }

    /// Picks with a grasp, carries the object to a placement in the target
    /// area and puts it down. Returns the fragment, the new configuration and
    /// the node reached. `then` is the grasp the map switches to next; the
    /// placement is chosen so the agent can walk to it.
    pub fn use_grasp(
        &self,
        config: &Configuration,
        from_area: Option<usize>,
        target: usize,
        then: Option<usize>,
    ) -> Result<(Plan, Configuration, usize), StepFailure> {
        let node = self.map.nodes[target];
        let grasps: Vec<usize> = if self.cfg.constrain_grasp || from_area == Some(node.area) {
            vec![node.grasp]
        } else {
            let here = from_area.map_or(crate::grasp::Signature::EMPTY, |a| self.map.areas[a].signature);
            let there = self.map.areas[node.area].signature;
            (0..self.grasps.len()).filter(|&g| here.contains(g) && there.contains(g)).collect()
        };
        let mut failure = StepFailure::Transit;
        for g in grasps {
            let Some(reached) = self.map.node(node.area, g) else { continue };
            if !self.motion.compound_free_at(g, &config.object) {
                continue;
            }
            let anchor = self.grasps.anchors[g].world_position(&config.object);
            let Some(transit) = self.motion.transit(config.agent, anchor, &config.object) else { continue };
            failure = StepFailure::Transfer;
            if let Some(carry) = self.place_in_area(g, &config.object, node.area, then.filter(|&h| h != g)) {
                let (plan, c) = fragment(self.grasps, g, transit, carry);
                return Ok((plan, c, reached));
            }
        }
        Err(failure)
    }

    /// Whether, with the object placed at `p` by `grasp`, the agent can walk
    /// from that anchor to the anchor of `next`.
    fn can_switch(&self, grasp: usize, next: usize, p: &Pose2) -> bool {
        if !self.motion.compound_free_at(next, p) {
            return false;
        }
        let a = self.grasps.anchors[grasp].world_position(p);
        let b = self.grasps.anchors[next].world_position(p);
        self.motion.transit(a, b, p).is_some()
    }

    /// Ranks the area's placements by (feasibility of `grasp`, lattice
    /// distance) and returns the path to the first reachable of the top few.
    /// With `next` set, placements that leave its anchor reachable come first.
    fn place_in_area(&self, grasp: usize, object: &Pose2, area: usize, next: Option<usize>) -> Option<Vec<Pose2>> {
        let flood = self.motion.flood(grasp, object);
        let grid = &self.map.grid;
        let mut cands: Vec<(f64, f64, usize, Pose2)> = Vec::new();
        if self.map.locate(object) == Some(area) {
            let i = grid.containing(object).expect("located pose has a voxel");
            cands.push((grid.voxels[i].phi[grasp], 0.0, usize::MAX, *object));
        }
        for &i in &self.map.areas[area].voxels {
            let p = grid.center(i);
            let d = self.motion.flood_cost(&flood, grasp, &p).map_or(f64::INFINITY, |c| c.0);
            cands.push((grid.voxels[i].phi[grasp], d, i, p));
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)).then(a.2.wrapping_add(1).cmp(&b.2.wrapping_add(1))));
        let reachable: Vec<Vec<Pose2>> = cands
            .iter()
            .take(self.cfg.candidates)
            .filter(|c| c.1.is_finite())
            .filter_map(|c| self.motion.flood_path(&flood, grasp, &c.3))
            .collect();
        let Some(next) = next else { return reachable.into_iter().next() };
        let ok = |path: &Vec<Pose2>| self.can_switch(grasp, next, path.last().expect("paths are non-empty"));
        if let Some(i) = reachable.iter().position(ok) {
            return reachable.into_iter().nth(i);
        }
        reachable.into_iter().next()
    }

    /// Removes a regrasp whenever the grasp given up could also have carried
    /// the object along the following transfer. The agent then ends that
    /// transfer elsewhere, so the next transit is planned again.
    pub fn drop_regrasps(&self, plan: &mut Plan) {
        let mut i = 0;
        while i < plan.steps.len() {
            match self.merge_at(&plan.steps, i) {
                Some((end, steps)) => {
                    plan.steps.splice(i..end, steps);
                }
                None => i += 1,
            }
        }
    }

    /// Replacement for `steps[i..end]` when the regrasp after the transfer at
    /// `i` can be skipped.
    fn merge_at(&self, steps: &[Step], i: usize) -> Option<(usize, Vec<Step>)> {
        let Step::Transfer { grasp: g1, path: p1 } = &steps[i] else { return None };
        let mut j = i + 2;
        if matches!(steps.get(j), Some(Step::Transit { .. })) {
            j += 1;
        }
        let (Some(Step::Place { .. }), Some(Step::Pick { .. }), Some(Step::Transfer { grasp: g2, path: p2 })) =
            (steps.get(i + 1), steps.get(j), steps.get(j + 1))
        else {
            return None;
        };
        if g1 == g2 || !self.motion.path_free(*g1, p2) {
            return None;
        }
        let mut joined = p1.clone();
        joined.extend(p2.iter().skip(1));
        let last = *joined.last()?;
        let mut out = vec![Step::Transfer { grasp: *g1, path: joined }];
        let mut end = j + 2;
        // The old transfer ended with a place and (possibly) a transit away
        // from the dropped grasp's anchor.
        if let Some(Step::Place { object }) = steps.get(end) {
            out.push(Step::Place { object: *object });
            end += 1;
            if let Some(Step::Transit { path }) = steps.get(end) {
                let from = self.grasps.anchors[*g1].world_position(&last);
                let mut fresh = self.motion.transit(from, *path.last()?, &last)?;
                fresh.dedup();
                out.push(Step::Transit { path: fresh });
                end += 1;
            }
        }
        Some((end, out))
    }

    fn spend(&mut self) -> bool {
        if self.attempts >= self.cfg.budget {
            return false;
        }
        self.attempts += 1;
        true
    }

    /// Whether some entry already holds the object at this pose.
    fn queued(&self, object: &Pose2) -> bool {
        self.queue.iter().any(|e| {
            let p = &e.config.object;
            (p.x - object.x).hypot(p.y - object.y) < 1e-6 && crate::geometry::angle_diff(p.theta, object.theta).abs() < 1e-6
        })
    }

    fn push(&mut self, config: Configuration, plan: Plan, area: Option<usize>, held: Option<usize>) {
        let nodes = area.map(|a| self.map.area_nodes(a)).unwrap_or_default();
        self.queue.push(Entry {
            config,
            plan,
            area,
            nodes,
            held,
            tried: Vec::new(),
            enabled: true,
            alive: true,
            goal_tried: false,
        });
    }

    pub fn run(mut self) -> RefineReport {
        let start = Configuration::start(self.scene);
        if goal_satisfied(self.scene, &start) {
            return self.finish(Ok(Plan::default()));
        }
        if self.map.find_paths(self.scene, self.world).is_empty() {
            return self.finish(Err(RefineFailure::NoAbstractPath));
        }
        let area = self.map.locate_near(&start.object, self.world, &self.scene.object_shape);
        self.push(start, Plan::default(), area, None);
        loop {
            let Some(i) = self.select_node() else {
                return self.finish(Err(RefineFailure::QueueExhausted));
            };
            self.queue[i].enabled = false;
            if !self.queue[i].goal_tried {
                if !self.spend() {
                    return self.finish(Err(RefineFailure::BudgetExceeded));
                }
                self.queue[i].goal_tried = true;
                let e = &self.queue[i];
                let solved = self.solve_goal_attempt(&e.config, e.area, e.held);
                self.log.push(Attempt::Goal { entry: i, solved: solved.is_some() });
                if let Some((frag, _)) = solved {
                    let mut plan = self.queue[i].plan.clone();
                    plan.extend(frag);
                    plan.normalize();
                    self.drop_regrasps(&mut plan);
                    return self.finish(Ok(plan));
                }
            }
            let Some((from, to, chain)) = self.step(&self.queue[i]) else {
                self.queue[i].alive = false;
                continue;
            };
            let then = self.then(to);
            if !self.spend() {
                return self.finish(Err(RefineFailure::BudgetExceeded));
            }
            let e = self.queue[i].clone();
            let outcome = self.use_grasp(&e.config, e.area, to, then);
            // Returning the object to a queued pose is no progress.
            let progress = outcome.as_ref().is_ok_and(|(_, c, _)| !self.queued(&c.object));
            self.log.push(Attempt::Step {
                entry: i,
                from,
                to,
                failure: outcome.as_ref().err().copied(),
            });
            match outcome {
                // The grasp is out of reach at this placement.
                Err(StepFailure::Transit) if self.cfg.constrain_grasp => self.queue[i].nodes.retain(|&n| n != from),
                _ => self.queue[i].tried.push((to, then)),
            }
            if self.cfg.update_weights {
                // A transit failure is the start state's fault; a transfer
                // failure or a success concerns the whole run.
                let nodes: Vec<usize> = match &outcome {
                    Err(StepFailure::Transit) => vec![from],
                    _ => chain.iter().flat_map(|&e| [self.map.edges[e].a, self.map.edges[e].b]).collect(),
                };
                if progress {
                    self.map.reward_nodes(&nodes);
                } else {
                    self.map.penalize_nodes(&nodes);
                }
                let before = self.map.table.clone();
                self.map.recompute();
                if self.map.table != before {
                    for q in &mut self.queue {
                        q.enabled = true;
                    }
                }
            }
            if let (true, Ok((frag, config, reached))) = (progress, outcome) {
                let mut plan = e.plan;
                plan.extend(frag);
                let node = self.map.nodes[reached];
                self.push(config, plan, Some(node.area), Some(node.grasp));
            }
        }
    }

    fn finish(self, result: Result<Plan, RefineFailure>) -> RefineReport {
        RefineReport {
            result,
            attempts: self.attempts,
            log: self.log,
        }
    }
}

/// Transit to the anchor of `grasp`, pick, carry along `carry`, place.
pub(crate) fn fragment(grasps: &GraspSet, grasp: usize, transit: Vec<Vec2>, carry: Vec<Pose2>) -> (Plan, Configuration) {
    let pick = carry[0];
    let end = *carry.last().expect("carry path is never empty");
    let plan = Plan {
        steps: vec![
            Step::Transit { path: transit },
            Step::Pick { grasp, object: pick },
            Step::Transfer { grasp, path: carry },
            Step::Place { object: end },
        ],
    };
    let config = Configuration {
        agent: grasps.anchors[grasp].world_position(&end),
        object: end,
        attached: None,
    };
    (plan, config)
}

/// First grasp in `order` that can reach the object and carry it into the goal.
pub(crate) fn carry_to_goal(
    scene: &Scene,
    motion: &MotionPlanner,
    config: &Configuration,
    order: impl IntoIterator<Item = usize>,
) -> Option<(Plan, Configuration)> {
    let accept = |p: &Pose2| scene.goal.contains(p);
    for g in order {
        let anchor = motion.grasps().anchors[g].world_position(&config.object);
        let Some(transit) = motion.transit(config.agent, anchor, &config.object) else { continue };
        if let Some(carry) = motion.transfer(g, &config.object, &Target::Region { accept: &accept, bounds: scene.goal.rect }) {
            return Some(fragment(motion.grasps(), g, transit, carry));
        }
    }
    None
}

/// Refines `map` into a plan for `scene`.
pub fn refine(scene: &Scene, world: &CollisionWorld, grasps: &GraspSet, map: &mut RegraspMap, cfg: RefineConfig) -> RefineReport {
    Refiner::new(scene, world, grasps, map, cfg).run()
}
