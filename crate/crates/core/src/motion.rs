//! Lattice motion planning for the agent alone (transit) and for the agent
//! rigidly holding the object (transfer).
//!
//! Lattice nodes sit every `cell` meters from the scene's lower-left corner,
//! 8-connected, with optional rotation moves between heading bins. Node and
//! edge validity is evaluated on a quarter-cell sub-grid with a clearance
//! margin of a quarter cell, which keeps every point between two checked
//! samples collision-free. Off-lattice endpoints (current poses, grasp
//! anchors) are joined to the lattice by straight segments checked at a
//! sixteenth of a cell.

use crate::geometry::{Placed, Pose2, Rect, Shape, Vec2};
use crate::grasp::GraspSet;
use crate::scene::CollisionWorld;
use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::TAU;

/// Sub-steps used when replaying a motion from `a` to `b`: displacement of
/// any point of a body of radius `radius` is at most `spacing` per step.
pub fn replay_steps(a: &Pose2, b: &Pose2, radius: f64, spacing: f64) -> usize {
    let d = a.position().dist(b.position()) + radius * crate::geometry::angle_diff(a.theta, b.theta);
    ((d / spacing) - 1e-9).ceil().max(1.0) as usize
}

const MOVES: [(i64, i64); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MotionConfig {
    /// Lattice spacing (meters).
    pub cell: f64,
    /// Heading bins available to transfers.
    pub n_theta: usize,
    /// A transfer between points `d` apart may cost at most
    /// `detour * d + slack`; longer ones count as not found. Infinite
    /// `detour` disables the bound. Transits are never bounded.
    pub detour: f64,
    pub slack: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            cell: 0.05,
            n_theta: 1,
            detour: 1.5,
            slack: 1.0,
        }
    }
}

impl MotionConfig {
    /// Unbounded search: any path the lattice holds is found.
    pub fn complete() -> Self {
        Self {
            detour: f64::INFINITY,
            ..Self::default()
        }
    }

    /// Longest acceptable path between points `d` apart.
    pub fn limit(&self, d: f64) -> f64 {
        if self.detour.is_finite() {
            self.detour * d + self.slack
        } else {
            f64::INFINITY
        }
    }
}

/// Where a transfer may end.
#[derive(Clone, Copy)]
pub enum Target<'t> {
    /// Any lattice pose accepted by the predicate; every accepted position
    /// lies inside `bounds`.
    Region { accept: &'t dyn Fn(&Pose2) -> bool, bounds: Rect },
    /// One exact pose.
    Pose(Pose2),
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

const UNKNOWN: u8 = 0;
const FREE: u8 = 1;
const BLOCKED: u8 = 2;

/// Shortest-path tree of one transfer grasp, rooted at an object pose.
pub struct Flood {
    start: Pose2,
    heads: Vec<(usize, f64, Vec<Pose2>)>,
    dist: Vec<f64>,
    parent: Vec<u32>,
    head_of: Vec<u32>,
}

impl Flood {
    pub fn start(&self) -> Pose2 {
        self.start
    }
}

pub struct MotionPlanner<'a> {
    world: &'a CollisionWorld,
    grasps: &'a GraspSet,
    cell: f64,
    margin: f64,
    cfg: MotionConfig,
    theta0: f64,
    nt: usize,
    nx: usize,
    ny: usize,
    fx: usize,
    fy: usize,
    cache: RefCell<HashMap<(usize, usize), Vec<u8>>>,
}

const AGENT_KEY: usize = usize::MAX;

impl<'a> MotionPlanner<'a> {
    /// `theta0` is heading bin 0 (normally the object's start heading).
    pub fn new(world: &'a CollisionWorld, grasps: &'a GraspSet, theta0: f64, cfg: MotionConfig) -> Self {
        let b = world.bounds();
        let nx = (b.width() / cfg.cell + 1e-9).floor() as usize + 1;
        let ny = (b.height() / cfg.cell + 1e-9).floor() as usize + 1;
        Self {
            world,
            grasps,
            cell: cfg.cell,
            margin: cfg.cell / 4.0,
            cfg,
            theta0,
            nt: cfg.n_theta.max(1),
            nx,
            ny,
            fx: 4 * (nx - 1) + 1,
            fy: 4 * (ny - 1) + 1,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn config(&self) -> &MotionConfig {
        &self.cfg
    }

    pub fn world(&self) -> &CollisionWorld {
        self.world
    }

    pub fn grasps(&self) -> &GraspSet {
        self.grasps
    }

    fn agent_radius(&self) -> f64 {
        self.grasps.agent_radius
    }

    fn shape(&self) -> &Shape {
        &self.grasps.object_shape
    }

    /// Radius of the held compound about the object center.
    pub fn compound_radius(&self) -> f64 {
        let reach = self
            .grasps
            .anchors
            .iter()
            .map(|a| a.pose.position().norm())
            .fold(0.0, f64::max);
        self.shape().circumradius().max(reach + self.agent_radius())
    }

    fn theta_of(&self, t: usize) -> f64 {
        crate::geometry::normalize_angle(self.theta0 + t as f64 * TAU / self.nt as f64)
    }

    /// Heading bin of `theta` if it lies on the lattice.
    pub fn heading_bin(&self, theta: f64) -> Option<usize> {
        let step = TAU / self.nt as f64;
        let rel = (theta - self.theta0).rem_euclid(TAU);
        let t = (rel / step).round() as usize % self.nt;
        (crate::geometry::angle_diff(self.theta_of(t), theta) < 1e-9).then_some(t)
    }

    fn node(&self, i: usize, j: usize, t: usize) -> usize {
        (t * self.ny + j) * self.nx + i
    }

    fn coords(&self, n: usize) -> (usize, usize, usize) {
        (n % self.nx, (n / self.nx) % self.ny, n / (self.nx * self.ny))
    }

    fn node_point(&self, i: usize, j: usize) -> Vec2 {
        let o = self.world.bounds().min;
        Vec2::new(o.x + i as f64 * self.cell, o.y + j as f64 * self.cell)
    }

    fn fine_point(&self, a: usize, b: usize) -> Vec2 {
        let o = self.world.bounds().min;
        let q = self.cell / 4.0;
        Vec2::new(o.x + a as f64 * q, o.y + b as f64 * q)
    }

    pub fn node_pose(&self, n: usize) -> Pose2 {
        let (i, j, t) = self.coords(n);
        Pose2::from_parts(self.node_point(i, j), self.theta_of(t))
    }

    /// Lattice node exactly at `pose`, if any.
    pub fn node_at(&self, pose: &Pose2) -> Option<usize> {
        let o = self.world.bounds().min;
        let fi = (pose.x - o.x) / self.cell;
        let fj = (pose.y - o.y) / self.cell;
        let (i, j) = (fi.round(), fj.round());
        if (fi - i).abs() > 1e-6 || (fj - j).abs() > 1e-6 || i < 0.0 || j < 0.0 {
            return None;
        }
        let (i, j) = (i as usize, j as usize);
        if i >= self.nx || j >= self.ny {
            return None;
        }
        Some(self.node(i, j, self.heading_bin(pose.theta)?))
    }

    fn compound_free(&self, grasp: usize, pose: &Pose2, margin: f64) -> bool {
        let agent = self.grasps.anchors[grasp].world_position(pose);
        self.world.disc_free(agent, self.agent_radius(), margin) && self.world.shape_free(self.shape(), pose, margin)
    }

    fn fine_free(&self, key: (usize, usize), a: usize, b: usize) -> bool {
        let mut cache = self.cache.borrow_mut();
        let grid = cache.entry(key).or_insert_with(|| vec![UNKNOWN; self.fx * self.fy]);
        let idx = b * self.fx + a;
        if grid[idx] == UNKNOWN {
            let p = self.fine_point(a, b);
            let free = if key.0 == AGENT_KEY {
                self.world.disc_free(p, self.agent_radius(), self.margin)
            } else {
                self.compound_free(key.0, &Pose2::from_parts(p, self.theta_of(key.1)), self.margin)
            };
            grid[idx] = if free { FREE } else { BLOCKED };
        }
        grid[idx] == FREE
    }

    fn agent_fine_free(&self, a: usize, b: usize, object: &Placed) -> bool {
        self.fine_free((AGENT_KEY, 0), a, b)
            && object.clear_by(&Placed::disc(self.fine_point(a, b), self.agent_radius()), self.margin)
    }

    fn node_valid(&self, n: usize, grasp: Option<usize>, object: Option<&Placed>) -> bool {
        let (i, j, t) = self.coords(n);
        match grasp {
            None => self.agent_fine_free(4 * i, 4 * j, object.expect("transit needs the object")),
            Some(g) => self.fine_free((g, t), 4 * i, 4 * j),
        }
    }

    /// Valid neighbors of `n` with move costs.
    fn successors(&self, n: usize, grasp: Option<usize>, object: Option<&Placed>, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let (i, j, t) = self.coords(n);
        for &(di, dj) in &MOVES {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni as usize >= self.nx || nj as usize >= self.ny {
                continue;
            }
            let ok = (1..=4).all(|k| {
                let a = (4 * i as i64 + k * di) as usize;
                let b = (4 * j as i64 + k * dj) as usize;
                match grasp {
                    None => self.agent_fine_free(a, b, object.expect("transit needs the object")),
                    Some(g) => self.fine_free((g, t), a, b),
                }
            });
            if ok {
                let len = if di != 0 && dj != 0 { self.cell * std::f64::consts::SQRT_2 } else { self.cell };
                out.push((self.node(ni as usize, nj as usize, t), len));
            }
        }
        if let (Some(g), true) = (grasp, self.nt > 1) {
            for nt in [(t + 1) % self.nt, (t + self.nt - 1) % self.nt] {
                if nt == t {
                    continue;
                }
                let m = self.node(i, j, nt);
                if self.fine_free((g, nt), 4 * i, 4 * j) && self.rotation_free(g, i, j, t, nt) {
                    out.push((m, self.compound_radius() * TAU / self.nt as f64));
                }
            }
        }
    }

    fn rotation_free(&self, g: usize, i: usize, j: usize, t: usize, nt: usize) -> bool {
        let a = Pose2::from_parts(self.node_point(i, j), self.theta_of(t));
        let b = Pose2::from_parts(self.node_point(i, j), self.theta_of(nt));
        let steps = replay_steps(&a, &b, self.compound_radius(), self.cell / 8.0);
        (1..steps).all(|s| self.compound_free(g, &a.lerp(&b, s as f64 / steps as f64), self.margin))
    }

    /// Straight segment check, fine enough that the replay samples of the
    /// segment are a subset of the checked poses.
    fn segment_free(&self, a: &Pose2, b: &Pose2, grasp: Option<usize>, object: Option<&Placed>) -> bool {
        let radius = if grasp.is_some() { self.compound_radius() } else { 0.0 };
        let n = 4 * replay_steps(a, b, radius, self.cell / 4.0);
        (0..=n).all(|s| {
            let p = a.lerp(b, s as f64 / n as f64);
            match grasp {
                None => {
                    let disc = Placed::disc(p.position(), self.agent_radius());
                    self.world.disc_free(p.position(), self.agent_radius(), 0.0)
                        && !object.expect("transit needs the object").collides(&disc)
                }
                Some(g) => self.compound_free(g, &p, 0.0),
            }
        })
    }

    /// Whether the object held by `grasp` can follow `path` (straight
    /// segments, touching counts as a collision).
    pub fn path_free(&self, grasp: usize, path: &[Pose2]) -> bool {
        path.first().is_some_and(|p| self.compound_free(grasp, p, 0.0))
            && path.windows(2).all(|w| self.segment_free(&w[0], &w[1], Some(grasp), None))
    }

    /// Lattice nodes reachable from `p` by a checked straight segment, with
    /// the segment length, nearest first.
    fn attach(&self, p: &Pose2, grasp: Option<usize>, object: Option<&Placed>) -> Vec<(usize, f64)> {
        if let Some(n) = self.node_at(p) {
            if self.node_valid(n, grasp, object) {
                return vec![(n, 0.0)];
            }
        }
        let o = self.world.bounds().min;
        let ci = ((p.x - o.x) / self.cell).floor() as i64;
        let cj = ((p.y - o.y) / self.cell).floor() as i64;
        let t = match grasp {
            Some(_) => match self.heading_bin(p.theta) {
                Some(t) => t,
                None => return Vec::new(),
            },
            None => 0,
        };
        let mut cands = Vec::new();
        for dj in -2..=3 {
            for di in -2..=3 {
                let (i, j) = (ci + di, cj + dj);
                if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
                    continue;
                }
                let n = self.node(i as usize, j as usize, t);
                cands.push((self.node_point(i as usize, j as usize).dist(p.position()), n));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut out = Vec::new();
        for (d, n) in cands {
            if out.len() >= 4 {
                break;
            }
            let q = self.node_pose(n);
            let q = if grasp.is_some() { q } else { Pose2::from_parts(q.position(), 0.0) };
            let from = if grasp.is_some() { *p } else { Pose2::from_parts(p.position(), 0.0) };
            if self.node_valid(n, grasp, object) && self.segment_free(&from, &q, grasp, object) {
                out.push((n, d));
            }
        }
        out
    }

    /// Dijkstra over the lattice; stops at the first settled node accepted by
    /// `goal` (whose value is an extra cost to reach the true endpoint) or runs
    /// to exhaustion when `goal` never accepts. Nodes whose cost plus
    /// heuristic exceeds `limit` are never expanded.
    fn search(
        &self,
        sources: &[(usize, f64)],
        grasp: Option<usize>,
        object: Option<&Placed>,
        goal: &dyn Fn(usize) -> Option<f64>,
        heuristic: &dyn Fn(usize) -> f64,
        limit: f64,
    ) -> (Vec<f64>, Vec<u32>, Option<usize>) {
        let total = self.nx * self.ny * self.nt;
        let mut dist = vec![f64::INFINITY; total];
        let mut parent = vec![u32::MAX; total];
        let mut done = vec![false; total];
        let mut heap = BinaryHeap::new();
        for &(n, c) in sources {
            if c < dist[n] {
                dist[n] = c;
                heap.push(Item(c + heuristic(n), n));
            }
        }
        let mut best: Option<(f64, usize)> = None;
        let mut succ = Vec::with_capacity(10);
        while let Some(Item(f, n)) = heap.pop() {
            if done[n] {
                continue;
            }
            if f > limit {
                break;
            }
            if let Some((b, _)) = best {
                if f >= b {
                    break;
                }
            }
            done[n] = true;
            if let Some(extra) = goal(n) {
                let c = dist[n] + extra;
                if c <= limit && best.is_none_or(|(b, _)| c < b) {
                    best = Some((c, n));
                }
            }
            self.successors(n, grasp, object, &mut succ);
            for &(m, w) in &succ {
                let nd = dist[n] + w;
                if nd < dist[m] {
                    dist[m] = nd;
                    parent[m] = n as u32;
                    heap.push(Item(nd + heuristic(m), m));
                }
            }
        }
        (dist, parent, best.map(|(_, n)| n))
    }

    fn trace(&self, parent: &[u32], mut n: usize) -> Vec<usize> {
        let mut out = vec![n];
        while parent[n] != u32::MAX {
            n = parent[n] as usize;
            out.push(n);
        }
        out.reverse();
        out
    }

    /// Short exit from contact: `p`, then (when `p` is near the object) a
    /// point backed away along the contact normal.
    fn backoff(&self, p: Vec2, object: &Placed) -> Vec<Vec<Vec2>> {
        let r = self.agent_radius();
        let gap = object.signed_distance(p) - r;
        if gap > 2.0 * self.margin {
            return vec![vec![p]];
        }
        let normal = (p - object.closest_boundary_point(p)).normalized();
        let mut out = Vec::new();
        for d in [2.0 * self.cell, self.cell, self.cell / 2.0] {
            let q = p + normal * d;
            let a = Pose2::from_parts(p, 0.0);
            let b = Pose2::from_parts(q, 0.0);
            if self.segment_free(&a, &b, None, Some(object)) {
                out.push(vec![p, q]);
            }
        }
        out.push(vec![p]);
        out
    }

    /// Agent path from `from` to `to` around the stationary object.
    pub fn transit(&self, from: Vec2, to: Vec2, object_pose: &Pose2) -> Option<Vec<Vec2>> {
        let object = self.shape().place(object_pose);
        let at = |p: Vec2| Pose2::from_parts(p, 0.0);
        if from.dist(to) < 1e-12 {
            return Some(vec![from]);
        }
        if self.segment_free(&at(from), &at(to), None, Some(&object)) {
            return Some(vec![from, to]);
        }
        let heads = self.backoff(from, &object);
        let tails = self.backoff(to, &object);
        // Straight moves between the backed-off points avoid the lattice.
        for h in &heads {
            for t in &tails {
                let (a, b) = (*h.last().unwrap(), *t.last().unwrap());
                if self.segment_free(&at(a), &at(b), None, Some(&object)) {
                    let mut path = h.clone();
                    path.extend(t.iter().rev());
                    return Some(dedup(path));
                }
            }
        }
        let mut sources = Vec::new();
        let mut source_head = HashMap::new();
        for (hi, h) in heads.iter().enumerate() {
            let tip = *h.last().unwrap();
            for (n, d) in self.attach(&at(tip), None, Some(&object)) {
                let len: f64 = h.windows(2).map(|w| w[0].dist(w[1])).sum::<f64>() + d;
                if !source_head.contains_key(&n) {
                    source_head.insert(n, hi);
                    sources.push((n, len));
                }
            }
        }
        let mut sinks: HashMap<usize, (f64, usize)> = HashMap::new();
        for (ti, t) in tails.iter().enumerate() {
            let tip = *t.last().unwrap();
            for (n, d) in self.attach(&at(tip), None, Some(&object)) {
                let len: f64 = t.windows(2).map(|w| w[0].dist(w[1])).sum::<f64>() + d;
                if sinks.get(&n).is_none_or(|&(l, _)| len < l) {
                    sinks.insert(n, (len, ti));
                }
            }
        }
        if sources.is_empty() || sinks.is_empty() {
            return None;
        }
        let goal = |n: usize| sinks.get(&n).map(|&(l, _)| l);
        let heuristic = |n: usize| self.node_pose(n).position().dist(to) * 0.999;
        let (_, parent, end) = self.search(&sources, None, Some(&object), &goal, &heuristic, f64::INFINITY);
        let end = end?;
        let nodes = self.trace(&parent, end);
        let mut path = heads[source_head[&nodes[0]]].clone();
        path.extend(nodes.iter().map(|&n| self.node_pose(n).position()));
        path.extend(tails[sinks[&end].1].iter().rev());
        Some(dedup(path))
    }

    /// Object path (agent holding `grasp`) from `from` to a pose accepted by
    /// `target`. The first pose is `from`.
    pub fn transfer(&self, grasp: usize, from: &Pose2, target: &Target<'_>) -> Option<Vec<Pose2>> {
        if !self.compound_free(grasp, from, 0.0) {
            return None;
        }
        match target {
            Target::Region { accept, .. } if accept(from) => return Some(vec![*from]),
            Target::Pose(p) if p.approx_eq(from, 1e-9) => return Some(vec![*from]),
            _ => {}
        }
        if let Target::Pose(p) = target {
            if self.segment_free(from, p, Some(grasp), None) && p.position().dist(from.position()) <= 2.0 * self.cell {
                return Some(vec![*from, *p]);
            }
        }
        let sources = self.attach(from, Some(grasp), None);
        if sources.is_empty() {
            return None;
        }
        let (sinks, heuristic): (HashMap<usize, f64>, Box<dyn Fn(usize) -> f64>) = match target {
            Target::Region { bounds, .. } => {
                let b = *bounds;
                (HashMap::new(), Box::new(move |n| b.distance_to(self.node_pose(n).position()) * 0.999))
            }
            Target::Pose(p) => {
                let p = *p;
                let sinks = self.attach(&p, Some(grasp), None).into_iter().collect();
                (sinks, Box::new(move |n| self.node_pose(n).position().dist(p.position()) * 0.999))
            }
        };
        let goal = |n: usize| match target {
            Target::Region { accept, .. } => accept(&self.node_pose(n)).then_some(0.0),
            Target::Pose(_) => sinks.get(&n).copied(),
        };
        let limit = self.cfg.limit(match target {
            Target::Region { bounds, .. } => bounds.distance_to(from.position()),
            Target::Pose(p) => p.position().dist(from.position()),
        });
        let (_, parent, end) = self.search(&sources, Some(grasp), None, &goal, &*heuristic, limit);
        let end = end?;
        let mut path = vec![*from];
        path.extend(self.trace(&parent, end).into_iter().map(|n| self.node_pose(n)));
        if let Target::Pose(p) = target {
            path.push(*p);
        }
        Some(dedup_poses(path))
    }

    /// Every lattice pose reachable from `from` while holding `grasp`.
    pub fn flood(&self, grasp: usize, from: &Pose2) -> Flood {
        let heads: Vec<(usize, f64, Vec<Pose2>)> = if self.compound_free(grasp, from, 0.0) {
            self.attach(from, Some(grasp), None)
                .into_iter()
                .map(|(n, d)| (n, d, vec![*from]))
                .collect()
        } else {
            Vec::new()
        };
        let sources: Vec<(usize, f64)> = heads.iter().map(|h| (h.0, h.1)).collect();
        let (dist, parent, _) = self.search(&sources, Some(grasp), None, &|_| None, &|_| 0.0, f64::INFINITY);
        let mut head_of = vec![u32::MAX; dist.len()];
        for (k, h) in heads.iter().enumerate() {
            head_of[h.0] = k as u32;
        }
        Flood {
            start: *from,
            heads,
            dist,
            parent,
            head_of,
        }
    }

    /// Lattice distance from the flood root to `pose` (exact lattice pose, or
    /// a pose attached to the lattice by a short checked segment). Poses
    /// beyond the detour limit count as unreachable.
    pub fn flood_cost(&self, flood: &Flood, grasp: usize, pose: &Pose2) -> Option<(f64, usize, f64)> {
        if pose.approx_eq(&flood.start, 1e-9) {
            return Some((0.0, usize::MAX, 0.0));
        }
        let limit = self.cfg.limit(pose.position().dist(flood.start.position()));
        self.attach(pose, Some(grasp), None)
            .into_iter()
            .filter(|&(n, _)| flood.dist[n].is_finite())
            .map(|(n, d)| (flood.dist[n] + d, n, d))
            .filter(|c| c.0 <= limit)
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Path recorded by a flood to `pose`; `None` if unreachable.
    pub fn flood_path(&self, flood: &Flood, grasp: usize, pose: &Pose2) -> Option<Vec<Pose2>> {
        let (_, n, _) = self.flood_cost(flood, grasp, pose)?;
        if n == usize::MAX {
            return Some(vec![flood.start]);
        }
        let nodes = self.trace(&flood.parent, n);
        let head = flood.head_of[nodes[0]];
        let mut path = flood.heads[head as usize].2.clone();
        path.extend(nodes.iter().map(|&m| self.node_pose(m)));
        path.push(*pose);
        Some(dedup_poses(path))
    }

    /// Whether the agent can sit at `p` next to the object.
    pub fn agent_free_at(&self, p: Vec2, object_pose: &Pose2) -> bool {
        let object = self.shape().place(object_pose);
        self.world.disc_free(p, self.agent_radius(), 0.0) && !object.collides(&Placed::disc(p, self.agent_radius()))
    }

    pub fn compound_free_at(&self, grasp: usize, pose: &Pose2) -> bool {
        self.compound_free(grasp, pose, 0.0)
    }
}

fn dedup(path: Vec<Vec2>) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = Vec::with_capacity(path.len());
    for p in path {
        if out.last().is_none_or(|q| q.dist(p) > 1e-12) {
            out.push(p);
        }
    }
    out
}

fn dedup_poses(path: Vec<Pose2>) -> Vec<Pose2> {
    let mut out: Vec<Pose2> = Vec::with_capacity(path.len());
    for p in path {
        if out.last().is_none_or(|q| !q.approx_eq(&p, 1e-12)) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grasp::generate_grasps;
    use crate::scene::{fixtures, Scene};

    fn setup(scene: &Scene) -> (CollisionWorld, GraspSet) {
        let world = CollisionWorld::new(scene, 0.05);
        let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, 8, 0).unwrap();
        (world, grasps)
    }

    fn assert_transit_clear(mp: &MotionPlanner, path: &[Vec2], object: &Pose2) {
        for w in path.windows(2) {
            let (a, b) = (Pose2::from_parts(w[0], 0.0), Pose2::from_parts(w[1], 0.0));
            let n = replay_steps(&a, &b, 0.0, mp.cell() / 4.0);
            for s in 0..=n {
                let p = a.lerp(&b, s as f64 / n as f64).position();
                assert!(mp.agent_free_at(p, object), "agent collides at {p:?}");
            }
        }
    }

    fn assert_transfer_clear(mp: &MotionPlanner, g: usize, path: &[Pose2]) {
        for w in path.windows(2) {
            let n = replay_steps(&w[0], &w[1], mp.compound_radius(), mp.cell() / 4.0);
            for s in 0..=n {
                let p = w[0].lerp(&w[1], s as f64 / n as f64);
                assert!(mp.compound_free_at(g, &p), "compound collides at {p:?}");
            }
        }
    }

    #[test]
    fn straight_transit_in_open_room() {
        let scene = fixtures::open_room();
        let (world, grasps) = setup(&scene);
        let mp = MotionPlanner::new(&world, &grasps, 0.0, MotionConfig::default());
        let target = grasps.anchors[0].world_position(&scene.object_start);
        let path = mp.transit(scene.agent_start, target, &scene.object_start).unwrap();
        assert_eq!(path.len(), 2);
        assert_transit_clear(&mp, &path, &scene.object_start);
    }

    #[test]
    fn transit_goes_around_the_object() {
        let scene = fixtures::open_room();
        let (world, grasps) = setup(&scene);
        let mp = MotionPlanner::new(&world, &grasps, 0.0, MotionConfig::default());
        let obj = scene.object_start;
        let below = grasps.anchors[1].world_position(&obj);
        let above = grasps.anchors[5].world_position(&obj);
        let path = mp.transit(below, above, &obj).unwrap();
        assert!(path.len() > 3);
        assert!(path[0].dist(below) < 1e-12 && path.last().unwrap().dist(above) < 1e-12);
        assert_transit_clear(&mp, &path, &obj);
    }

    #[test]
    fn transfer_reaches_goal_region() {
        let scene = fixtures::open_room();
        let (world, grasps) = setup(&scene);
        let mp = MotionPlanner::new(&world, &grasps, 0.0, MotionConfig::default());
        let accept = |p: &Pose2| scene.goal.contains(p);
        let path = mp.transfer(1, &scene.object_start, &Target::Region { accept: &accept, bounds: scene.goal.rect }).unwrap();
        assert!(scene.goal.contains(path.last().unwrap()));
        assert!(path[0].approx_eq(&scene.object_start, 1e-12));
        assert_transfer_clear(&mp, 1, &path);
        let len: f64 = path.windows(2).map(|w| w[0].position().dist(w[1].position())).sum();
        let straight = scene.goal.rect.distance_to(scene.object_start.position());
        assert!(len < straight * 1.1 + 0.1, "{len} vs {straight}");
    }

    #[test]
    fn flood_agrees_with_point_transfer() {
        let scene = fixtures::open_room();
        let (world, grasps) = setup(&scene);
        let mp = MotionPlanner::new(&world, &grasps, 0.0, MotionConfig::default());
        let flood = mp.flood(2, &scene.object_start);
        let target = Pose2::new(5.05, 7.05, 0.0);
        let via_flood = mp.flood_path(&flood, 2, &target).unwrap();
        let direct = mp.transfer(2, &scene.object_start, &Target::Pose(target)).unwrap();
        let len = |p: &[Pose2]| -> f64 { p.windows(2).map(|w| w[0].position().dist(w[1].position())).sum() };
        assert!((len(&via_flood) - len(&direct)).abs() < 1e-9);
        assert!(via_flood.last().unwrap().approx_eq(&target, 1e-12));
        assert_transfer_clear(&mp, 2, &via_flood);
    }

    #[test]
    fn sealed_object_cannot_move() {
        let scene = fixtures::sealed();
        let (world, grasps) = setup(&scene);
        let mp = MotionPlanner::new(&world, &grasps, 0.0, MotionConfig::default());
        let accept = |p: &Pose2| scene.goal.contains(p);
        for g in 0..grasps.len() {
            assert!(mp.transfer(g, &scene.object_start, &Target::Region { accept: &accept, bounds: scene.goal.rect }).is_none());
        }
        let anchor = grasps.anchors[0].world_position(&scene.object_start);
        assert!(mp.transit(scene.agent_start, anchor, &scene.object_start).is_none());
    }

    #[test]
    fn rotation_moves_with_heading_bins() {
        let scene = fixtures::open_room();
        let (world, grasps) = setup(&scene);
        let cfg = MotionConfig { n_theta: 8, ..MotionConfig::default() };
        let mp = MotionPlanner::new(&world, &grasps, 0.0, cfg);
        let target = Pose2::new(3.05, 5.05, std::f64::consts::FRAC_PI_2);
        assert_eq!(mp.heading_bin(target.theta), Some(2));
        let path = mp.transfer(0, &scene.object_start, &Target::Pose(target)).unwrap();
        assert!(path.last().unwrap().approx_eq(&target, 1e-9));
        assert_transfer_clear(&mp, 0, &path);
        assert_eq!(mp.heading_bin(0.3), None);
    }

    #[test]
    fn replay_steps_bound_displacement() {
        let a = Pose2::new(0.0, 0.0, 0.0);
        let b = Pose2::new(0.05, 0.0, 0.0);
        assert_eq!(replay_steps(&a, &b, 0.0, 0.0125), 4);
        assert_eq!(replay_steps(&a, &a, 0.0, 0.0125), 1);
        let c = Pose2::new(0.0, 0.0, 0.1);
        assert_eq!(replay_steps(&a, &c, 1.0, 0.0125), 8);
    }
}
