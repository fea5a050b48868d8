//! Regrasp map: which grasps work where, and how grasp states connect.
//!
//! The object's configuration space is voxelized; every free voxel gets a
//! signature (the set of grasps scoring at least `alpha`). Connected voxels
//! with equal signatures form areas. Graph nodes are (area, grasp) pairs;
//! edges either keep the grasp and cross into an adjacent area (transport) or
//! keep the area and switch grasps (regrasp). Edge weights grow as the weaker
//! endpoint's feasibility drops, so shortest paths prefer robust grasp states.

mod graph;
mod segment;

pub use graph::{adjacency, cmp_label, DIST_TIE, edge_weight, min_regrasps, shortest_to_goals, DistTable, GraphEdge, WeightError};
pub use segment::{label_components, Dims};

use crate::geometry::{Pose2, Rect, Shape};
use crate::grasp::{FeasibilityParams, GraspScorer, GraspSet, PoseEval, Signature};
use crate::scene::{CollisionWorld, Scene};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::f64::consts::TAU;

/// Log offset of the edge weight.
pub const EPS_W: f64 = 1e-9;
/// Effective feasibility never drops below this, keeping weights finite.
pub const PHI_FLOOR: f64 = 2.0 * EPS_W;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapConfig {
    /// Voxel edge length (meters).
    pub voxel: f64,
    pub n_theta: usize,
    pub feasibility: FeasibilityParams,
    pub eps_w: f64,
    /// Evaluate voxels on the rayon pool.
    pub parallel: bool,
}

impl MapConfig {
    pub fn new(voxel: f64, feasibility: FeasibilityParams) -> Self {
        Self {
            voxel,
            n_theta: 1,
            feasibility,
            eps_w: EPS_W,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Voxel {
    pub occupied: bool,
    pub signature: Signature,
    pub phi: Vec<f64>,
}

/// Voxelized object configuration space anchored at the scene's lower-left
/// corner, so halving `v` subdivides every voxel into four.
#[derive(Debug, Clone)]
pub struct VoxelGrid {
    pub bounds: Rect,
    pub v: f64,
    pub dims: Dims,
    /// Heading of theta bin 0; bins are `TAU / n_theta` apart.
    pub theta0: f64,
    pub voxels: Vec<Voxel>,
}

impl VoxelGrid {
    pub fn layout(bounds: Rect, v: f64, n_theta: usize) -> Dims {
        let n = |len: f64| ((len / v) - 1e-9).ceil().max(1.0) as usize;
        Dims {
            nx: n(bounds.width()),
            ny: n(bounds.height()),
            nt: n_theta.max(1),
        }
    }

    pub fn n_theta(&self) -> usize {
        self.dims.nt
    }

    pub fn center(&self, i: usize) -> Pose2 {
        let (ix, iy, it) = self.dims.coords(i);
        Pose2::new(
            self.bounds.min.x + (ix as f64 + 0.5) * self.v,
            self.bounds.min.y + (iy as f64 + 0.5) * self.v,
            self.theta0 + it as f64 * TAU / self.dims.nt as f64,
        )
    }

    pub fn theta_bin(&self, theta: f64) -> usize {
        let nt = self.dims.nt;
        let step = TAU / nt as f64;
        let rel = (theta - self.theta0 + step / 2.0).rem_euclid(TAU);
        ((rel / step).floor() as usize).min(nt - 1)
    }

    /// Voxel containing `pose`, if inside the grid.
    pub fn containing(&self, pose: &Pose2) -> Option<usize> {
        let fx = (pose.x - self.bounds.min.x) / self.v;
        let fy = (pose.y - self.bounds.min.y) / self.v;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        if ix >= self.dims.nx || iy >= self.dims.ny {
            return None;
        }
        Some(self.dims.index(ix, iy, self.theta_bin(pose.theta)))
    }

    pub fn free_count(&self) -> usize {
        self.voxels.iter().filter(|v| !v.occupied).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Area {
    pub id: usize,
    pub voxels: Vec<usize>,
    pub signature: Signature,
    /// Per grasp: minimum over member voxels.
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Node {
    pub area: usize,
    pub grasp: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Transport,
    Regrasp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    /// Smaller measured feasibility of the two endpoint states.
    pub phi_measured: f64,
    /// Smaller effective feasibility of the two endpoint states; the weight
    /// derives from it.
    pub phi_effective: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbstractPath {
    pub nodes: Vec<usize>,
    pub cost: f64,
    pub regrasps: usize,
}

#[derive(Debug, Clone)]
pub struct RegraspMap {
    pub grid: VoxelGrid,
    pub areas: Vec<Area>,
    /// Area of every voxel (`None` when occupied).
    pub voxel_area: Vec<Option<usize>>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub goal_nodes: Vec<usize>,
    pub table: DistTable,
    pub alpha: f64,
    pub eps_w: f64,
    /// Per node: the area's minimum feasibility for the node's grasp.
    pub phi_measured: Vec<f64>,
    /// Per node: feasibility after refinement feedback. Edge weights use the
    /// smaller of their endpoints' values.
    pub phi_effective: Vec<f64>,
    node_index: HashMap<Node, usize>,
    adj: Vec<Vec<(usize, usize)>>,
}

pub fn evaluate_grid(world: &CollisionWorld, grasps: &GraspSet, theta0: f64, cfg: &MapConfig) -> VoxelGrid {
    let bounds = world.bounds();
    let dims = VoxelGrid::layout(bounds, cfg.voxel, cfg.n_theta);
    let mut grid = VoxelGrid {
        bounds,
        v: cfg.voxel,
        dims,
        theta0,
        voxels: Vec::new(),
    };
    let scorer = GraspScorer::new(world, grasps, cfg.feasibility);
    let eval = |i: usize| -> PoseEval { scorer.evaluate(&grid.center(i), i as u64) };
    let evals: Vec<PoseEval> = if cfg.parallel {
        (0..dims.len()).into_par_iter().map(eval).collect()
    } else {
        (0..dims.len()).map(eval).collect()
    };
    grid.voxels = evals
        .into_iter()
        .map(|e| Voxel {
            occupied: e.occupied,
            signature: e.signature(cfg.feasibility.alpha),
            phi: e.phi,
        })
        .collect();
    grid
}

pub fn segment(grid: &VoxelGrid) -> (Vec<Area>, Vec<Option<usize>>) {
    let cells: Vec<Option<Signature>> = grid
        .voxels
        .iter()
        .map(|v| (!v.occupied).then_some(v.signature))
        .collect();
    let (labels, n) = label_components(grid.dims, &cells);
    let k = grid.voxels.first().map_or(0, |v| v.phi.len());
    let mut areas: Vec<Area> = (0..n)
        .map(|id| Area {
            id,
            voxels: Vec::new(),
            signature: Signature::EMPTY,
            phi: vec![f64::INFINITY; k],
        })
        .collect();
    for (i, l) in labels.iter().enumerate() {
        if let Some(a) = *l {
            let area = &mut areas[a];
            area.voxels.push(i);
            area.signature = grid.voxels[i].signature;
            for (m, p) in area.phi.iter_mut().zip(&grid.voxels[i].phi) {
                *m = m.min(*p);
            }
        }
    }
    (areas, labels)
}

/// Builds the full map for one voxel size.
pub fn build_map(scene: &Scene, world: &CollisionWorld, grasps: &GraspSet, cfg: &MapConfig) -> RegraspMap {
    let grid = evaluate_grid(world, grasps, scene.object_start.theta, cfg);
    let (areas, voxel_area) = segment(&grid);
    let alpha = cfg.feasibility.alpha;

    let mut nodes = Vec::new();
    let mut node_index = HashMap::new();
    for a in &areas {
        for g in a.signature.iter() {
            node_index.insert(Node { area: a.id, grasp: g }, nodes.len());
            nodes.push(Node { area: a.id, grasp: g });
        }
    }

    let mut edges = Vec::new();
    let mut push = |a: usize, b: usize, kind: EdgeKind, pa: f64, pb: f64| {
        let w = edge_weight(pa, pb, cfg.eps_w).expect("endpoint feasibility is at least alpha");
        assert!(w > 0.0);
        edges.push(Edge {
            a,
            b,
            kind,
            phi_measured: pa.min(pb),
            phi_effective: pa.min(pb),
            weight: w,
        });
    };
    for a in &areas {
        let gs: Vec<usize> = a.signature.iter().collect();
        for (i, &u) in gs.iter().enumerate() {
            for &u2 in &gs[i + 1..] {
                if a.phi[u] >= alpha && a.phi[u2] >= alpha {
                    push(node_index[&Node { area: a.id, grasp: u }], node_index[&Node { area: a.id, grasp: u2 }], EdgeKind::Regrasp, a.phi[u], a.phi[u2]);
                }
            }
        }
    }
    let mut touching = BTreeSet::new();
    for (i, l) in voxel_area.iter().enumerate() {
        let Some(a) = *l else { continue };
        for n in grid.dims.neighbors(i) {
            if let Some(b) = voxel_area[n] {
                if a < b {
                    touching.insert((a, b));
                }
            }
        }
    }
    for (a, b) in touching {
        let shared = Signature(areas[a].signature.0 & areas[b].signature.0);
        for u in shared.iter() {
            let (pa, pb) = (areas[a].phi[u], areas[b].phi[u]);
            if pa >= alpha && pb >= alpha {
                push(node_index[&Node { area: a, grasp: u }], node_index[&Node { area: b, grasp: u }], EdgeKind::Transport, pa, pb);
            }
        }
    }

    let goal_areas: BTreeSet<usize> = voxel_area
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.filter(|_| scene.goal.contains(&grid.center(i))))
        .collect();
    let goal_nodes: Vec<usize> = nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| goal_areas.contains(&n.area))
        .map(|(i, _)| i)
        .collect();

    let phi: Vec<f64> = nodes.iter().map(|n| areas[n.area].phi[n.grasp]).collect();
    let mut map = RegraspMap {
        phi_measured: phi.clone(),
        phi_effective: phi,
        grid,
        areas,
        voxel_area,
        adj: Vec::new(),
        nodes,
        edges,
        goal_nodes,
        table: DistTable {
            dist: Vec::new(),
            regrasps: Vec::new(),
            next: Vec::new(),
        },
        alpha,
        eps_w: cfg.eps_w,
        node_index,
    };
    map.adj = adjacency(map.nodes.len(), &map.graph_edges());
    map.recompute();
    map
}

impl RegraspMap {
    pub fn graph_edges(&self) -> Vec<GraphEdge> {
        self.edges
            .iter()
            .map(|e| GraphEdge {
                a: e.a,
                b: e.b,
                weight: e.weight,
                regrasp: e.kind == EdgeKind::Regrasp,
            })
            .collect()
    }

    /// Reruns Dijkstra from the goal nodes; returns whether any distance changed.
    pub fn recompute(&mut self) -> bool {
        let t = shortest_to_goals(self.nodes.len(), &self.graph_edges(), &self.goal_nodes);
        let changed = t.dist != self.table.dist;
        self.table = t;
        changed
    }

    pub fn node(&self, area: usize, grasp: usize) -> Option<usize> {
        self.node_index.get(&Node { area, grasp }).copied()
    }

    pub fn dist(&self, node: usize) -> f64 {
        self.table.dist[node]
    }

    /// Nodes of `area`, grasp order.
    pub fn area_nodes(&self, area: usize) -> Vec<usize> {
        self.areas[area].signature.iter().filter_map(|g| self.node(area, g)).collect()
    }

    /// `(neighbor, edge index)` pairs of `node`.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adj[node]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a].iter().find(|(n, _)| *n == b).map(|(_, e)| *e)
    }

    pub fn is_goal_area(&self, area: usize) -> bool {
        self.goal_nodes.iter().any(|&n| self.nodes[n].area == area)
    }

    /// Area of the voxel containing `pose`.
    pub fn locate(&self, pose: &Pose2) -> Option<usize> {
        self.voxel_area[self.grid.containing(pose)?]
    }

    /// Like [`locate`](Self::locate), but when the containing voxel is
    /// occupied (its center is blocked although `pose` is not) falls back to
    /// the nearest of its 8 neighbours in the same theta bin whose center the
    /// object reaches by a collision-free straight translation.
    pub fn locate_near(&self, pose: &Pose2, world: &CollisionWorld, shape: &Shape) -> Option<usize> {
        let i = self.grid.containing(pose)?;
        if let Some(a) = self.voxel_area[i] {
            return Some(a);
        }
        let (ix, iy, it) = self.grid.dims.coords(i);
        let mut cands = Vec::new();
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (x, y) = (ix as i64 + dx, iy as i64 + dy);
                if x < 0 || y < 0 || x as usize >= self.grid.dims.nx || y as usize >= self.grid.dims.ny {
                    continue;
                }
                let j = self.grid.dims.index(x as usize, y as usize, it);
                if let Some(a) = self.voxel_area[j] {
                    cands.push((self.grid.center(j).position().dist(pose.position()), j, a));
                }
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cands
            .into_iter()
            .find(|&(_, j, _)| {
                let c = Pose2::from_parts(self.grid.center(j).position(), pose.theta);
                world.sweep_free(shape, pose, &c, 0.01, 0.0)
            })
            .map(|(_, _, a)| a)
    }

    /// Sets a node's effective feasibility and refreshes the weights of its
    /// edges.
    pub fn set_node_phi(&mut self, node: usize, phi: f64) {
        self.phi_effective[node] = phi.clamp(PHI_FLOOR, 1.0);
        for i in 0..self.adj[node].len() {
            let e = self.adj[node][i].1;
            let (a, b) = (self.edges[e].a, self.edges[e].b);
            let (pa, pb) = (self.phi_effective[a], self.phi_effective[b]);
            let edge = &mut self.edges[e];
            edge.phi_effective = pa.min(pb);
            edge.weight = edge_weight(pa, pb, self.eps_w).expect("floor exceeds the log offset");
        }
    }

    /// Halves the effective feasibility of each distinct node.
    pub fn penalize_nodes(&mut self, nodes: &[usize]) {
        for n in distinct(nodes) {
            self.set_node_phi(n, (self.phi_effective[n] / 2.0).max(PHI_FLOOR));
        }
    }

    /// Moves each distinct node's effective feasibility back toward its
    /// measured value.
    pub fn reward_nodes(&mut self, nodes: &[usize]) {
        for n in distinct(nodes) {
            self.set_node_phi(n, self.phi_measured[n].min(2.0 * self.phi_effective[n]));
        }
    }

    /// Failure feedback for an attempted edge: both endpoint states.
    pub fn penalize(&mut self, edge: usize) {
        let e = self.edges[edge];
        self.penalize_nodes(&[e.a, e.b]);
    }

    pub fn reward(&mut self, edge: usize) {
        let e = self.edges[edge];
        self.reward_nodes(&[e.a, e.b]);
    }

    pub fn start_nodes(&self, scene: &Scene, world: &CollisionWorld) -> Vec<usize> {
        self.locate_near(&scene.object_start, world, &scene.object_shape)
            .map(|a| self.area_nodes(a))
            .unwrap_or_default()
    }

    /// Minimum-cost abstract path from every start node that reaches a goal,
    /// cheapest first (ties: fewer regrasps, lower start node).
    pub fn find_paths(&self, scene: &Scene, world: &CollisionWorld) -> Vec<AbstractPath> {
        let mut paths: Vec<AbstractPath> = self
            .start_nodes(scene, world)
            .into_iter()
            .filter_map(|s| self.table.path_from(s))
            .map(|nodes| {
                let regrasps = nodes
                    .windows(2)
                    .filter(|w| self.nodes[w[0]].area == self.nodes[w[1]].area)
                    .count();
                AbstractPath {
                    cost: self.table.dist[nodes[0]],
                    regrasps,
                    nodes,
                }
            })
            .collect();
        paths.sort_by(|a, b| cmp_label((a.cost, a.regrasps as u32), (b.cost, b.regrasps as u32)).then(a.nodes[0].cmp(&b.nodes[0])));
        paths
    }

    /// Fewest regrasps over all abstract paths from the start to the goal.
    pub fn min_regrasps(&self, scene: &Scene, world: &CollisionWorld) -> Option<usize> {
        min_regrasps(self.nodes.len(), &self.graph_edges(), &self.start_nodes(scene, world), &self.goal_nodes)
    }

    pub fn export(&self) -> MapExport {
        let k = self.grid.voxels.first().map_or(0, |v| v.phi.len());
        MapExport {
            version: 1,
            bounds: self.grid.bounds,
            voxel: self.grid.v,
            theta0: self.grid.theta0,
            n_theta: self.grid.dims.nt,
            nx: self.grid.dims.nx,
            ny: self.grid.dims.ny,
            alpha: self.alpha,
            eps_w: self.eps_w,
            areas: self
                .areas
                .iter()
                .map(|a| AreaExport {
                    id: a.id,
                    signature: a.signature.bit_string(k),
                    voxels: a.voxels.len(),
                    phi: a.phi.clone(),
                })
                .collect(),
            voxel_area: self.voxel_area.clone(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeExport {
                    id,
                    area: n.area,
                    grasp: n.grasp,
                    dist_to_goal: self.table.dist[id].is_finite().then_some(self.table.dist[id]),
                })
                .collect(),
            edges: self.edges.clone(),
            goal_nodes: self.goal_nodes.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        self.export().to_json()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaExport {
    pub id: usize,
    /// Bit `k` is character `k`.
    pub signature: String,
    pub voxels: usize,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeExport {
    pub id: usize,
    pub area: usize,
    pub grasp: usize,
    /// Absent when the goal is unreachable.
    pub dist_to_goal: Option<f64>,
}

/// The saved form of a map. Voxels are indexed x fastest, then y, then theta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapExport {
    pub version: u32,
    pub bounds: Rect,
    pub voxel: f64,
    pub theta0: f64,
    pub n_theta: usize,
    pub nx: usize,
    pub ny: usize,
    pub alpha: f64,
    pub eps_w: f64,
    pub areas: Vec<AreaExport>,
    pub voxel_area: Vec<Option<usize>>,
    pub nodes: Vec<NodeExport>,
    pub edges: Vec<Edge>,
    pub goal_nodes: Vec<usize>,
}

impl MapExport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("map serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn distinct(nodes: &[usize]) -> BTreeSet<usize> {
    nodes.iter().copied().collect()
}

/// Result of the coarse-to-fine search.
#[derive(Debug, Clone)]
pub struct RegraspPlans {
    pub paths: Vec<AbstractPath>,
    pub map: RegraspMap,
    /// Voxel sizes tried, coarsest first.
    pub voxels_tried: Vec<f64>,
}

impl RegraspPlans {
    pub fn iterations(&self) -> usize {
        self.voxels_tried.len()
    }
}

/// Builds maps at `v0`, `v0 / 2`, ... until one has an abstract path from the
/// start to the goal or the voxel size would drop to `gamma` or below.
pub fn find_regrasp_plans(scene: &Scene, world: &CollisionWorld, grasps: &GraspSet, v0: f64, gamma: f64, cfg: &MapConfig) -> RegraspPlans {
    assert!(v0 > gamma && gamma > 0.0, "need v0 > gamma > 0");
    let mut v = v0;
    let mut tried = Vec::new();
    loop {
        let map = build_map(scene, world, grasps, &MapConfig { voxel: v, ..*cfg });
        tried.push(v);
        let paths = map.find_paths(scene, world);
        v /= 2.0;
        if !paths.is_empty() || v <= gamma {
            return RegraspPlans {
                paths,
                map,
                voxels_tried: tried,
            };
        }
    }
}
