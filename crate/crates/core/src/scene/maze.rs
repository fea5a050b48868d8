use super::{GoalRegion, Obstacle, Scene};
use crate::geometry::{Pose2, Rect, Shape, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MazeError {
    #[error("invalid maze parameters: {0}")]
    BadParams(String),
}

/// Room-lattice maze. Doors in vertical walls (`door_h` tall) pass the stick
/// lengthwise; doors in horizontal walls (`door_v` wide) pass it broadside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeParams {
    pub cols: usize,
    pub rows: usize,
    /// Room pitch in meters.
    pub room: f64,
    pub wall: f64,
    pub door_h: f64,
    pub door_v: f64,
    /// Free border between the outer wall and the scene bounds.
    pub border: f64,
    pub agent_radius: f64,
    pub stick_half_w: f64,
    pub stick_half_h: f64,
    pub goal_half: f64,
}

impl Default for MazeParams {
    fn default() -> Self {
        Self {
            cols: 3,
            rows: 3,
            room: 2.0,
            wall: 0.1,
            door_h: 0.42,
            door_v: 1.16,
            border: 0.25,
            agent_radius: 0.15,
            stick_half_w: 0.5,
            stick_half_h: 0.1,
            goal_half: 0.3,
        }
    }
}

impl MazeParams {
    pub fn validate(&self) -> Result<(), MazeError> {
        let bad = |m: &str| Err(MazeError::BadParams(m.into()));
        if self.cols == 0 || self.rows == 0 || self.cols * self.rows < 2 {
            return bad("maze needs at least two rooms");
        }
        let positive = [
            self.room,
            self.wall,
            self.door_h,
            self.door_v,
            self.agent_radius,
            self.stick_half_w,
            self.stick_half_h,
            self.goal_half,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.border < 0.0 {
            return bad("all lengths must be positive");
        }
        if self.wall >= self.room {
            return bad("wall thickness must be below the room pitch");
        }
        let clear = self.room - self.wall;
        if 2.0 * self.agent_radius >= self.door_h.min(self.door_v) {
            return bad("agent is wider than the corridors");
        }
        if self.door_h + 0.2 > clear || self.door_v + 0.2 > clear {
            return bad("doors do not fit inside a room side");
        }
        if 2.0 * (self.stick_half_w + self.agent_radius) >= clear {
            return bad("object and agent do not fit in a room");
        }
        if 2.0 * self.goal_half >= clear {
            return bad("goal does not fit in a room");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Open,
    Wall,
    Door(f64),
}

/// Room boundaries of a maze: `vertical[j * (cols + 1) + i]` is the wall at
/// column line `i` in row `j`, `horizontal[j * cols + i]` the wall at row line `j`
/// in column `i`.
struct Layout {
    cols: usize,
    rows: usize,
    vertical: Vec<Side>,
    horizontal: Vec<Side>,
}

impl Layout {
    fn new(cols: usize, rows: usize) -> Self {
        let mut l = Self {
            cols,
            rows,
            vertical: vec![Side::Open; (cols + 1) * rows],
            horizontal: vec![Side::Open; cols * (rows + 1)],
        };
        for j in 0..rows {
            l.vertical[j * (cols + 1)] = Side::Wall;
            l.vertical[j * (cols + 1) + cols] = Side::Wall;
        }
        for i in 0..cols {
            l.horizontal[i] = Side::Wall;
            l.horizontal[rows * cols + i] = Side::Wall;
        }
        l
    }

    fn divide(&mut self, rng: &mut ChaCha8Rng, p: &MazeParams, x0: usize, y0: usize, w: usize, h: usize) {
        if w < 2 && h < 2 {
            return;
        }
        let split_columns = if w < 2 {
            false
        } else if h < 2 || w > h {
            true
        } else if h > w {
            false
        } else {
            rng.gen_bool(0.5)
        };
        if split_columns {
            let k = rng.gen_range(1..w);
            let door = rng.gen_range(0..h);
            for j in 0..h {
                self.vertical[(y0 + j) * (self.cols + 1) + x0 + k] = if j == door {
                    Side::Door(door_offset(rng, p.room, p.door_h))
                } else {
                    Side::Wall
                };
            }
            self.divide(rng, p, x0, y0, k, h);
            self.divide(rng, p, x0 + k, y0, w - k, h);
        } else {
            let k = rng.gen_range(1..h);
            let door = rng.gen_range(0..w);
            for i in 0..w {
                self.horizontal[(y0 + k) * self.cols + x0 + i] = if i == door {
                    Side::Door(door_offset(rng, p.room, p.door_v))
                } else {
                    Side::Wall
                };
            }
            self.divide(rng, p, x0, y0, w, k);
            self.divide(rng, p, x0, y0 + k, w, h - k);
        }
    }
}

/// Door centers sit on odd multiples of 5 cm from the room corner.
fn door_offset(rng: &mut ChaCha8Rng, room: f64, gap: f64) -> f64 {
    let lo = gap / 2.0 + 0.15;
    let hi = room - gap / 2.0 - 0.15;
    let first = ((lo - 0.05) / 0.1).ceil() as i64;
    let last = ((hi - 0.05) / 0.1).floor() as i64;
    if last < first {
        return room / 2.0;
    }
    0.05 + 0.1 * rng.gen_range(first..=last) as f64
}

/// Axis-aligned wall from `from` to `to` along one axis at coordinate `at`,
/// with openings `(center, width)`.
/// Rounds to micrometers so saved scenes stay readable.
pub(crate) fn tidy(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

pub(crate) fn wall_segment(out: &mut Vec<Obstacle>, vertical: bool, at: f64, from: f64, to: f64, thickness: f64, gaps: &[(f64, f64)]) {
    let mut pieces = vec![(from, to)];
    for &(c, w) in gaps {
        let (lo, hi) = (c - w / 2.0, c + w / 2.0);
        pieces = pieces
            .into_iter()
            .flat_map(|(a, b)| {
                let mut v = Vec::new();
                if lo > a {
                    v.push((a, lo.min(b)));
                }
                if hi < b {
                    v.push((hi.max(a), b));
                }
                v
            })
            .filter(|(a, b)| b - a > 1e-9)
            .collect();
    }
    for (a, b) in pieces {
        let (at, mid, half, t) = (tidy(at), tidy((a + b) / 2.0), tidy((b - a) / 2.0), tidy(thickness / 2.0));
        let (pose, shape) = if vertical {
            (Pose2::new(at, mid, 0.0), Shape::rect(t, half))
        } else {
            (Pose2::new(mid, at, 0.0), Shape::rect(half, t))
        };
        out.push(Obstacle { shape, pose });
    }
}

fn walls(layout: &Layout, p: &MazeParams) -> Vec<Obstacle> {
    let mut out = Vec::new();
    let o = p.border + p.wall / 2.0;
    let t = p.wall / 2.0;
    for j in 0..layout.rows {
        for i in 0..=layout.cols {
            let side = layout.vertical[j * (layout.cols + 1) + i];
            let x = o + i as f64 * p.room;
            let y0 = o + j as f64 * p.room;
            match side {
                Side::Open => {}
                Side::Wall => wall_segment(&mut out, true, x, y0 - t, y0 + p.room + t, p.wall, &[]),
                Side::Door(off) => wall_segment(&mut out, true, x, y0 - t, y0 + p.room + t, p.wall, &[(y0 + off, p.door_h)]),
            }
        }
    }
    for j in 0..=layout.rows {
        for i in 0..layout.cols {
            let side = layout.horizontal[j * layout.cols + i];
            let y = o + j as f64 * p.room;
            let x0 = o + i as f64 * p.room;
            match side {
                Side::Open => {}
                Side::Wall => wall_segment(&mut out, false, y, x0 - t, x0 + p.room + t, p.wall, &[]),
                Side::Door(off) => wall_segment(&mut out, false, y, x0 - t, x0 + p.room + t, p.wall, &[(x0 + off, p.door_v)]),
            }
        }
    }
    out
}

/// Builds a random maze scene. Deterministic in `seed`; the returned scene
/// always passes [`Scene::validate`].
pub fn generate_maze(seed: u64, params: &MazeParams) -> Result<Scene, MazeError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(scene) = try_generate(&mut rng, seed, params) {
            return Ok(scene);
        }
    }
}

fn try_generate(rng: &mut ChaCha8Rng, seed: u64, p: &MazeParams) -> Option<Scene> {
    let mut layout = Layout::new(p.cols, p.rows);
    layout.divide(rng, p, 0, 0, p.cols, p.rows);
    let obstacles = walls(&layout, p);
    let o = p.border + p.wall / 2.0;
    let extent = Vec2::new(2.0 * o + p.cols as f64 * p.room, 2.0 * o + p.rows as f64 * p.room);
    let bounds = Rect::new(Vec2::ZERO, extent);

    let rooms = p.cols * p.rows;
    let start_room = rng.gen_range(0..rooms);
    let mut goal_room = rng.gen_range(0..rooms - 1);
    if goal_room >= start_room {
        goal_room += 1;
    }
    let room_min = |r: usize| Vec2::new(o + (r % p.cols) as f64 * p.room, o + (r / p.cols) as f64 * p.room);

    let inner = p.wall / 2.0;
    let s0 = room_min(start_room);
    let object_shape = Shape::rect(p.stick_half_w, p.stick_half_h);
    let mut scene = Scene {
        name: format!("maze-{seed}"),
        bounds,
        obstacles,
        object_shape,
        object_start: Pose2::identity(),
        agent_radius: p.agent_radius,
        agent_start: Vec2::ZERO,
        goal: GoalRegion::new(Rect::from_center(Vec2::ZERO, p.goal_half, p.goal_half)),
    };

    // Object away from the walls by at least 5 cm, agent by 10 cm from everything.
    let ox = uniform(rng, s0.x + inner + p.stick_half_w + 0.05, s0.x + p.room - inner - p.stick_half_w - 0.05);
    let oy = uniform(rng, s0.y + inner + p.stick_half_h + 0.05, s0.y + p.room - inner - p.stick_half_h - 0.05);
    scene.object_start = Pose2::new(ox, oy, 0.0);
    let object = scene.object_shape.place(&scene.object_start);
    let r = p.agent_radius;
    let mut placed_agent = false;
    for _ in 0..200 {
        let a = Vec2::new(
            uniform(rng, s0.x + inner + r + 0.1, s0.x + p.room - inner - r - 0.1),
            uniform(rng, s0.y + inner + r + 0.1, s0.y + p.room - inner - r - 0.1),
        );
        if crate::geometry::Placed::disc(a, r).separation(&object) > 0.1 {
            scene.agent_start = a;
            placed_agent = true;
            break;
        }
    }
    if !placed_agent {
        return None;
    }

    let g0 = room_min(goal_room);
    let half_room = p.room / 2.0;
    let slack = (half_room - inner - p.stick_half_w - p.agent_radius * 2.0 - 0.05).max(0.0);
    let gx = g0.x + half_room + uniform(rng, -slack, slack);
    let gy = g0.y + half_room + uniform(rng, -0.3, 0.3);
    scene.goal = GoalRegion::new(Rect::from_center(Vec2::new(gx, gy), p.goal_half, p.goal_half));

    scene.validate().ok()?;
    Some(scene)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        (lo + hi) / 2.0
    } else {
        rng.gen_range(lo..hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scene() {
        let p = MazeParams::default();
        let a = generate_maze(7, &p).unwrap();
        let b = generate_maze(7, &p).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = generate_maze(8, &p).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn hundred_seeds_are_valid() {
        let p = MazeParams::default();
        for seed in 0..100 {
            let s = generate_maze(seed, &p).unwrap();
            s.validate().unwrap();
            assert!(s.bounds.contains_rect(&s.goal.rect));
        }
    }

    #[test]
    fn rejects_agent_wider_than_corridor() {
        let p = MazeParams {
            agent_radius: 0.25,
            ..MazeParams::default()
        };
        assert!(matches!(generate_maze(1, &p), Err(MazeError::BadParams(_))));
        let p = MazeParams {
            wall: 3.0,
            ..MazeParams::default()
        };
        assert!(generate_maze(1, &p).is_err());
    }

    #[test]
    fn recursive_division_yields_a_perfect_maze() {
        // Every room reachable and rooms - 1 passages: a spanning tree.
        let p = MazeParams {
            cols: 5,
            rows: 4,
            ..MazeParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut l = Layout::new(p.cols, p.rows);
        l.divide(&mut rng, &p, 0, 0, p.cols, p.rows);
        let passable = |s: Side| !matches!(s, Side::Wall);
        let mut passages = 0;
        let mut parent: Vec<usize> = (0..p.cols * p.rows).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for j in 0..p.rows {
            for i in 1..p.cols {
                if passable(l.vertical[j * (p.cols + 1) + i]) {
                    passages += 1;
                    let (a, b) = (find(&mut parent, j * p.cols + i - 1), find(&mut parent, j * p.cols + i));
                    parent[a] = b;
                }
            }
        }
        for j in 1..p.rows {
            for i in 0..p.cols {
                if passable(l.horizontal[j * p.cols + i]) {
                    passages += 1;
                    let (a, b) = (find(&mut parent, (j - 1) * p.cols + i), find(&mut parent, j * p.cols + i));
                    parent[a] = b;
                }
            }
        }
        assert_eq!(passages, p.cols * p.rows - 1);
        let root = find(&mut parent, 0);
        assert!((0..p.cols * p.rows).all(|r| find(&mut parent, r) == root));
    }
}
