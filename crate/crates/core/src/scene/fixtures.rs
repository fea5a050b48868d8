//! Authored scenes shipped in `fixtures/`.
//!
//! All share one agent (disc, r = 0.15 m) and one stick (1.0 m × 0.2 m). Walls
//! are 0.1 m thick. Openings 0.46 m tall pass the stick only lengthwise (end
//! grasps); openings 1.16 m wide pass it only broadside (side grasps).

use super::maze::{tidy, wall_segment};
use super::{generate_maze, GoalRegion, MazeParams, Obstacle, Scene};
use crate::geometry::{Pose2, Rect, Shape, Vec2};

pub const AGENT_RADIUS: f64 = 0.15;
pub const STICK_HALF_W: f64 = 0.5;
pub const STICK_HALF_H: f64 = 0.1;
pub const WALL: f64 = 0.1;
/// Height of a lengthwise-only opening.
pub const SLOT_H: f64 = 0.46;
/// Width of a broadside-only opening.
pub const SLOT_V: f64 = 1.16;

/// Names of the scenes written to the fixture directory, in order.
pub const NAMES: [&str; 8] = [
    "cage-small",
    "cage",
    "tunnel",
    "maze",
    "open-room",
    "narrow-passage",
    "detour",
    "sealed",
];

pub fn by_name(name: &str) -> Option<Scene> {
    Some(match name {
        "cage-small" => cage_small(),
        "cage" => cage(),
        "tunnel" => tunnel(),
        "maze" => maze(),
        "open-room" => open_room(),
        "narrow-passage" => narrow_passage(),
        "detour" => detour(),
        "sealed" => sealed(),
        _ => return None,
    })
}

pub fn all() -> Vec<Scene> {
    NAMES.iter().map(|n| by_name(n).expect("listed fixture exists")).collect()
}

/// Small helper for laying out axis-aligned walls.
struct Walls(Vec<Obstacle>);

impl Walls {
    fn new() -> Self {
        Walls(Vec::new())
    }

    /// Vertical wall on `x` from `y0` to `y1` with openings `(center, width)`.
    fn v(&mut self, x: f64, y0: f64, y1: f64, gaps: &[(f64, f64)]) -> &mut Self {
        wall_segment(&mut self.0, true, x, y0 - WALL / 2.0, y1 + WALL / 2.0, WALL, gaps);
        self
    }

    /// Horizontal wall on `y` from `x0` to `x1` with openings `(center, width)`.
    fn h(&mut self, y: f64, x0: f64, x1: f64, gaps: &[(f64, f64)]) -> &mut Self {
        wall_segment(&mut self.0, false, y, x0 - WALL / 2.0, x1 + WALL / 2.0, WALL, gaps);
        self
    }

    /// Solid block spanning the given rectangle.
    fn block(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) -> &mut Self {
        self.0.push(Obstacle {
            shape: Shape::rect(tidy((x1 - x0) / 2.0), tidy((y1 - y0) / 2.0)),
            pose: Pose2::new(tidy((x0 + x1) / 2.0), tidy((y0 + y1) / 2.0), 0.0),
        });
        self
    }

    /// Closed rectangular enclosure with wall centerlines on the given rectangle.
    fn frame(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) -> &mut Self {
        self.v(x0, y0, y1, &[]).v(x1, y0, y1, &[]).h(y0, x0, x1, &[]).h(y1, x0, x1, &[])
    }
}

fn stick() -> Shape {
    Shape::rect(STICK_HALF_W, STICK_HALF_H)
}

fn scene(name: &str, w: f64, h: f64, walls: Walls, object: Pose2, agent: Vec2, goal: Rect) -> Scene {
    let s = Scene {
        name: name.into(),
        bounds: Rect::new(Vec2::ZERO, Vec2::new(w, h)),
        obstacles: walls.0,
        object_shape: stick(),
        object_start: object,
        agent_radius: AGENT_RADIUS,
        agent_start: agent,
        goal: GoalRegion::new(goal),
    };
    debug_assert!(s.validate().is_ok(), "{name}: {:?}", s.validate());
    s
}

/// Unobstructed 10 m × 10 m room.
pub fn open_room() -> Scene {
    scene(
        "open-room",
        10.0,
        10.0,
        Walls::new(),
        Pose2::new(3.05, 5.05, 0.0),
        Vec2::new(2.0, 2.0),
        Rect::from_center(Vec2::new(7.5, 5.5), 0.4, 0.4),
    )
}

/// Stick boxed in with 2 cm of play: placeable, but never graspable.
pub fn sealed() -> Scene {
    let mut w = Walls::new();
    let (cx, cy) = (2.05, 2.05);
    let (hx, hy) = (STICK_HALF_W + 0.02 + WALL / 2.0, STICK_HALF_H + 0.02 + WALL / 2.0);
    w.frame(cx - hx, cy - hy, cx + hx, cy + hy);
    scene(
        "sealed",
        6.0,
        4.0,
        w,
        Pose2::new(cx, cy, 0.0),
        Vec2::new(4.5, 2.0),
        Rect::from_center(Vec2::new(4.65, 3.05), 0.4, 0.4),
    )
}

/// Reference maze from the generator.
pub fn maze() -> Scene {
    let mut s = generate_maze(11, &MazeParams::default()).expect("default maze parameters are valid");
    s.name = "maze".into();
    s
}

/// Stick lying in a floor pocket (only the top grasp reaches it) below a
/// small chamber; a lengthwise-only tunnel leads from the chamber to the goal
/// side. One regrasp, inside the chamber.
pub fn tunnel() -> Scene {
    let mut w = Walls::new();
    // Pocket walls double as the chamber floor.
    w.block(0.0, 0.0, 0.71, 0.6).block(1.79, 0.0, 4.5, 0.6);
    // Chamber x 0.35..2.05, y 0.6..1.4; tunnel centered at y = 1.0 to x = 4.5.
    w.block(0.0, 0.6, 0.35, 1.5).block(2.05, 0.6, 4.5, 1.0 - SLOT_H / 2.0).block(2.05, 1.0 + SLOT_H / 2.0, 4.5, 1.4);
    w.block(0.0, 1.4, 4.5, 1.5);
    scene(
        "tunnel",
        9.0,
        6.0,
        w,
        Pose2::new(1.25, 0.25, 0.0),
        Vec2::new(1.85, 1.2),
        Rect::from_center(Vec2::new(7.5, 3.0), 0.4, 0.4),
    )
}

/// Stick starts in a short tube inside a cage, reachable only at its ends. The
/// stick's only exit is a broadside-only gap in the cage roof, and the goal
/// lies behind a lengthwise-only hole in a wall outside. Two regrasps.
pub fn cage() -> Scene {
    let mut w = Walls::new();
    // Cage interior x 1.0..5.4, y 0.5..2.9; roof gap centered at x = 3.2.
    w.v(0.95, 0.45, 2.95, &[]).v(5.45, 0.45, 2.95, &[]).h(0.45, 0.95, 5.45, &[]);
    // The 0.4 m hole near the left corner passes only the agent.
    w.h(2.95, 0.95, 5.45, &[(1.4, 0.4), (3.2, SLOT_V)]);
    // Tube x 2.6..3.8 with its bore y 0.8..0.8 + SLOT_H, open at both ends.
    w.block(2.6, 0.5, 3.8, 0.8).block(2.6, 0.8 + SLOT_H, 3.8, 0.88 + SLOT_H);
    // Outside the cage, a wall at x = 6.4 with a hole at y = 3.75.
    w.block(6.4, 0.0, 6.5, 3.75 - SLOT_H / 2.0).block(6.4, 3.75 + SLOT_H / 2.0, 6.5, 6.0);
    scene(
        "cage",
        12.0,
        6.0,
        w,
        Pose2::new(3.2, 0.8 + SLOT_H / 2.0, 0.0),
        Vec2::new(3.2, 2.2),
        Rect::from_center(Vec2::new(9.5, 2.0), 0.4, 0.4),
    )
}

/// Stick inside a cage with one wide opening; the goal is just outside.
pub fn cage_small() -> Scene {
    let mut w = Walls::new();
    w.v(0.95, 0.95, 3.05, &[]).v(3.55, 0.95, 3.05, &[(2.0, 1.6)]);
    w.h(0.95, 0.95, 3.55, &[]).h(3.05, 0.95, 3.55, &[]);
    scene(
        "cage-small",
        6.0,
        4.0,
        w,
        Pose2::new(2.0, 2.0, 0.0),
        Vec2::new(2.0, 1.5),
        Rect::from_center(Vec2::new(4.8, 2.0), 0.4, 0.4),
    )
}

/// Two rooms joined by a broadside-only shaft with 3 cm of play each side of
/// the stick, centered at x = 4.05. Only grids whose voxel centers fall in that
/// band see the shaft.
pub fn narrow_passage() -> Scene {
    let mut w = Walls::new();
    let gap = 2.0 * STICK_HALF_W + 0.06;
    w.block(0.0, 2.4, 4.05 - gap / 2.0, 3.2).block(4.05 + gap / 2.0, 2.4, 8.0, 3.2);
    scene(
        "narrow-passage",
        8.0,
        5.6,
        w,
        Pose2::new(4.05, 1.05, 0.0),
        Vec2::new(4.05, 0.5),
        Rect::from_center(Vec2::new(4.05, 4.45), 0.4, 0.4),
    )
}

/// A thin wall between start and goal with a broadside-only opening at its far
/// end; the goal lies in a lengthwise-only slot, so the true route needs one
/// regrasp. Placements on a 0.4 m grid straddle the wall, and the coarse map
/// believes an end grasp can carry the stick straight across.
pub fn detour() -> Scene {
    let mut w = Walls::new();
    w.block(0.0, 2.78, 8.0 - SLOT_V, 2.82);
    // Slot along y = 4.2 from the left edge to x = 2.4.
    w.block(0.0, 3.6, 2.4, 4.2 - SLOT_H / 2.0).block(0.0, 4.2 + SLOT_H / 2.0, 2.4, 4.8);
    scene(
        "detour",
        8.0,
        6.0,
        w,
        Pose2::new(1.4, 1.4, 0.0),
        Vec2::new(1.4, 0.6),
        Rect::from_center(Vec2::new(1.4, 4.2), 0.4, 0.4),
    )
}
