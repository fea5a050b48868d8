use super::Scene;
use crate::geometry::{EsdfGrid, Placed, Pose2, Rect, Shape, Vec2};

/// Static part of a scene prepared for repeated collision queries: world-frame
/// obstacles plus an ESDF used as a broad phase in front of the exact checks.
///
/// Every `*_free` query is exact; the ESDF only short-circuits far-from-obstacle
/// cases. `margin` demands strictly more than that much clearance; `margin = 0`
/// is the closed-set predicate (touching is a collision). Scene bounds act as walls.
#[derive(Debug, Clone)]
pub struct CollisionWorld {
    bounds: Rect,
    obstacles: Vec<Placed>,
    esdf: EsdfGrid,
}

impl CollisionWorld {
    pub fn new(scene: &Scene, esdf_cell: f64) -> Self {
        let obstacles = scene.placed_obstacles();
        let esdf = EsdfGrid::from_placed(&obstacles, scene.bounds, esdf_cell).expect("validated scene has non-degenerate bounds");
        Self {
            bounds: scene.bounds,
            obstacles,
            esdf,
        }
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn esdf(&self) -> &EsdfGrid {
        &self.esdf
    }

    pub fn obstacles(&self) -> &[Placed] {
        &self.obstacles
    }

    fn far_from_obstacles(&self, center: Vec2, reach: f64) -> bool {
        match self.esdf.clearance(center) {
            Ok(c) => c > reach + self.esdf.error_bound(),
            Err(_) => false,
        }
    }

    pub fn disc_free(&self, center: Vec2, radius: f64, margin: f64) -> bool {
        if self.bounds.inner_margin(center) - radius <= margin {
            return false;
        }
        if self.far_from_obstacles(center, radius + margin) {
            return true;
        }
        let d = Placed::disc(center, radius);
        self.obstacles.iter().all(|o| d.clear_by(o, margin))
    }

    /// `reference` and `reach` describe a disc containing `placed`, used by the broad phase.
    pub fn placed_free(&self, placed: &Placed, reference: Vec2, reach: f64, margin: f64) -> bool {
        let bb = placed.aabb();
        let b = self.bounds;
        if !(bb.min.x - b.min.x > margin
            && bb.min.y - b.min.y > margin
            && b.max.x - bb.max.x > margin
            && b.max.y - bb.max.y > margin)
        {
            return false;
        }
        if self.far_from_obstacles(reference, reach + margin) {
            return true;
        }
        self.obstacles.iter().all(|o| placed.clear_by(o, margin))
    }

    pub fn shape_free(&self, shape: &Shape, pose: &Pose2, margin: f64) -> bool {
        match shape {
            Shape::Disc { radius } => self.disc_free(pose.position(), *radius, margin),
            _ => self.placed_free(&shape.place(pose), pose.position(), shape.circumradius(), margin),
        }
    }
}

impl CollisionWorld {
    /// Checks `shape` at poses interpolated from `from` to `to` (both ends
    /// included) no more than `step` apart in position.
    pub fn sweep_free(&self, shape: &Shape, from: &Pose2, to: &Pose2, step: f64, margin: f64) -> bool {
        let n = (from.position().dist(to.position()) / step).ceil().max(1.0) as usize;
        (0..=n).all(|i| self.shape_free(shape, &from.lerp(to, i as f64 / n as f64), margin))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::fixtures;

    #[test]
    fn broad_phase_agrees_with_exact_checks() {
        let scene = fixtures::tunnel();
        let world = CollisionWorld::new(&scene, 0.05);
        let obstacles = scene.placed_obstacles();
        let b = scene.bounds;
        let n = 60;
        for i in 0..n {
            for j in 0..n {
                let p = Vec2::new(
                    b.min.x + (i as f64 + 0.5) * b.width() / n as f64,
                    b.min.y + (j as f64 + 0.5) * b.height() / n as f64,
                );
                let d = Placed::disc(p, scene.agent_radius);
                let exact = b.inner_margin(p) > scene.agent_radius && obstacles.iter().all(|o| !d.collides(o));
                assert_eq!(world.disc_free(p, scene.agent_radius, 0.0), exact, "at {p:?}");
                let pose = Pose2::from_parts(p, 0.0);
                let placed = scene.object_shape.place(&pose);
                let bb = placed.aabb();
                let inside = bb.min.x > b.min.x && bb.min.y > b.min.y && bb.max.x < b.max.x && bb.max.y < b.max.y;
                let exact = inside && obstacles.iter().all(|o| !placed.collides(o));
                assert_eq!(world.shape_free(&scene.object_shape, &pose, 0.0), exact, "at {p:?}");
            }
        }
    }
}
