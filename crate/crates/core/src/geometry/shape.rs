use super::{Pose2, Rect, Vec2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ShapeError {
    #[error("disc radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("box half extents must be positive and finite, got ({0}, {1})")]
    BadExtents(f64, f64),
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon must be convex and counter-clockwise")]
    NotConvexCcw,
}

/// Rigid planar shape in its local frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Disc { radius: f64 },
    Box { half_w: f64, half_h: f64 },
    ConvexPolygon { vertices: Vec<Vec2> },
}

impl Shape {
    pub fn disc(radius: f64) -> Self {
        Shape::Disc { radius }
    }

    pub fn rect(half_w: f64, half_h: f64) -> Self {
        Shape::Box { half_w, half_h }
    }

    pub fn validate(&self) -> Result<(), ShapeError> {
        match self {
            Shape::Disc { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(ShapeError::BadRadius(*radius));
                }
            }
            Shape::Box { half_w, half_h } => {
                if !(half_w.is_finite() && half_h.is_finite() && *half_w > 0.0 && *half_h > 0.0) {
                    return Err(ShapeError::BadExtents(*half_w, *half_h));
                }
            }
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(ShapeError::TooFewVertices(n));
                }
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    if !(b - a).cross(c - b).is_finite() || (b - a).cross(c - b) <= 0.0 {
                        return Err(ShapeError::NotConvexCcw);
                    }
                }
            }
        }
        Ok(())
    }

    /// Radius of the smallest origin-centered disc containing the shape.
    pub fn circumradius(&self) -> f64 {
        match self {
            Shape::Disc { radius } => *radius,
            Shape::Box { half_w, half_h } => half_w.hypot(*half_h),
            Shape::ConvexPolygon { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// Largest radius of an origin-centered disc inside the shape (0 if the origin is outside).
    pub fn inradius(&self) -> f64 {
        (-Placed::new(self, &Pose2::identity()).signed_distance(Vec2::ZERO)).max(0.0)
    }

    /// Local-frame outline; discs have none.
    pub fn local_polygon(&self) -> Option<Vec<Vec2>> {
        match self {
            Shape::Disc { .. } => None,
            Shape::Box { half_w, half_h } => Some(vec![
                Vec2::new(-half_w, -half_h),
                Vec2::new(*half_w, -half_h),
                Vec2::new(*half_w, *half_h),
                Vec2::new(-half_w, *half_h),
            ]),
            Shape::ConvexPolygon { vertices } => Some(vertices.clone()),
        }
    }

    pub fn place(&self, pose: &Pose2) -> Placed {
        Placed::new(self, pose)
    }
}

/// Shape transformed into the world frame, with a cached bounding box.
#[derive(Debug, Clone, PartialEq)]
pub enum Placed {
    Disc { center: Vec2, radius: f64 },
    Polygon { vertices: Vec<Vec2>, aabb: Rect },
}

impl Placed {
    pub fn new(shape: &Shape, pose: &Pose2) -> Self {
        match shape {
            Shape::Disc { radius } => Placed::Disc {
                center: pose.position(),
                radius: *radius,
            },
            _ => {
                let vertices: Vec<Vec2> = shape
                    .local_polygon()
                    .expect("non-disc shape has an outline")
                    .into_iter()
                    .map(|v| pose.transform_point(v))
                    .collect();
                let aabb = bounding_box(&vertices);
                Placed::Polygon { vertices, aabb }
            }
        }
    }

    pub fn disc(center: Vec2, radius: f64) -> Self {
        Placed::Disc { center, radius }
    }

    pub fn aabb(&self) -> Rect {
        match self {
            Placed::Disc { center, radius } => Rect::from_center(*center, *radius, *radius),
            Placed::Polygon { aabb, .. } => *aabb,
        }
    }

    /// Signed distance from `p` to the boundary: negative inside, zero on it.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self {
            Placed::Disc { center, radius } => p.dist(*center) - radius,
            Placed::Polygon { vertices, .. } => polygon_signed_distance(vertices, p),
        }
    }

    /// Closest boundary point to `p`.
    pub fn closest_boundary_point(&self, p: Vec2) -> Vec2 {
        match self {
            Placed::Disc { center, radius } => {
                let d = (p - *center).normalized();
                let d = if d == Vec2::ZERO { Vec2::new(1.0, 0.0) } else { d };
                *center + d * *radius
            }
            Placed::Polygon { vertices, .. } => {
                let n = vertices.len();
                let mut best = vertices[0];
                let mut best_d = f64::INFINITY;
                for i in 0..n {
                    let q = closest_on_segment(vertices[i], vertices[(i + 1) % n], p);
                    let d = q.dist(p);
                    if d < best_d {
                        best_d = d;
                        best = q;
                    }
                }
                best
            }
        }
    }

    /// Closed-set intersection test.
    pub fn collides(&self, other: &Placed) -> bool {
        if !self.aabb().intersects(&other.aabb()) {
            return false;
        }
        match (self, other) {
            (Placed::Disc { center: a, radius: ra }, Placed::Disc { center: b, radius: rb }) => {
                a.dist(*b) <= ra + rb
            }
            (Placed::Disc { center, radius }, Placed::Polygon { vertices, .. })
            | (Placed::Polygon { vertices, .. }, Placed::Disc { center, radius }) => {
                polygon_signed_distance(vertices, *center) <= *radius
            }
            (Placed::Polygon { vertices: a, .. }, Placed::Polygon { vertices: b, .. }) => sat_overlap(a, b),
        }
    }

    /// Euclidean gap between the two sets; `<= 0` exactly when they collide.
    pub fn separation(&self, other: &Placed) -> f64 {
        match (self, other) {
            (Placed::Disc { center: a, radius: ra }, Placed::Disc { center: b, radius: rb }) => {
                a.dist(*b) - ra - rb
            }
            (Placed::Disc { center, radius }, Placed::Polygon { vertices, .. })
            | (Placed::Polygon { vertices, .. }, Placed::Disc { center, radius }) => {
                polygon_signed_distance(vertices, *center) - radius
            }
            (Placed::Polygon { vertices: a, .. }, Placed::Polygon { vertices: b, .. }) => {
                if sat_overlap(a, b) {
                    0.0
                } else {
                    polygon_gap(a, b).min(polygon_gap(b, a))
                }
            }
        }
    }

    /// True when the sets are more than `margin` apart. Skips exact work for far-apart boxes.
    pub fn clear_by(&self, other: &Placed, margin: f64) -> bool {
        if !self.aabb().expanded(margin).intersects(&other.aabb()) {
            return true;
        }
        if margin <= 0.0 {
            return !self.collides(other);
        }
        self.separation(other) > margin
    }
}

/// Exact closed-set collision between two posed shapes. Symmetric.
pub fn collide(shape_a: &Shape, pose_a: &Pose2, shape_b: &Shape, pose_b: &Pose2) -> bool {
    shape_a.place(pose_a).collides(&shape_b.place(pose_b))
}

/// Gap between two posed shapes (`<= 0` iff they collide).
pub fn separation(shape_a: &Shape, pose_a: &Pose2, shape_b: &Shape, pose_b: &Pose2) -> f64 {
    shape_a.place(pose_a).separation(&shape_b.place(pose_b))
}

fn bounding_box(vs: &[Vec2]) -> Rect {
    let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in vs {
        min.x = min.x.min(v.x);
        min.y = min.y.min(v.y);
        max.x = max.x.max(v.x);
        max.y = max.y.max(v.y);
    }
    Rect::new(min, max)
}

fn closest_on_segment(a: Vec2, b: Vec2, p: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

fn polygon_signed_distance(vs: &[Vec2], p: Vec2) -> f64 {
    let n = vs.len();
    let mut inside = true;
    let mut d2 = f64::INFINITY;
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        if (b - a).cross(p - a) < 0.0 {
            inside = false;
        }
        d2 = d2.min(closest_on_segment(a, b, p).dist(p).powi(2));
    }
    let d = d2.sqrt();
    if inside {
        -d
    } else {
        d
    }
}

fn project(vs: &[Vec2], axis: Vec2) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vs {
        let d = v.dot(axis);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

fn sat_overlap(a: &[Vec2], b: &[Vec2]) -> bool {
    for poly in [a, b] {
        let n = poly.len();
        for i in 0..n {
            let axis = (poly[(i + 1) % n] - poly[i]).perp();
            let (a_lo, a_hi) = project(a, axis);
            let (b_lo, b_hi) = project(b, axis);
            if a_hi < b_lo || b_hi < a_lo {
                return false;
            }
        }
    }
    true
}

/// Minimum distance from vertices of `a` to edges of `b`.
fn polygon_gap(a: &[Vec2], b: &[Vec2]) -> f64 {
    let n = b.len();
    let mut best = f64::INFINITY;
    for &v in a {
        for i in 0..n {
            best = best.min(closest_on_segment(b[i], b[(i + 1) % n], v).dist(v));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn separated_discs_do_not_collide() {
        let d = Shape::disc(1.0);
        assert!(!collide(&d, &Pose2::new(0.0, 0.0, 0.0), &d, &Pose2::new(3.0, 0.0, 0.0)));
    }

    #[test]
    fn shape_collides_with_itself() {
        let b = Shape::rect(0.4, 0.2);
        let p = Pose2::new(1.0, -2.0, 0.3);
        assert!(collide(&b, &p, &b, &p));
    }

    #[test]
    fn touching_counts_as_collision() {
        let d = Shape::disc(0.5);
        let b = Shape::rect(0.5, 0.5);
        assert!(collide(&d, &Pose2::new(1.0, 0.0, 0.0), &b, &Pose2::identity()));
        assert!(!collide(&d, &Pose2::new(1.0 + 1e-9, 0.0, 0.0), &b, &Pose2::identity()));
        // Two unit boxes sharing an edge.
        let u = Shape::rect(0.5, 0.5);
        assert!(collide(&u, &Pose2::identity(), &u, &Pose2::new(1.0, 0.0, 0.0)));
        assert!(!collide(&u, &Pose2::identity(), &u, &Pose2::new(1.0 + 1e-9, 0.0, 0.0)));
    }

    #[test]
    fn rotated_box_corner_contact() {
        let b = Shape::rect(0.5, 0.5);
        let diamond = Pose2::new(0.5 + 0.5 * 2f64.sqrt(), 0.0, std::f64::consts::FRAC_PI_4);
        assert!(collide(&b, &Pose2::identity(), &b, &diamond));
        let apart = diamond.translated(Vec2::new(1e-6, 0.0));
        assert!(!collide(&b, &Pose2::identity(), &b, &apart));
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        assert!(Shape::disc(0.0).validate().is_err());
        assert!(Shape::rect(1.0, -1.0).validate().is_err());
        let cw = Shape::ConvexPolygon {
            vertices: vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)],
        };
        assert_eq!(cw.validate(), Err(ShapeError::NotConvexCcw));
        let two = Shape::ConvexPolygon {
            vertices: vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0)],
        };
        assert_eq!(two.validate(), Err(ShapeError::TooFewVertices(2)));
        let tri = Shape::ConvexPolygon {
            vertices: vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
        };
        assert!(tri.validate().is_ok());
    }

    #[test]
    fn separation_of_boxes() {
        let b = Shape::rect(0.5, 0.5);
        let s = separation(&b, &Pose2::identity(), &b, &Pose2::new(3.0, 0.0, 0.0));
        assert!((s - 2.0).abs() < 1e-12);
        let s = separation(&b, &Pose2::identity(), &b, &Pose2::new(2.0, 2.0, 0.0));
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
    }

    fn shape() -> impl Strategy<Value = Shape> {
        prop_oneof![
            (0.05..2.0f64).prop_map(Shape::disc),
            (0.05..2.0f64, 0.05..2.0f64).prop_map(|(w, h)| Shape::rect(w, h)),
            (0.1..1.5f64, 3usize..8, 0.0..1.0f64).prop_map(|(r, n, phase)| {
                let vertices = (0..n)
                    .map(|i| Vec2::from_angle(phase + i as f64 * std::f64::consts::TAU / n as f64) * r)
                    .collect();
                Shape::ConvexPolygon { vertices }
            }),
        ]
    }

    fn pose() -> impl Strategy<Value = Pose2> {
        (-3.0..3.0f64, -3.0..3.0f64, -4.0..4.0f64).prop_map(|(x, y, t)| Pose2::new(x, y, t))
    }

    proptest! {
        #[test]
        fn collide_is_symmetric(a in shape(), b in shape(), pa in pose(), pb in pose()) {
            prop_assert_eq!(collide(&a, &pa, &b, &pb), collide(&b, &pb, &a, &pa));
        }

        #[test]
        fn collide_invariant_under_rigid_motion(a in shape(), b in shape(), pa in pose(), pb in pose(), t in pose()) {
            let before = collide(&a, &pa, &b, &pb);
            let after = collide(&a, &t.compose(&pa), &b, &t.compose(&pb));
            // Rigid motion perturbs coordinates by rounding; skip near-contact cases.
            let gap = separation(&a, &pa, &b, &pb);
            prop_assume!(gap.abs() > 1e-9);
            prop_assert_eq!(before, after);
        }

        #[test]
        fn separation_sign_matches_collide(a in shape(), b in shape(), pa in pose(), pb in pose()) {
            let c = collide(&a, &pa, &b, &pb);
            let s = separation(&a, &pa, &b, &pb);
            prop_assume!(s.abs() > 1e-9);
            prop_assert_eq!(c, s <= 0.0);
        }
    }
}
