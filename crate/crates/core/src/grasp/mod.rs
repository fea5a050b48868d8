//! Grasp anchors around the object and their perturbation-based feasibility.
//!
//! An anchor is the agent pose in the object frame, touching the object
//! boundary. Anchors come from sampling many contact poses and clustering them;
//! [`GraspScorer`] then rates an anchor at a given object pose by how many
//! jittered agent placements around it are collision-free.

mod feasibility;
mod kmeans;

pub use feasibility::{stream_seed, FeasibilityParams, GraspScorer, PoseEval, Signature};

use crate::geometry::{Pose2, Shape, ShapeError, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Contact tolerance: anchors sit `CONTACT_TOL / 2` outside the object.
pub const CONTACT_TOL: f64 = 1e-3;
/// Signatures are stored as 64-bit masks.
pub const MAX_GRASPS: usize = 64;
/// Contact samples drawn per requested anchor.
pub const SAMPLES_PER_ANCHOR: usize = 100;

#[derive(Debug, Error)]
pub enum GraspError {
    #[error("grasp count must be in 1..={MAX_GRASPS}, got {0}")]
    BadCount(usize),
    #[error("agent radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("object shape: {0}")]
    Shape(#[from] ShapeError),
    #[error("insufficient grasp diversity: {distinct} distinct contact samples for {k} grasps")]
    InsufficientDiversity { distinct: usize, k: usize },
    #[error("grasp file {path}: {message}")]
    File { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspAnchor {
    pub id: usize,
    /// Agent pose in the object frame; `theta` faces the object.
    pub pose: Pose2,
}

impl GraspAnchor {
    pub fn world_position(&self, object: &Pose2) -> Vec2 {
        object.transform_point(self.pose.position())
    }

    pub fn agent_pose(&self, object: &Pose2) -> Pose2 {
        object.compose(&self.pose)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspSet {
    pub agent_radius: f64,
    pub object_shape: Shape,
    pub anchors: Vec<GraspAnchor>,
}

impl GraspSet {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Distance from the object boundary to the agent disc, in object frame.
    pub fn contact_gap(&self, local: Vec2) -> f64 {
        self.object_shape.place(&Pose2::identity()).signed_distance(local) - self.agent_radius
    }

    /// Whether `anchor` touches the object within the contact tolerance.
    pub fn in_contact(&self, anchor: &GraspAnchor) -> bool {
        self.contact_gap(anchor.pose.position()).abs() <= CONTACT_TOL
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("grasp set serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GraspError> {
        let set: GraspSet = serde_json::from_str(text).map_err(|e| GraspError::File {
            path: "<string>".into(),
            message: e.to_string(),
        })?;
        set.object_shape.validate()?;
        if !(set.agent_radius > 0.0) {
            return Err(GraspError::BadRadius(set.agent_radius));
        }
        if set.anchors.is_empty() || set.anchors.len() > MAX_GRASPS {
            return Err(GraspError::BadCount(set.anchors.len()));
        }
        if let Some((i, _)) = set.anchors.iter().enumerate().find(|(i, a)| a.id != *i) {
            return Err(GraspError::File {
                path: "<string>".into(),
                message: format!("anchor at index {i} has id {}", set.anchors[i].id),
            });
        }
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraspError> {
        let path = path.as_ref();
        let file_err = |message: String| GraspError::File {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
        Self::from_json(&text).map_err(|e| match e {
            GraspError::File { message, .. } => file_err(message),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GraspError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| GraspError::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Point on the ray from the object center along `direction` where the agent
/// disc clears the object boundary by `CONTACT_TOL / 2`. Object frame.
pub fn contact_point(shape: &Shape, agent_radius: f64, direction: Vec2) -> Vec2 {
    let d = if direction.norm() > 0.0 { direction.normalized() } else { Vec2::new(1.0, 0.0) };
    let placed = shape.place(&Pose2::identity());
    let target = agent_radius + CONTACT_TOL / 2.0;
    let (mut lo, mut hi) = (0.0, shape.circumradius() + target + 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if placed.signed_distance(d * mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    d * hi
}

/// Moves an object-frame agent position that sits closer than the contact shell
/// radially out onto it; positions already outside are returned unchanged.
pub fn settle(shape: &Shape, agent_radius: f64, local: Vec2) -> Vec2 {
    let placed = shape.place(&Pose2::identity());
    if placed.signed_distance(local) >= agent_radius + CONTACT_TOL / 2.0 {
        local
    } else {
        contact_point(shape, agent_radius, local)
    }
}

pub fn generate_grasps(object_shape: &Shape, agent_radius: f64, k: usize, seed: u64) -> Result<GraspSet, GraspError> {
    generate_grasps_with(object_shape, agent_radius, k, SAMPLES_PER_ANCHOR * k, seed)
}

/// Samples `n_samples` agent positions on an annulus around the object,
/// projects each radially to contact, clusters contact poses (position plus
/// scaled contact normal) into `k` groups and keeps the sample nearest each
/// centroid. Anchors are ordered by polar angle of their position.
pub fn generate_grasps_with(
    object_shape: &Shape,
    agent_radius: f64,
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<GraspSet, GraspError> {
    if k == 0 || k > MAX_GRASPS {
        return Err(GraspError::BadCount(k));
    }
    if !(agent_radius.is_finite() && agent_radius > 0.0) {
        return Err(GraspError::BadRadius(agent_radius));
    }
    object_shape.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let placed = object_shape.place(&Pose2::identity());
    let r_in = object_shape.inradius() + agent_radius;
    let r_out = object_shape.circumradius() + 2.0 * agent_radius;
    let scale = object_shape.circumradius() + agent_radius;

    let mut contacts = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let rho = (r_in * r_in + rng.gen::<f64>() * (r_out * r_out - r_in * r_in)).sqrt();
        let phi = rng.gen::<f64>() * std::f64::consts::TAU;
        let p = contact_point(object_shape, agent_radius, Vec2::from_angle(phi) * rho);
        let gap = placed.signed_distance(p) - agent_radius;
        if gap.abs() > CONTACT_TOL {
            continue;
        }
        let normal = (p - placed.closest_boundary_point(p)).normalized();
        contacts.push((p, normal));
    }

    let mut keys: Vec<(i64, i64)> = contacts
        .iter()
        .map(|(p, _)| ((p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    if keys.len() < k {
        return Err(GraspError::InsufficientDiversity {
            distinct: keys.len(),
            k,
        });
    }

    let features: Vec<Vec<f64>> = contacts
        .iter()
        .map(|(p, n)| vec![p.x, p.y, scale * n.x, scale * n.y])
        .collect();
    let (centroids, labels) = kmeans::kmeans(&features, k, &mut rng);
    let mut picks = Vec::with_capacity(k);
    for (c, centroid) in centroids.iter().enumerate() {
        let best = features
            .iter()
            .enumerate()
            .filter(|(i, _)| labels[*i] == c)
            .map(|(i, f)| (i, f.iter().zip(centroid).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((i, _)) = best {
            picks.push(i);
        }
    }
    picks.sort_unstable();
    picks.dedup();
    if picks.len() < k {
        return Err(GraspError::InsufficientDiversity {
            distinct: picks.len(),
            k,
        });
    }
    let mut anchors: Vec<(f64, Pose2)> = picks
        .into_iter()
        .map(|i| {
            let (p, n) = contacts[i];
            (p.angle(), Pose2::from_parts(p, (-n).angle()))
        })
        .collect();
    anchors.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(GraspSet {
        agent_radius,
        object_shape: object_shape.clone(),
        anchors: anchors
            .into_iter()
            .enumerate()
            .map(|(id, (_, pose))| GraspAnchor { id, pose })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn stick() -> Shape {
        Shape::rect(0.5, 0.1)
    }

    #[test]
    fn stick_with_24_anchors_covers_the_boundary() {
        let g = generate_grasps(&stick(), 0.15, 24, 1).unwrap();
        assert_eq!(g.len(), 24);
        assert!(g.anchors.iter().all(|a| g.in_contact(a)));
        // Every side of the stick carries at least one anchor.
        let side = |a: &GraspAnchor| {
            let n = -Vec2::from_angle(a.pose.theta);
            if n.x.abs() > n.y.abs() { if n.x > 0.0 { 0 } else { 2 } } else if n.y > 0.0 { 1 } else { 3 }
        };
        let mut seen = [false; 4];
        for a in &g.anchors {
            seen[side(a)] = true;
        }
        assert_eq!(seen, [true; 4]);
        for (i, a) in g.anchors.iter().enumerate() {
            assert_eq!(a.id, i);
            for b in &g.anchors[i + 1..] {
                assert!(a.pose.position().dist(b.pose.position()) > 1e-3);
            }
        }
    }

    #[test]
    fn single_anchor_on_a_disc_sits_at_contact_distance() {
        let g = generate_grasps(&Shape::disc(0.4), 0.15, 1, 9).unwrap();
        let d = g.anchors[0].pose.position().norm();
        assert!((d - 0.55).abs() <= CONTACT_TOL, "{d}");
    }

    #[test]
    fn anchors_face_the_object() {
        let g = generate_grasps(&stick(), 0.15, 8, 2).unwrap();
        for a in &g.anchors {
            let ahead = a.pose.transform_point(Vec2::new(0.2, 0.0));
            assert!(g.contact_gap(ahead) < g.contact_gap(a.pose.position()));
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = generate_grasps(&stick(), 0.15, 8, 5).unwrap();
        let b = generate_grasps(&stick(), 0.15, 8, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_samples_is_reported() {
        let err = generate_grasps_with(&stick(), 0.15, 8, 5, 0).unwrap_err();
        assert!(err.to_string().contains("insufficient grasp diversity"), "{err}");
        assert!(matches!(generate_grasps(&stick(), 0.15, 0, 0), Err(GraspError::BadCount(0))));
    }

    /// Oracle: exact Lloyd iterations on a dense, evenly spaced contact set,
    /// started from the side midpoints.
    fn dense_square_oracle(half: f64, r: f64) -> Vec<Vec2> {
        let shape = Shape::rect(half, half);
        let n = 4000;
        let pts: Vec<(Vec2, Vec2)> = (0..n)
            .map(|i| {
                let p = contact_point(&shape, r, Vec2::from_angle(-PI + 2.0 * PI * i as f64 / n as f64));
                let placed = shape.place(&Pose2::identity());
                (p, (p - placed.closest_boundary_point(p)).normalized())
            })
            .collect();
        let scale = shape.circumradius() + r;
        let feat = |(p, n): &(Vec2, Vec2)| [p.x, p.y, scale * n.x, scale * n.y];
        let d = half + r;
        let mut cents: Vec<[f64; 4]> = [(d, 0.0), (0.0, d), (-d, 0.0), (0.0, -d)]
            .iter()
            .map(|&(x, y)| {
                let n = Vec2::new(x, y).normalized();
                [x, y, scale * n.x, scale * n.y]
            })
            .collect();
        for _ in 0..200 {
            let mut sums = vec![[0.0; 4]; 4];
            let mut counts = [0usize; 4];
            for p in &pts {
                let f = feat(p);
                let c = (0..4)
                    .min_by(|&a, &b| {
                        let da: f64 = (0..4).map(|i| (f[i] - cents[a][i]).powi(2)).sum();
                        let db: f64 = (0..4).map(|i| (f[i] - cents[b][i]).powi(2)).sum();
                        da.total_cmp(&db)
                    })
                    .unwrap();
                counts[c] += 1;
                for i in 0..4 {
                    sums[c][i] += f[i];
                }
            }
            for c in 0..4 {
                for i in 0..4 {
                    cents[c][i] = sums[c][i] / counts[c] as f64;
                }
            }
        }
        cents.iter().map(|c| Vec2::new(c[0], c[1])).collect()
    }

    #[test]
    fn four_anchors_on_a_square_land_near_side_midpoints() {
        let (half, r) = (0.4, 0.15);
        let oracle = dense_square_oracle(half, r);
        let d = half + r;
        // 10% of the side length.
        let tol = 0.1 * 2.0 * half;
        for (o, m) in oracle.iter().zip([(d, 0.0), (0.0, d), (-d, 0.0), (0.0, -d)]) {
            assert!(o.dist(Vec2::new(m.0, m.1)) < tol, "oracle centroid {o:?}");
        }
        for seed in 0..10 {
            let g = generate_grasps(&Shape::rect(half, half), r, 4, seed).unwrap();
            let mut hit = [false; 4];
            for a in &g.anchors {
                let p = a.pose.position();
                let (i, best) = oracle
                    .iter()
                    .map(|o| o.dist(p))
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                assert!(best < tol, "seed {seed}: anchor {p:?} far from every oracle centroid");
                hit[i] = true;
            }
            assert_eq!(hit, [true; 4], "seed {seed}");
        }
    }

    #[test]
    fn json_round_trip() {
        let g = generate_grasps(&stick(), 0.15, 8, 3).unwrap();
        let back = GraspSet::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        let text = g.to_json().replace("\"id\": 3", "\"id\": 9");
        assert!(GraspSet::from_json(&text).is_err());
    }
}
