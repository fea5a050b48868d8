use super::{settle, GraspSet, CONTACT_TOL};
use crate::geometry::{Placed, Pose2, Vec2};
use crate::scene::CollisionWorld;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityParams {
    /// Perturbation samples per score.
    pub samples: usize,
    /// Radius of the positional perturbation disc (meters).
    pub eps_pert: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl FeasibilityParams {
    pub fn for_agent(agent_radius: f64) -> Self {
        Self {
            samples: 16,
            eps_pert: 0.5 * agent_radius,
            alpha: 0.5,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.samples == 0 {
            return Err("sample count must be at least 1".into());
        }
        if !(self.eps_pert >= 0.0 && self.eps_pert.is_finite()) {
            return Err(format!("perturbation radius must be non-negative, got {}", self.eps_pert));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        Ok(())
    }
}

impl Default for FeasibilityParams {
    fn default() -> Self {
        Self::for_agent(0.15)
    }
}

/// Bit `k` set iff grasp `k` is usable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature(pub u64);

impl Signature {
    pub const EMPTY: Signature = Signature(0);

    pub fn contains(self, k: usize) -> bool {
        self.0 >> k & 1 == 1
    }

    pub fn with(self, k: usize) -> Signature {
        Signature(self.0 | 1 << k)
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&k| self.contains(k))
    }

    /// `'1'`/`'0'` per grasp, grasp 0 first.
    pub fn bit_string(self, k: usize) -> String {
        (0..k).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// Scores of every grasp at one object pose.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseEval {
    /// The object itself collides (or leaves the bounds); all scores are zero.
    pub occupied: bool,
    pub phi: Vec<f64>,
}

impl PoseEval {
    pub fn signature(&self, alpha: f64) -> Signature {
        if self.occupied {
            return Signature::EMPTY;
        }
        self.phi
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= alpha)
            .fold(Signature::EMPTY, |s, (k, _)| s.with(k))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the sample stream for one (seed, key, grasp) triple, independent of
/// evaluation order.
pub fn stream_seed(seed: u64, key: u64, grasp: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ key) ^ grasp as u64)
}

/// Rates grasps at object poses against one scene.
///
/// A sample is free when the agent disc, jittered uniformly within `eps_pert`
/// of the anchor and pushed back onto the contact shell if the jitter drove it
/// into the object, clears every obstacle and the scene bounds.
pub struct GraspScorer<'a> {
    world: &'a CollisionWorld,
    grasps: &'a GraspSet,
    params: FeasibilityParams,
}

impl<'a> GraspScorer<'a> {
    pub fn new(world: &'a CollisionWorld, grasps: &'a GraspSet, params: FeasibilityParams) -> Self {
        Self { world, grasps, params }
    }

    pub fn params(&self) -> &FeasibilityParams {
        &self.params
    }

    pub fn grasps(&self) -> &GraspSet {
        self.grasps
    }

    pub fn world(&self) -> &CollisionWorld {
        self.world
    }

    pub fn object_free(&self, pose: &Pose2) -> bool {
        self.world.shape_free(&self.grasps.object_shape, pose, 0.0)
    }

    /// Feasibility of grasp `k` at `pose`, assuming the object itself is free.
    /// `key` selects the sample stream (typically a voxel index).
    pub fn phi_unchecked(&self, pose: &Pose2, k: usize, key: u64) -> f64 {
        let anchor = self.grasps.anchors[k].pose.position();
        let r = self.grasps.agent_radius;
        let object = self.grasps.object_shape.place(pose);
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(self.params.seed, key, k));
        let b = self.params.samples;
        let free = (0..b)
            .filter(|_| {
                let rho = self.params.eps_pert * rng.gen::<f64>().sqrt();
                let ang = rng.gen::<f64>() * std::f64::consts::TAU;
                let local = settle(&self.grasps.object_shape, r, anchor + Vec2::from_angle(ang) * rho);
                let p = pose.transform_point(local);
                psi(self.world, &object, p, r)
            })
            .count();
        free as f64 / b as f64
    }

    pub fn phi(&self, pose: &Pose2, k: usize, key: u64) -> f64 {
        if self.object_free(pose) {
            self.phi_unchecked(pose, k, key)
        } else {
            0.0
        }
    }

    pub fn evaluate(&self, pose: &Pose2, key: u64) -> PoseEval {
        let k = self.grasps.len();
        if !self.object_free(pose) {
            return PoseEval {
                occupied: true,
                phi: vec![0.0; k],
            };
        }
        PoseEval {
            occupied: false,
            phi: (0..k).map(|g| self.phi_unchecked(pose, g, key)).collect(),
        }
    }

    pub fn signature(&self, pose: &Pose2, key: u64) -> (bool, Signature) {
        let e = self.evaluate(pose, key);
        (e.occupied, e.signature(self.params.alpha))
    }
}

fn psi(world: &CollisionWorld, object: &Placed, p: Vec2, r: f64) -> bool {
    object.signed_distance(p) >= r - CONTACT_TOL && world.disc_free(p, r, 0.0)
}
