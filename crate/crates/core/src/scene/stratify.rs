use super::Scene;
use std::collections::BTreeMap;

/// Anything that can report the fewest regrasps needed to solve a scene at
/// the abstract level, or `None` when no abstract path exists.
pub trait RegraspDepth {
    fn min_regrasps(&self, scene: &Scene) -> Option<usize>;
}

impl<F: Fn(&Scene) -> Option<usize>> RegraspDepth for F {
    fn min_regrasps(&self, scene: &Scene) -> Option<usize> {
        self(scene)
    }
}

/// Scenes grouped by the regrasp count of their minimum-regrasp abstract path.
#[derive(Debug, Clone, Default)]
pub struct Strata {
    pub buckets: BTreeMap<usize, Vec<Scene>>,
    pub unsolvable: Vec<Scene>,
}

impl Strata {
    pub fn bucket(&self, k: usize) -> &[Scene] {
        self.buckets.get(&k).map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn stratify_by_regrasps<D: RegraspDepth + ?Sized>(scenes: impl IntoIterator<Item = Scene>, planner: &D) -> Strata {
    let mut strata = Strata::default();
    for scene in scenes {
        match planner.min_regrasps(&scene) {
            Some(k) => strata.buckets.entry(k).or_default().push(scene),
            None => strata.unsolvable.push(scene),
        }
    }
    strata
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::fixtures;

    #[test]
    fn buckets_follow_the_reported_depth() {
        let scenes = vec![fixtures::open_room(), fixtures::tunnel(), fixtures::sealed()];
        let depth = |s: &Scene| match s.name.as_str() {
            "open-room" => Some(0),
            "tunnel" => Some(1),
            _ => None,
        };
        let strata = stratify_by_regrasps(scenes, &depth);
        assert_eq!(strata.bucket(0).len(), 1);
        assert_eq!(strata.bucket(1)[0].name, "tunnel");
        assert_eq!(strata.unsolvable[0].name, "sealed");
        assert!(strata.bucket(2).is_empty());
    }
}
