//! Prints a fixture's regrasp map as text, one character per voxel.
//!
//! cargo run --example map_ascii -- tunnel 0.1 [seed] [grasp]
//!
//! Without a grasp id, areas are lettered in id order (`#` = occupied);
//! with one, `+` marks voxels where that grasp is in the signature.

use regrasp::grasp::{generate_grasps, FeasibilityParams};
use regrasp::rmap::{build_map, MapConfig};
use regrasp::scene::{fixtures, CollisionWorld};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("tunnel", String::as_str);
    let v: f64 = args.get(1).map_or(0.2, |s| s.parse().expect("voxel size"));
    let seed: u64 = args.get(2).map_or(0, |s| s.parse().expect("seed"));
    let grasp: Option<usize> = args.get(3).map(|s| s.parse().expect("grasp id"));
    let scene = fixtures::by_name(name).expect("unknown fixture");
    let world = CollisionWorld::new(&scene, 0.05);
    let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, 8, seed).unwrap();
    let feas = FeasibilityParams {
        seed,
        ..FeasibilityParams::for_agent(scene.agent_radius)
    };
    let map = build_map(&scene, &world, &grasps, &MapConfig::new(v, feas));
    let letters: Vec<char> = ('a'..='z').chain('A'..='Z').chain('0'..='9').collect();
    let d = map.grid.dims;
    for iy in (0..d.ny).rev() {
        let row: String = (0..d.nx)
            .map(|ix| {
                let i = d.index(ix, iy, 0);
                let vox = &map.grid.voxels[i];
                match (grasp, map.voxel_area[i]) {
                    (_, None) => '#',
                    (Some(g), Some(_)) => {
                        if vox.signature.contains(g) {
                            '+'
                        } else {
                            '.'
                        }
                    }
                    (None, Some(a)) => letters[a % letters.len()],
                }
            })
            .collect();
        println!("{row}");
    }
    for a in &map.areas {
        let best = map
            .area_nodes(a.id)
            .into_iter()
            .map(|n| map.dist(n))
            .fold(f64::INFINITY, f64::min);
        println!(
            "{} area {:3}: {:4} voxels, signature {}, dist {best:.3}",
            letters[a.id % letters.len()],
            a.id,
            a.voxels.len(),
            a.signature.bit_string(grasps.len())
        );
    }
    println!("start area {:?}", map.locate_near(&scene.object_start, &world, &scene.object_shape));
}
