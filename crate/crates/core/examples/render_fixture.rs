//! Writes SVGs of a fixture, its regrasp map and (when one is found) the RMP
//! plan into a directory.
//!
//! cargo run --release --example render_fixture -- tunnel 0 out/

use regrasp::bench::{run_method, Method, PlannerParams};
use regrasp::grasp::generate_grasps;
use regrasp::rmap::{find_regrasp_plans, MapConfig};
use regrasp::scene::{fixtures, generate_maze, CollisionWorld};
use regrasp::svg;
use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "tunnel".into());
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let dir = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let scene = match name.strip_prefix("maze-") {
        Some(n) => generate_maze(n.parse().expect("maze seed"), &Default::default()).unwrap(),
        None => fixtures::by_name(&name).expect("unknown fixture"),
    };
    let params = PlannerParams::default();
    let world = CollisionWorld::new(&scene, params.esdf_cell);
    let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, params.k, seed).unwrap();
    let cfg = MapConfig::new(params.voxel, params.feasibility(&scene, seed));
    let plans = find_regrasp_plans(&scene, &world, &grasps, params.voxel, params.vmin, &cfg);
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join(format!("{name}.svg")), svg::scene_svg(&scene)).unwrap();
    std::fs::write(dir.join(format!("{name}-map.svg")), svg::map_svg(&plans.map.export(), Some(&scene))).unwrap();
    let out = run_method(&scene, Method::Rmp, seed, &params);
    if let Some(plan) = &out.plan {
        std::fs::write(dir.join(format!("{name}-plan.svg")), svg::plan_svg(plan, &scene, Some(&out.grasps), 0.5)).unwrap();
    }
    println!("success {}", out.row.success);
}
