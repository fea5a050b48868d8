//! Runs a sampling baseline on a shipped fixture.
//!
//! cargo run --example baseline_fixture -- cage 0 rndh 100

use regrasp::baseline::{plan_baseline, BaselineConfig, Sampler};
use regrasp::grasp::generate_grasps;
use regrasp::plan::validate_plan;
use regrasp::scene::{fixtures, CollisionWorld};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("open-room", String::as_str);
    let seed: u64 = args.get(1).map_or(0, |s| s.parse().expect("seed"));
    let sampler = match args.get(2).map_or("rnd", String::as_str) {
        "rnd" => Sampler::Uniform,
        "rndh" => Sampler::Visible,
        other => panic!("unknown baseline {other}"),
    };
    let budget: usize = args.get(3).map_or(200, |s| s.parse().expect("budget"));
    let scene = fixtures::by_name(name).expect("unknown fixture");
    let world = CollisionWorld::new(&scene, 0.05);
    let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, 8, seed).unwrap();
    let t0 = Instant::now();
    let report = plan_baseline(&scene, &world, &grasps, BaselineConfig::new(sampler, budget, seed, scene.agent_radius));
    let connected = report.samples.iter().filter(|s| s.connected).count();
    print!(
        "{} attempts, {} samples ({connected} connected), tree {} ({:.2}s): ",
        report.attempts,
        report.samples.len(),
        report.tree_size,
        t0.elapsed().as_secs_f64()
    );
    match report.result {
        Ok(plan) => println!(
            "{} regrasps, cost {:.2} m, replay {:?}",
            plan.regrasps(),
            plan.cost(),
            validate_plan(&plan, &scene, &world, &grasps, 0.0125)
        ),
        Err(e) => println!("failed: {e}"),
    }
}
