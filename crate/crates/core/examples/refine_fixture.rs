//! Builds the regrasp map for a shipped fixture and refines it into a plan.
//!
//! cargo run --example refine_fixture -- tunnel 0 [rmp|rmpfix|rmpfree]
//!
//! `maze-N` names the generated maze with seed N.

use regrasp::grasp::{generate_grasps, FeasibilityParams};
use regrasp::plan::validate_plan;
use regrasp::refine::{refine, RefineConfig};
use regrasp::rmap::{find_regrasp_plans, MapConfig};
use regrasp::scene::{fixtures, CollisionWorld};
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "tunnel".into());
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let mut cfg = RefineConfig::default();
    if std::env::var_os("COMPLETE").is_some() {
        cfg.motion = regrasp::motion::MotionConfig::complete();
    }
    match args.next().as_deref() {
        None | Some("rmp") => {}
        Some("rmpfix") => cfg.update_weights = false,
        Some("rmpfree") => cfg.constrain_grasp = false,
        Some(other) => panic!("unknown method {other}"),
    }
    let scene = match name.strip_prefix("maze-") {
        Some(n) => regrasp::scene::generate_maze(n.parse().expect("maze seed"), &Default::default()).unwrap(),
        None => fixtures::by_name(&name).expect("unknown fixture"),
    };
    let t0 = Instant::now();
    let world = CollisionWorld::new(&scene, 0.05);
    let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, 8, seed).unwrap();
    let feas = FeasibilityParams {
        seed,
        ..FeasibilityParams::for_agent(scene.agent_radius)
    };
    let mut plans = find_regrasp_plans(&scene, &world, &grasps, 0.4, 0.05, &MapConfig::new(0.4, feas));
    let map_s = t0.elapsed().as_secs_f64();
    println!(
        "map: voxels tried {:?}, {} areas, {} nodes, {} edges, {} abstract paths, min regrasps {:?} ({map_s:.2}s)",
        plans.voxels_tried,
        plans.map.areas.len(),
        plans.map.nodes.len(),
        plans.map.edges.len(),
        plans.paths.len(),
        plans.map.min_regrasps(&scene, &world),
    );
    if std::env::var_os("SHOW_PATHS").is_some() {
        for p in &plans.paths {
            let seq: Vec<String> = p.nodes.iter().map(|&n| format!("{}:{}", plans.map.nodes[n].area, plans.map.nodes[n].grasp)).collect();
            println!("  path cost {:.9} regrasps {}: {}", p.cost, p.regrasps, seq.join(" "));
        }
    }
    let report = refine(&scene, &world, &grasps, &mut plans.map, cfg);
    println!("refine: {} attempts ({:.2}s)", report.attempts, t0.elapsed().as_secs_f64() - map_s);
    let show = |n: usize| {
        let node = plans.map.nodes[n];
        format!("(area {} grasp {} d={:.3})", node.area, node.grasp, plans.map.dist(n))
    };
    for a in &report.log {
        match a {
            regrasp::refine::Attempt::Step { entry, from, to, failure } => {
                println!("  step #{entry}: {} -> {} {failure:?}", show(*from), show(*to))
            }
            other => println!("  {other:?}"),
        }
    }
    match report.result {
        Ok(plan) => {
            if std::env::var_os("SHOW_PLAN").is_some() {
                for step in &plan.steps {
                    println!("  {step:?}");
                }
            }
            println!("plan: {} regrasps, cost {:.2} m", plan.regrasps(), plan.cost());
            println!("replay: {:?}", validate_plan(&plan, &scene, &world, &grasps, 0.0125));
        }
        Err(e) => println!("failed: {e}"),
    }
}
