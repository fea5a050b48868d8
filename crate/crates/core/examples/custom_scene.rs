//! Plans on a scene built in code. The stick lies in a floor pocket that only
//! the top grasp reaches, and a lengthwise-only slot in a wall separates it
//! from the goal, so one regrasp is needed. Prints the plan and replays it.
//!
//! cargo run --release --example custom_scene [-- SEED]

use regrasp::geometry::{Pose2, Rect, Shape, Vec2};
use regrasp::grasp::{generate_grasps, FeasibilityParams};
use regrasp::plan::{validate_plan, Step};
use regrasp::refine::{refine, RefineConfig};
use regrasp::rmap::{find_regrasp_plans, MapConfig};
use regrasp::scene::{CollisionWorld, GoalRegion, Obstacle, Scene};

fn wall(x0: f64, y0: f64, x1: f64, y1: f64) -> Obstacle {
    Obstacle {
        shape: Shape::rect((x1 - x0) / 2.0, (y1 - y0) / 2.0),
        pose: Pose2::new((x0 + x1) / 2.0, (y0 + y1) / 2.0, 0.0),
    }
}

fn main() {
    let seed: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    let slot = 0.46;
    let scene = Scene {
        name: "slot-wall".into(),
        bounds: Rect::new(Vec2::ZERO, Vec2::new(8.0, 6.0)),
        obstacles: vec![
            // Pocket sides, 6 cm from the stick ends: too tight for the agent.
            wall(0.0, 0.0, 1.44, 0.6),
            wall(2.56, 0.0, 3.95, 0.6),
            wall(3.95, 0.0, 4.05, 3.0 - slot / 2.0),
            wall(3.95, 3.0 + slot / 2.0, 4.05, 6.0),
        ],
        object_shape: Shape::rect(0.5, 0.1),
        // Headings are fixed, so the stick must already lie along the slot.
        object_start: Pose2::new(2.0, 0.25, 0.0),
        agent_radius: 0.15,
        agent_start: Vec2::new(1.0, 2.0),
        goal: GoalRegion::new(Rect::from_center(Vec2::new(6.5, 3.0), 0.3, 0.3)),
    };
    scene.validate().expect("scene is consistent");

    let world = CollisionWorld::new(&scene, 0.05);
    let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, 8, seed).expect("grasps");
    let fp = FeasibilityParams { seed, ..FeasibilityParams::for_agent(scene.agent_radius) };
    let mut plans = find_regrasp_plans(&scene, &world, &grasps, 0.4, 0.05, &MapConfig::new(0.4, fp));
    println!(
        "map at voxel {:?}: {} areas, {} abstract paths",
        plans.voxels_tried.last(),
        plans.map.areas.len(),
        plans.paths.len()
    );

    let report = refine(&scene, &world, &grasps, &mut plans.map, RefineConfig::default());
    let plan = match report.result {
        Ok(p) => p,
        Err(e) => {
            println!("no plan after {} attempts: {e}", report.attempts);
            std::process::exit(2);
        }
    };
    println!("plan after {} attempts: {} regrasps, {:.2} m", report.attempts, plan.regrasps(), plan.cost());
    for step in &plan.steps {
        match step {
            Step::Transit { path } => println!("  transit  {} waypoints", path.len()),
            Step::Pick { grasp, object } => println!("  pick     grasp {grasp} at ({:.2}, {:.2})", object.x, object.y),
            Step::Transfer { grasp, path } => {
                let end = path.last().expect("transfers are non-empty");
                println!("  transfer grasp {grasp} to ({:.2}, {:.2}, {:.0} deg)", end.x, end.y, end.theta.to_degrees());
            }
            Step::Place { object } => println!("  place    at ({:.2}, {:.2})", object.x, object.y),
        }
    }
    match validate_plan(&plan, &scene, &world, &grasps, 0.0125) {
        Ok(()) => println!("replay: valid"),
        Err(v) => println!("replay: {v}"),
    }
}
