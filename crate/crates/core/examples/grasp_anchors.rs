//! Synthesizes grasp anchors around the stick and prints them.
//!
//! ```text
//! cargo run --example grasp_anchors [-- K SEED]
//! ```

use regrasp::geometry::Shape;
use regrasp::grasp::generate_grasps;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let grasps = generate_grasps(&Shape::rect(0.5, 0.1), 0.15, k, seed)?;
    for a in &grasps.anchors {
        let p = a.pose.position();
        println!("{:>2}  x {:+.3}  y {:+.3}  facing {:+.2} rad", a.id, p.x, p.y, a.pose.theta);
    }
    Ok(())
}
