//! Buckets generated mazes by the regrasp count of their shortest abstract
//! path, then runs methods on each bucket.
//!
//! cargo run --release --example maze_strata -- [scenes=60] [methods=rmp,rmpfix,rmpfree,rnd,rndh] [cols] [rows]

use regrasp::bench::{aggregate, render_tables, run_matrix, Method, PlannerParams};
use regrasp::scene::{generate_maze, stratify_by_regrasps, MazeParams};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: u64 = args.first().map_or(60, |s| s.parse().expect("scene count"));
    let methods = Method::parse_list(args.get(1).map_or("rmp,rmpfix,rmpfree,rnd,rndh", String::as_str)).unwrap();
    let mut mp = MazeParams::default();
    if let Some(c) = args.get(2) {
        mp.cols = c.parse().unwrap();
    }
    if let Some(r) = args.get(3) {
        mp.rows = r.parse().unwrap();
    }
    let params = PlannerParams::default();
    let scenes: Vec<_> = (0..n).map(|s| generate_maze(s, &mp).unwrap()).collect();
    let depth = regrasp::bench::map_depth(params);
    let strata = stratify_by_regrasps(scenes, &depth);
    for (k, b) in &strata.buckets {
        println!("k={k}: {} scenes", b.len());
    }
    println!("unsolvable: {}", strata.unsolvable.len());
    let mut rows = Vec::new();
    for (k, bucket) in &strata.buckets {
        for out in run_matrix(bucket, &methods, &[0], &params) {
            rows.push((format!("k{k}"), out.row));
        }
    }
    let only: Vec<_> = rows.iter().map(|(_, r)| r.clone()).collect();
    let set = |r: &regrasp::bench::BenchResult| rows.iter().find(|(_, x)| x == r).unwrap().0.clone();
    print!("{}", render_tables(&aggregate(&only, set)));
}
