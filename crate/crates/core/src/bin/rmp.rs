//! `rmp`: grasp synthesis, regrasp maps, planning and benchmarks from the
//! command line.
//!
//! Exit codes: 0 success, 2 planning failure, 64 usage error, 66 unreadable
//! or unwritable file.

use clap::{Args, Parser, Subcommand};
use regrasp::bench::{aggregate, read_csv, render_tables, run_matrix, run_method, write_csv, Method, PlannerParams};
use regrasp::grasp::{generate_grasps, GraspSet};
use regrasp::plan::Plan;
use regrasp::rmap::{find_regrasp_plans, MapConfig, MapExport};
use regrasp::scene::{fixtures, generate_maze, load_scene, save_scene, CollisionWorld, MazeParams, Scene};
use regrasp::svg;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rmp", version, about = "Regrasp-map pick-and-place planner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize grasp anchors for a scene's object.
    Grasps {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the regrasp map, refining the voxel size until a path exists.
    /// Writes the map JSON and an SVG next to it.
    Map {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        grasps: PathBuf,
        #[arg(long, default_value_t = 0.4)]
        voxel: f64,
        #[arg(long, default_value_t = 0.05)]
        vmin: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Seed of the feasibility samples.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan with one method. Writes the plan JSON and an SVG next to it.
    Plan {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value = "rmp")]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        planner: PlannerArgs,
        /// Without it the plan JSON goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every method on every scene in a directory for seeds 0..N.
    Bench {
        /// Directory of scene JSON files.
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value = "rmp,rmpfix,rmpfree,rnd,rndh")]
        methods: String,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[command(flatten)]
        planner: PlannerArgs,
        /// Write zeros for all timings so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a scene, grasp set, map, plan or benchmark CSV to SVG (CSV:
    /// prints the tables).
    Viz {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scene for plans (required) and maps (outline).
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Grasps for drawing the agent along a plan.
        #[arg(long)]
        grasps: Option<PathBuf>,
    },
    /// Write scene files: the authored fixtures and/or random mazes.
    Scenes {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        fixtures: bool,
        /// Number of mazes, seeded 0..N.
        #[arg(long, default_value_t = 0)]
        mazes: u64,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        #[arg(long, default_value_t = 3)]
        rows: usize,
    },
}

#[derive(Args)]
struct PlannerArgs {
    /// Sub-problem attempts per run.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, default_value_t = 8)]
    k: usize,
}

impl PlannerArgs {
    fn params(&self) -> PlannerParams {
        PlannerParams {
            budget: self.budget,
            k: self.k,
            ..PlannerParams::default()
        }
    }
}

enum Failure {
    Usage(String),
    Io(String),
    Planning(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Io(_) => 66,
            Failure::Planning(_) => 2,
        }
    }
}

type Outcome = Result<(), Failure>;

fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read_scene(path: &Path) -> Result<Scene, Failure> {
    load_scene(path).map_err(|e| Failure::Io(e.to_string()))
}

fn read_grasps(path: &Path) -> Result<GraspSet, Failure> {
    GraspSet::load(path).map_err(|e| Failure::Io(e.to_string()))
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| io(path, e))
}

fn svg_beside(path: &Path) -> PathBuf {
    path.with_extension("svg")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let result = match cli.cmd {
        Cmd::Grasps { scene, k, seed, out } => cmd_grasps(&scene, k, seed, &out),
        Cmd::Map {
            scene,
            grasps,
            voxel,
            vmin,
            alpha,
            seed,
            out,
        } => cmd_map(&scene, &grasps, voxel, vmin, alpha, seed, &out),
        Cmd::Plan {
            scene,
            method,
            seed,
            planner,
            out,
        } => cmd_plan(&scene, &method, seed, &planner, out.as_deref()),
        Cmd::Bench {
            set,
            methods,
            seeds,
            planner,
            no_timing,
            out,
        } => cmd_bench(&set, &methods, seeds, &planner, no_timing, &out),
        Cmd::Viz { input, out, scene, grasps } => cmd_viz(&input, out.as_deref(), scene.as_deref(), grasps.as_deref()),
        Cmd::Scenes {
            dir,
            fixtures,
            mazes,
            cols,
            rows,
        } => cmd_scenes(&dir, fixtures, mazes, cols, rows),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Io(m) => eprintln!("i/o error: {m}"),
                Failure::Planning(m) => eprintln!("planning failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn cmd_grasps(scene: &Path, k: usize, seed: u64, out: &Path) -> Outcome {
    let scene = read_scene(scene)?;
    let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, k, seed).map_err(|e| Failure::Usage(e.to_string()))?;
    grasps.save(out).map_err(|e| Failure::Io(e.to_string()))?;
    println!("{} grasps written to {}", grasps.len(), out.display());
    Ok(())
}

fn cmd_map(scene_path: &Path, grasps: &Path, voxel: f64, vmin: f64, alpha: f64, seed: u64, out: &Path) -> Outcome {
    if !(voxel > vmin && vmin > 0.0) {
        return Err(Failure::Usage(format!("need voxel > vmin > 0, got {voxel} and {vmin}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Failure::Usage(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let scene = read_scene(scene_path)?;
    let grasps = read_grasps(grasps)?;
    let params = PlannerParams { alpha, ..PlannerParams::default() };
    let world = CollisionWorld::new(&scene, params.esdf_cell);
    let cfg = MapConfig::new(voxel, params.feasibility(&scene, seed));
    let plans = find_regrasp_plans(&scene, &world, &grasps, voxel, vmin, &cfg);
    let export = plans.map.export();
    write(out, &export.to_json())?;
    write(&svg_beside(out), &svg::map_svg(&export, Some(&scene)))?;
    let best = plans.paths.iter().map(|p| p.regrasps).min();
    println!(
        "voxels tried {:?}: {} areas, {} nodes, {} edges, {} abstract paths{}",
        plans.voxels_tried,
        export.areas.len(),
        export.nodes.len(),
        export.edges.len(),
        plans.paths.len(),
        best.map_or(String::new(), |r| format!(", fewest regrasps {r}"))
    );
    Ok(())
}

fn cmd_plan(scene_path: &Path, method: &str, seed: u64, planner: &PlannerArgs, out: Option<&Path>) -> Outcome {
    let method: Method = method.parse().map_err(|e: regrasp::bench::UnknownMethod| Failure::Usage(e.to_string()))?;
    let scene = read_scene(scene_path)?;
    let run = run_method(&scene, method, seed, &planner.params());
    let r = &run.row;
    eprintln!(
        "{} {} seed {}: {} attempts, {:.3} s (map {:.3} s, refine {:.3} s)",
        r.scene,
        method,
        seed,
        run.attempts,
        r.wall_s,
        r.map_s,
        r.refine_s
    );
    let Some(plan) = run.plan else {
        return Err(Failure::Planning(format!("{method} found no plan for {} within {} attempts", r.scene, planner.budget)));
    };
    match out {
        Some(out) => {
            write(out, &plan.to_json())?;
            write(&svg_beside(out), &svg::plan_svg(&plan, &scene, Some(&run.grasps), 0.5))?;
            println!("{} regrasps, cost {:.2} m", plan.regrasps(), plan.cost());
        }
        None => println!("{}", plan.to_json()),
    }
    Ok(())
}

fn scene_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn cmd_bench(set: &Path, methods: &str, seeds: u64, planner: &PlannerArgs, no_timing: bool, out: &Path) -> Outcome {
    let methods = Method::parse_list(methods).map_err(|e| Failure::Usage(e.to_string()))?;
    if methods.is_empty() || seeds == 0 {
        return Err(Failure::Usage("need at least one method and one seed".into()));
    }
    let scenes = scene_files(set)?.iter().map(|p| read_scene(p)).collect::<Result<Vec<_>, _>>()?;
    if scenes.is_empty() {
        return Err(Failure::Io(format!("{}: no scene files", set.display())));
    }
    let seeds: Vec<u64> = (0..seeds).collect();
    let mut rows: Vec<_> = run_matrix(&scenes, &methods, &seeds, &planner.params()).into_iter().map(|o| o.row).collect();
    if no_timing {
        rows = rows.into_iter().map(|r| r.without_timing()).collect();
    }
    let file = std::fs::File::create(out).map_err(|e| io(out, e))?;
    write_csv(file, &rows).map_err(|e| io(out, e))?;
    let name = set.file_name().map_or_else(|| set.display().to_string(), |n| n.to_string_lossy().into_owned());
    print!("{}", render_tables(&aggregate(&rows, |_| name.clone())));
    Ok(())
}

fn cmd_viz(input: &Path, out: Option<&Path>, scene: Option<&Path>, grasps: Option<&Path>) -> Outcome {
    let text = std::fs::read_to_string(input).map_err(|e| io(input, e))?;
    if input.extension().is_some_and(|x| x == "csv") {
        let rows = read_csv(text.as_bytes()).map_err(|e| io(input, e))?;
        print!("{}", render_tables(&aggregate(&rows, |r| r.scene.clone())));
        return Ok(());
    }
    let out = out.ok_or_else(|| Failure::Usage("--out is required for SVG output".into()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| io(input, e))?;
    let has = |key: &str| value.get(key).is_some();
    let bad = |e: &dyn std::fmt::Display| io(input, e);
    let scene = scene.map(read_scene).transpose()?;
    let image = if has("steps") {
        let plan = Plan::from_json(&text).map_err(|e| bad(&e))?;
        let scene = scene.ok_or_else(|| Failure::Usage("plans need --scene".into()))?;
        let grasps = grasps.map(read_grasps).transpose()?;
        svg::plan_svg(&plan, &scene, grasps.as_ref(), 0.5)
    } else if has("voxel_area") {
        let map = MapExport::from_json(&text).map_err(|e| bad(&e))?;
        svg::map_svg(&map, scene.as_ref())
    } else if has("anchors") {
        svg::grasps_svg(&GraspSet::from_json(&text).map_err(|e| bad(&e))?)
    } else if has("obstacles") {
        svg::scene_svg(&Scene::from_json(&text).map_err(|e| bad(&e))?)
    } else {
        return Err(Failure::Io(format!("{}: not a scene, grasp set, map or plan", input.display())));
    };
    write(out, &image)
}

fn cmd_scenes(dir: &Path, with_fixtures: bool, mazes: u64, cols: usize, rows: usize) -> Outcome {
    if !with_fixtures && mazes == 0 {
        return Err(Failure::Usage("nothing to write: pass --fixtures and/or --mazes N".into()));
    }
    let params = MazeParams { cols, rows, ..MazeParams::default() };
    params.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut scenes = Vec::new();
    if with_fixtures {
        scenes.extend(fixtures::all());
    }
    for seed in 0..mazes {
        let mut s = generate_maze(seed, &params).map_err(|e| Failure::Usage(e.to_string()))?;
        s.name = format!("maze-{seed:03}");
        scenes.push(s);
    }
    for s in &scenes {
        let path = dir.join(format!("{}.json", s.name));
        save_scene(s, &path).map_err(|e| Failure::Io(e.to_string()))?;
    }
    println!("{} scenes written to {}", scenes.len(), dir.display());
    Ok(())
}
