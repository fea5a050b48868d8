//! Benchmark harness: runs planners over scene × method × seed matrices,
//! writes the rows as CSV and summarizes them per scene set.

use crate::baseline::{plan_baseline, BaselineConfig, Sampler};
use crate::grasp::{generate_grasps, FeasibilityParams, GraspSet};
use crate::motion::MotionConfig;
use crate::plan::Plan;
use crate::refine::{refine, RefineConfig};
use crate::rmap::{find_regrasp_plans, MapConfig};
use crate::scene::{CollisionWorld, Scene};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

pub const CSV_HEADER: [&str; 8] = ["scene", "method", "seed", "success", "wall_s", "map_s", "refine_s", "regrasps"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rmp,
    RmpFix,
    RmpFree,
    Rnd,
    Rndh,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Rmp, Method::RmpFix, Method::RmpFree, Method::Rnd, Method::Rndh];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rmp => "rmp",
            Method::RmpFix => "rmpfix",
            Method::RmpFree => "rmpfree",
            Method::Rnd => "rnd",
            Method::Rndh => "rndh",
        }
    }

    pub fn config(self) -> MethodConfig {
        let (update_weights, constrain_grasp, sampler) = match self {
            Method::Rmp => (true, true, None),
            Method::RmpFix => (false, true, None),
            Method::RmpFree => (true, false, None),
            Method::Rnd => (false, false, Some(Sampler::Uniform)),
            Method::Rndh => (false, false, Some(Sampler::Visible)),
        };
        MethodConfig {
            update_weights,
            constrain_grasp,
            sampler,
        }
    }

    /// Comma-separated list, e.g. `rmp,rnd`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>, UnknownMethod> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown method {0:?} (expected rmp, rmpfix, rmpfree, rnd or rndh)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownMethod(s.into()))
    }
}

/// Planner switches behind a method name. Map-guided methods have no sampler;
/// the sampling baselines use neither map flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MethodConfig {
    pub update_weights: bool,
    pub constrain_grasp: bool,
    pub sampler: Option<Sampler>,
}

impl MethodConfig {
    pub fn method(&self) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.config() == *self)
    }
}

/// Parameters shared by every method in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlannerParams {
    /// Grasp anchors.
    pub k: usize,
    /// Coarsest voxel size tried.
    pub voxel: f64,
    /// Refinement stops before the voxel size drops to this.
    pub vmin: f64,
    pub alpha: f64,
    /// Perturbation samples per feasibility score.
    pub samples: usize,
    /// Sub-problem attempts per run.
    pub budget: usize,
    pub esdf_cell: f64,
    pub motion: MotionConfig,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            k: 8,
            voxel: 0.4,
            vmin: 0.05,
            alpha: 0.5,
            samples: 16,
            budget: 200,
            esdf_cell: 0.05,
            motion: MotionConfig::default(),
        }
    }
}

impl PlannerParams {
    pub fn feasibility(&self, scene: &Scene, seed: u64) -> FeasibilityParams {
        FeasibilityParams {
            samples: self.samples,
            alpha: self.alpha,
            seed,
            ..FeasibilityParams::for_agent(scene.agent_radius)
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub scene: String,
    pub method: Method,
    pub seed: u64,
    pub success: bool,
    pub wall_s: f64,
    pub map_s: f64,
    pub refine_s: f64,
    /// Only present on success.
    pub regrasps: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

impl BenchResult {
    pub fn record(&self) -> [String; 8] {
        [
            self.scene.clone(),
            self.method.to_string(),
            self.seed.to_string(),
            u8::from(self.success).to_string(),
            format!("{:.3}", self.wall_s),
            format!("{:.3}", self.map_s),
            format!("{:.3}", self.refine_s),
            self.regrasps.map_or(String::new(), |r| r.to_string()),
        ]
    }

    pub fn from_record(rec: &csv::StringRecord, row: usize) -> Result<Self, CsvError> {
        let bad = |message: String| CsvError::Row { row, message };
        if rec.len() != CSV_HEADER.len() {
            return Err(bad(format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len())));
        }
        let float = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("{}: {e}", CSV_HEADER[i])));
        let success = match &rec[3] {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("success must be 0 or 1, got {other:?}"))),
        };
        let regrasps = match &rec[7] {
            "" => None,
            s => Some(s.parse().map_err(|e| bad(format!("regrasps: {e}")))?),
        };
        if regrasps.is_some() != success {
            return Err(bad("regrasps must be present exactly on success".into()));
        }
        Ok(Self {
            scene: rec[0].to_string(),
            method: rec[1].parse().map_err(|e: UnknownMethod| bad(e.to_string()))?,
            seed: rec[2].parse().map_err(|e| bad(format!("seed: {e}")))?,
            success,
            wall_s: float(4)?,
            map_s: float(5)?,
            refine_s: float(6)?,
            regrasps,
        })
    }

    /// Zeroes the timing columns so repeated runs compare byte for byte.
    pub fn without_timing(mut self) -> Self {
        self.wall_s = 0.0;
        self.map_s = 0.0;
        self.refine_s = 0.0;
        self
    }
}

pub fn write_csv<W: io::Write>(out: W, rows: &[BenchResult]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<BenchResult>, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(CSV_HEADER) {
        return Err(CsvError::Row {
            row: 0,
            message: format!("header must be {}", CSV_HEADER.join(",")),
        });
    }
    r.records().enumerate().map(|(i, rec)| BenchResult::from_record(&rec?, i + 1)).collect()
}

/// A finished run with the artifacts the CSV row leaves out.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub row: BenchResult,
    pub plan: Option<Plan>,
    pub attempts: usize,
    pub grasps: GraspSet,
}

/// Runs one method on one scene. Grasps, the map and every random draw derive
/// from `seed`.
pub fn run_method(scene: &Scene, method: Method, seed: u64, params: &PlannerParams) -> RunOutcome {
    let t0 = Instant::now();
    let world = CollisionWorld::new(scene, params.esdf_cell);
    let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, params.k, seed).expect("valid grasp parameters");
    let feasibility = params.feasibility(scene, seed);
    let mc = method.config();
    let (plan, attempts, map_s, refine_s) = match mc.sampler {
        None => {
            let cfg = MapConfig::new(params.voxel, feasibility);
            let mut plans = find_regrasp_plans(scene, &world, &grasps, params.voxel, params.vmin, &cfg);
            let map_s = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let rc = RefineConfig {
                budget: params.budget,
                update_weights: mc.update_weights,
                constrain_grasp: mc.constrain_grasp,
                motion: params.motion,
                ..RefineConfig::default()
            };
            let report = refine(scene, &world, &grasps, &mut plans.map, rc);
            (report.result.ok(), report.attempts, map_s, t1.elapsed().as_secs_f64())
        }
        Some(sampler) => {
            let t1 = Instant::now();
            let cfg = BaselineConfig {
                motion: params.motion,
                feasibility,
                ..BaselineConfig::new(sampler, params.budget, seed, scene.agent_radius)
            };
            let report = plan_baseline(scene, &world, &grasps, cfg);
            (report.result.ok(), report.attempts, 0.0, t1.elapsed().as_secs_f64())
        }
    };
    let wall_s = t0.elapsed().as_secs_f64().max(map_s + refine_s);
    RunOutcome {
        row: BenchResult {
            scene: scene.name.clone(),
            method,
            seed,
            success: plan.is_some(),
            wall_s,
            map_s,
            refine_s,
            regrasps: plan.as_ref().map(Plan::regrasps),
        },
        plan,
        attempts,
        grasps,
    }
}

/// Fewest regrasps on any abstract path of the scene's map, built with the
/// seed-0 grasps; `None` when the map has no path.
pub fn map_depth(params: PlannerParams) -> impl Fn(&Scene) -> Option<usize> + Sync {
    move |scene: &Scene| {
        let world = CollisionWorld::new(scene, params.esdf_cell);
        let grasps = generate_grasps(&scene.object_shape, scene.agent_radius, params.k, 0).ok()?;
        let cfg = MapConfig::new(params.voxel, params.feasibility(scene, 0));
        let plans = find_regrasp_plans(scene, &world, &grasps, params.voxel, params.vmin, &cfg);
        plans.paths.iter().map(|p| p.regrasps).min()
    }
}

/// Runs every (scene, method, seed) cell concurrently. Results come back
/// ordered by scene, then method, then seed, as given.
pub fn run_matrix(scenes: &[Scene], methods: &[Method], seeds: &[u64], params: &PlannerParams) -> Vec<RunOutcome> {
    let cells: Vec<(&Scene, Method, u64)> = scenes
        .iter()
        .flat_map(|s| methods.iter().flat_map(move |&m| seeds.iter().map(move |&seed| (s, m, seed))))
        .collect();
    cells.into_par_iter().map(|(s, m, seed)| run_method(s, m, seed, params)).collect()
}

/// Population mean and standard deviation; `None` for no samples.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Per (scene set, method) summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub set: String,
    pub method: Method,
    pub runs: usize,
    pub successes: usize,
    /// Over successful runs only.
    pub wall: Option<(f64, f64)>,
    pub map: Option<(f64, f64)>,
    pub refine: Option<(f64, f64)>,
}

impl Summary {
    pub fn success_pct(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            100.0 * self.successes as f64 / self.runs as f64
        }
    }

    /// `mean ± std [map mean]` of the wall time, or `-` without successes.
    pub fn time_cell(&self) -> String {
        match (self.wall, self.map) {
            (Some((m, s)), Some((map, _))) => format!("{m:.3} ± {s:.3} [{map:.3}]"),
            _ => "-".into(),
        }
    }
}

/// Groups rows by `set_of` and method. Sets are ordered by name, methods in
/// [`Method::ALL`] order.
pub fn aggregate(rows: &[BenchResult], set_of: impl Fn(&BenchResult) -> String) -> Vec<Summary> {
    let mut groups: BTreeMap<(String, Method), Vec<&BenchResult>> = BTreeMap::new();
    for r in rows {
        groups.entry((set_of(r), r.method)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((set, method), rs)| {
            let ok: Vec<&&BenchResult> = rs.iter().filter(|r| r.success).collect();
            let stat = |f: fn(&BenchResult) -> f64| mean_std(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            Summary {
                set,
                method,
                runs: rs.len(),
                successes: ok.len(),
                wall: stat(|r| r.wall_s),
                map: stat(|r| r.map_s),
                refine: stat(|r| r.refine_s),
            }
        })
        .collect()
}

/// Two text tables, success rates then times, with sets as rows and methods
/// as columns.
pub fn render_tables(summaries: &[Summary]) -> String {
    let mut methods: Vec<Method> = summaries.iter().map(|s| s.method).collect();
    methods.sort();
    methods.dedup();
    let mut sets: Vec<&str> = summaries.iter().map(|s| s.set.as_str()).collect();
    sets.dedup();
    let find = |set: &str, m: Method| summaries.iter().find(|s| s.set == set && s.method == m);
    let width = sets.iter().map(|s| s.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let header = |out: &mut String, title: &str, col: usize| {
        out.push_str(&format!("{title:<width$}"));
        for m in &methods {
            out.push_str(&format!("  {:>col$}", m.name()));
        }
        out.push('\n');
    };
    header(&mut out, "success %", 8);
    for set in &sets {
        out.push_str(&format!("{set:<width$}"));
        for &m in &methods {
            let cell = find(set, m).map_or("".into(), |s| format!("{:.1}", s.success_pct()));
            out.push_str(&format!("  {cell:>8}"));
        }
        out.push('\n');
    }
    out.push('\n');
    header(&mut out, "time s (population sd) [map]", 28);
    for set in &sets {
        out.push_str(&format!("{set:<width$}"));
        for &m in &methods {
            let cell = find(set, m).map_or("".into(), Summary::time_cell);
            out.push_str(&format!("  {cell:>28}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::fixtures;

    fn row(scene: &str, method: Method, seed: u64, wall: Option<f64>) -> BenchResult {
        BenchResult {
            scene: scene.into(),
            method,
            seed,
            success: wall.is_some(),
            wall_s: wall.unwrap_or(1.5),
            map_s: 0.25,
            refine_s: 0.5,
            regrasps: wall.map(|_| 1),
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(m.config().method(), Some(m));
        }
        assert_eq!(Method::parse_list("rmp, RND").unwrap(), vec![Method::Rmp, Method::Rnd]);
        assert!(Method::parse_list("rmp,astar").is_err());
    }

    #[test]
    fn flag_combinations_are_distinct() {
        let configs: Vec<MethodConfig> = Method::ALL.iter().map(|m| m.config()).collect();
        for (i, a) in configs.iter().enumerate() {
            for b in &configs[i + 1..] {
                assert_ne!(a, b);
            }
        }
        assert!(!Method::RmpFix.config().update_weights);
        assert!(!Method::RmpFree.config().constrain_grasp);
    }

    #[test]
    fn population_stddev() {
        assert_eq!(mean_std(&[2.0, 4.0]), Some((3.0, 1.0)));
        assert_eq!(mean_std(&[]), None);
    }

    #[test]
    fn ninety_percent_and_dash_cells() {
        let mut rows: Vec<BenchResult> = (0..10).map(|s| row("a", Method::Rmp, s, (s < 9).then_some(2.0))).collect();
        rows.extend((0..4).map(|s| row("a", Method::Rnd, s, None)));
        let sums = aggregate(&rows, |r| r.scene.clone());
        assert_eq!(sums[0].method, Method::Rmp);
        assert_eq!(sums[0].success_pct(), 90.0);
        assert_eq!(sums[0].time_cell(), "2.000 ± 0.000 [0.250]");
        assert_eq!(sums[1].success_pct(), 0.0);
        assert_eq!(sums[1].time_cell(), "-");
        let table = render_tables(&sums);
        assert!(table.contains("90.0"), "{table}");
    }

    #[test]
    fn timing_only_counts_successes() {
        let rows = vec![row("a", Method::Rmp, 0, Some(2.0)), row("a", Method::Rmp, 1, Some(4.0)), row("a", Method::Rmp, 2, None)];
        let s = &aggregate(&rows, |r| r.scene.clone())[0];
        assert_eq!(s.wall, Some((3.0, 1.0)));
        assert_eq!(s.runs, 3);
    }

    #[test]
    fn csv_round_trips() {
        let rows = vec![row("tunnel", Method::Rmp, 3, Some(1.25)), row("maze, 2", Method::Rndh, 0, None)];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("scene,method,seed,success,wall_s,map_s,refine_s,regrasps\n"));
        assert!(text.contains("tunnel,rmp,3,1,1.250,0.250,0.500,1\n"), "{text}");
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn csv_rejects_inconsistent_rows() {
        let text = "scene,method,seed,success,wall_s,map_s,refine_s,regrasps\na,rmp,0,0,1.000,0.000,1.000,2\n";
        assert!(matches!(read_csv(text.as_bytes()), Err(CsvError::Row { row: 1, .. })));
        assert!(read_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn open_room_runs_every_method() {
        let scene = fixtures::open_room();
        for m in Method::ALL {
            let out = run_method(&scene, m, 0, &PlannerParams::default());
            assert!(out.row.success, "{m}");
            assert_eq!(out.row.regrasps, Some(0));
            assert!(out.row.refine_s <= out.row.wall_s);
        }
    }

    #[test]
    fn matrix_order_and_determinism() {
        let scenes = [fixtures::open_room(), fixtures::sealed()];
        let methods = [Method::Rmp, Method::Rnd];
        let params = PlannerParams {
            budget: 3,
            ..PlannerParams::default()
        };
        let run = || -> Vec<BenchResult> {
            run_matrix(&scenes, &methods, &[0, 1], &params).into_iter().map(|o| o.row.without_timing()).collect()
        };
        let a = run();
        assert_eq!(a.len(), 8);
        let keys: Vec<(&str, Method, u64)> = a.iter().map(|r| (r.scene.as_str(), r.method, r.seed)).collect();
        assert_eq!(keys[0], ("open-room", Method::Rmp, 0));
        assert_eq!(keys[3], ("open-room", Method::Rnd, 1));
        assert_eq!(keys[4], ("sealed", Method::Rmp, 0));
        assert_eq!(a, run());
        assert!(a[4..].iter().all(|r| !r.success));
    }
}
