//! Resolved run configurations and the code that executes them.
//!
//! Each subcommand resolves its config file and flags into one of the config
//! structs below. That resolved value is what the manifest records, so a
//! replay never consults the original flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use haulbots_core::evo::{decode, evolve, write_history_csv, EpisodeParams};
use haulbots_core::gait::{plan_climb_sequence, run_episode, solve_hop};
use haulbots_core::grip::{
    aggregate_load, analyse_profile, find_grip_sites, gen_surface_with, min_grip_angle,
    surface_site_count, trace_profile, CORRELATION_SAMPLES,
};
use haulbots_core::planner::{gradient_obstacles, plan_with_stats, validate_path};
use haulbots_core::plot::{write_climb_csv, write_fitness_csv, write_grip_profile_csv};
use haulbots_core::{
    Error, EvalResult, GAParams, Heightmap, HopProblem, MicroSurface, PlanProblem,
    Result, RobotSpec, ScenarioSpec, SpineModel, Vec2, Vec3, WorldParams,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::manifest::{Outputs, RunManifest, Status, MANIFEST_FILE};

/// Read TOML (`.toml`) or JSON (anything else).
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Absolute form of an input path so a manifest replays from any directory.
pub fn absolute(path: &Path) -> Result<PathBuf> {
    Ok(std::fs::canonicalize(path)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub scenario: ScenarioSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HopsolveConfig {
    pub problem: HopProblem,
}

impl Default for HopsolveConfig {
    /// A 0.4 m upslope hop of a default robot on the default 15° incline.
    fn default() -> Self {
        let robot = RobotSpec::default();
        let world = WorldParams::default();
        let g = world.g;
        let th = world.slope_theta;
        Self {
            problem: HopProblem {
                r_0: Vec3::new(0.0, 0.0, robot.radius_rho),
                r_tau: Vec3::new(0.0, 0.4, robot.radius_rho),
                m_r: robot.m_r,
                f_g: Vec3::new(0.0, -g * th.sin(), -g * th.cos()),
                t_max: robot.t_max,
                tau_bounds: (0.3, 1.0),
                external_force: Vec3::zeros(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceSource {
    Generate {
        /// RMS roughness (m).
        rms: f64,
        /// Side length (m).
        extent: f64,
        /// Sample spacing (m).
        resolution: f64,
        correlation_length: f64,
        seed: u64,
    },
    File(PathBuf),
}

/// Spine material; with it the surface run also reports load capacities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpineMaterial {
    pub sigma_max: f64,
    pub e_mod: f64,
    pub nu: f64,
    pub count_s: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SurfaceConfig {
    pub source: SurfaceSource,
    /// Tip radii to compare (m).
    pub tip_radii: Vec<f64>,
    /// Row exported as the plotted profile; the middle row when absent.
    pub row: Option<usize>,
    /// Load angle (rad).
    pub psi_load: f64,
    pub mu_f: f64,
    pub spine: Option<SpineMaterial>,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        let resolution = 1e-5;
        Self {
            source: SurfaceSource::Generate {
                rms: 100e-6,
                extent: 2e-3,
                resolution,
                correlation_length: CORRELATION_SAMPLES * resolution,
                seed: 0,
            },
            tip_radii: vec![10e-6, 50e-6, 100e-6],
            row: None,
            psi_load: 10f64.to_radians(),
            mu_f: 1.0,
            spine: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveConfig {
    pub ga: GAParams,
    /// Node spacing on the payload rim (deg).
    pub alpha_node: f64,
    pub scenario: ScenarioSpec,
    /// Taken from `scenario` when absent.
    pub episode: Option<EpisodeParams>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            ga: GAParams::default(),
            alpha_node: 15.0,
            scenario: ScenarioSpec::climb_up(),
            episode: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSource {
    /// The built-in 16 m × 16 m two-ridge terrain.
    TwoRidge,
    File(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanConfig {
    pub heightmap: MapSource,
    /// Slope above which a cell is blocked.
    pub grad_threshold: f64,
    pub problem: PlanProblem,
    pub seed: u64,
    pub export_mask: bool,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            heightmap: MapSource::TwoRidge,
            grad_threshold: 1.0,
            problem: PlanProblem::two_ridge(),
            seed: 0,
            export_mask: false,
        }
    }
}

#[derive(Debug, Clone)]
pub enum RunConfig {
    Simulate(SimulateConfig),
    Hopsolve(HopsolveConfig),
    Surface(SurfaceConfig),
    Evolve(EvolveConfig),
    Plan(PlanConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Simulate(_) => "simulate",
            Self::Hopsolve(_) => "hopsolve",
            Self::Surface(_) => "surface",
            Self::Evolve(_) => "evolve",
            Self::Plan(_) => "plan",
        }
    }

    fn to_value(&self) -> Result<serde_json::Value> {
        Ok(match self {
            Self::Simulate(c) => serde_json::to_value(c)?,
            Self::Hopsolve(c) => serde_json::to_value(c)?,
            Self::Surface(c) => serde_json::to_value(c)?,
            Self::Evolve(c) => serde_json::to_value(c)?,
            Self::Plan(c) => serde_json::to_value(c)?,
        })
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        let v = m.config.clone();
        Ok(match m.subcommand.as_str() {
            "simulate" => Self::Simulate(serde_json::from_value(v)?),
            "hopsolve" => Self::Hopsolve(serde_json::from_value(v)?),
            "surface" => Self::Surface(serde_json::from_value(v)?),
            "evolve" => Self::Evolve(serde_json::from_value(v)?),
            "plan" => Self::Plan(serde_json::from_value(v)?),
            other => return Err(Error::Config(format!("unknown subcommand `{other}` in manifest"))),
        })
    }

    fn seeds(&self) -> BTreeMap<String, u64> {
        let mut seeds = BTreeMap::new();
        match self {
            Self::Simulate(c) => {
                seeds.insert("run".into(), c.scenario.seeds.run);
            }
            Self::Hopsolve(_) => {}
            Self::Surface(c) => {
                if let SurfaceSource::Generate { seed, .. } = c.source {
                    seeds.insert("surface".into(), seed);
                }
            }
            Self::Evolve(c) => {
                seeds.insert("ga".into(), c.ga.seed);
            }
            Self::Plan(c) => {
                seeds.insert("planner".into(), c.seed);
            }
        }
        seeds
    }

    fn execute(&self, out: &mut Outputs, timings: &mut BTreeMap<String, f64>) -> Result<()> {
        match self {
            Self::Simulate(c) => simulate(c, out),
            Self::Hopsolve(c) => hopsolve(c, out),
            Self::Surface(c) => surface(c, out),
            Self::Evolve(c) => run_evolve(c, out),
            Self::Plan(c) => run_plan(c, out, timings),
        }
    }
}

/// Execute `config` into `dir` and write its manifest, whether or not the
/// run succeeds.
pub fn run(config: &RunConfig, dir: &Path) -> Result<()> {
    let mut out = Outputs::new(dir)?;
    let mut timings = BTreeMap::new();
    let t0 = Instant::now();
    let result = config.execute(&mut out, &mut timings);
    timings.insert("total".into(), t0.elapsed().as_secs_f64());
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: config.name().to_string(),
        config: config.to_value()?,
        seeds: config.seeds(),
        outputs: out.files().to_vec(),
        timings,
        status: if result.is_ok() { Status::Ok } else { Status::Failed },
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(out.dir().join(MANIFEST_FILE), text)?;
    result
}

fn simulate(c: &SimulateConfig, out: &mut Outputs) -> Result<()> {
    let s = &c.scenario;
    s.validate()?;
    let ctl = &s.controller;
    let schedule = plan_climb_sequence(s, &s.initial_state(), ctl.goal_dir, ctl.hop_len, ctl.n_hops)?;
    out.write_json("schedule.json", &schedule)?;
    let traj = run_episode(s, &schedule)?;
    traj.write_csv(out.create("trajectory.csv")?)?;
    write_climb_csv(&traj, out.create("climb.csv")?)?;
    out.write_json("summary.json", &traj.summary())?;
    match traj.aborted {
        Some(why) => Err(Error::EpisodeAborted(why)),
        None => Ok(()),
    }
}

fn hopsolve(c: &HopsolveConfig, out: &mut Outputs) -> Result<()> {
    match solve_hop(&c.problem) {
        Ok(sol) => {
            println!("{}", serde_json::to_string(&sol)?);
            out.write_json("hop.json", &sol)
        }
        Err(e @ Error::HopInfeasible { required, limit }) => {
            let report = serde_json::json!({
                "error": "hop_infeasible",
                "required": required,
                "limit": limit,
            });
            println!("{report}");
            out.write_json("hop.json", &report)?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct TipSummary {
    r_s: f64,
    /// Sites over every row of the surface.
    sites: usize,
    /// Sites on the exported row.
    row_sites: usize,
    /// Aggregate robot load (N), when a spine material is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    f_load: Option<f64>,
}

#[derive(Serialize)]
struct SurfaceSummary {
    rows: usize,
    cols: usize,
    resolution: f64,
    rms: f64,
    psi_min: f64,
    row: usize,
    tips: Vec<TipSummary>,
}

fn surface(c: &SurfaceConfig, out: &mut Outputs) -> Result<()> {
    let surface = match &c.source {
        SurfaceSource::Generate {
            rms,
            extent,
            resolution,
            correlation_length,
            seed,
        } => {
            let s = gen_surface_with(*rms, *extent, *resolution, *correlation_length, *seed)?;
            s.write_csv(out.create("surface.csv")?)?;
            s
        }
        SurfaceSource::File(path) => MicroSurface::read_csv(path)?,
    };
    let row = c.row.unwrap_or(surface.rows / 2);
    if row >= surface.rows {
        return Err(Error::InvalidParameter {
            name: "row",
            reason: format!("surface has {} rows", surface.rows),
        });
    }
    let psi_min = min_grip_angle(c.psi_load, c.mu_f)?;
    let profile = surface.row(row);
    write_grip_profile_csv(profile, surface.resolution, &c.tip_radii, psi_min, out.create("profile.csv")?)?;

    let mut tips = Vec::with_capacity(c.tip_radii.len());
    for &r_s in &c.tip_radii {
        let mut f_load = None;
        let row_sites = match c.spine {
            Some(m) => {
                let spine = SpineModel {
                    r_s,
                    psi_load: c.psi_load,
                    mu_f: c.mu_f,
                    sigma_max: m.sigma_max,
                    e_mod: m.e_mod,
                    nu: m.nu,
                    count_s: m.count_s,
                };
                let report = analyse_profile(profile, surface.resolution, &spine, psi_min)?;
                out.write_json(&format!("report_{}um.json", micrometres(r_s)), &report)?;
                f_load = Some(aggregate_load(&spine, &surface, psi_min)?);
                report.site_indices.len()
            }
            None => {
                let traced = trace_profile(profile, r_s, surface.resolution)?;
                find_grip_sites(&traced, surface.resolution, psi_min).len()
            }
        };
        tips.push(TipSummary {
            r_s,
            sites: surface_site_count(&surface, r_s, psi_min)?,
            row_sites,
            f_load,
        });
    }
    out.write_json(
        "sites.json",
        &SurfaceSummary {
            rows: surface.rows,
            cols: surface.cols,
            resolution: surface.resolution,
            rms: surface.rms(),
            psi_min,
            row,
            tips,
        },
    )
}

/// Metres to micrometres, rounded to a picometre so file names stay short.
fn micrometres(r: f64) -> f64 {
    (r * 1e12).round() / 1e6
}

#[derive(Serialize)]
struct ArchiveMember<'a> {
    genotype: String,
    nodes: Vec<usize>,
    angles_deg: Vec<f64>,
    eval: &'a EvalResult,
    rank: usize,
    crowding: f64,
    fitness: f64,
}

#[derive(Serialize)]
struct Archive<'a> {
    generations: usize,
    evaluations: usize,
    members: Vec<ArchiveMember<'a>>,
}

fn run_evolve(c: &EvolveConfig, out: &mut Outputs) -> Result<()> {
    let episode = c.episode.unwrap_or_else(|| EpisodeParams::from_scenario(&c.scenario));
    let run = evolve(&c.ga, &c.scenario, c.alpha_node, &episode)?;
    write_history_csv(&run.history, out.create("history.csv")?)?;
    write_fitness_csv(&run.history, out.create("fitness.csv")?)?;
    let members = run
        .archive
        .iter()
        .map(|h| {
            let layout = decode(&h.genotype, &c.scenario.payload.spec);
            ArchiveMember {
                genotype: h.genotype.to_bit_string(),
                nodes: layout.nodes,
                angles_deg: layout.angles_deg,
                eval: &h.eval,
                rank: h.rank,
                crowding: h.crowding,
                fitness: h.fitness,
            }
        })
        .collect();
    out.write_json(
        "archive.json",
        &Archive {
            generations: run.generations(),
            evaluations: run.evaluations,
            members,
        },
    )
}

#[derive(Serialize)]
struct PathMeta<'a> {
    waypoints: usize,
    centroid_length: f64,
    iterations: usize,
    states: usize,
    cells: usize,
    payload_rejections: usize,
    blocked_cells: usize,
    /// `"ok"` or the first violated path invariant.
    validation: String,
    payload: &'a [Vec2],
}

fn run_plan(c: &PlanConfig, out: &mut Outputs, timings: &mut BTreeMap<String, f64>) -> Result<()> {
    let hm = match &c.heightmap {
        MapSource::TwoRidge => Heightmap::two_ridge(),
        MapSource::File(p) => Heightmap::load(p)?,
    };
    let mask = gradient_obstacles(&hm, c.grad_threshold)?;
    if c.export_mask {
        mask.write_csv(out.create("mask.csv")?)?;
    }
    let (path, stats) = plan_with_stats(&c.problem, &mask, c.seed)?;
    timings.insert("planning".into(), stats.planning_time);
    for i in 0..3 {
        path.write_robot_csv(i, out.create(&format!("robot{i}.csv"))?)?;
    }
    let validation = match validate_path(&path, &c.problem, &mask) {
        Ok(()) => "ok".to_string(),
        Err(v) => format!("{v:?}"),
    };
    out.write_json(
        "path.json",
        &PathMeta {
            waypoints: path.len(),
            centroid_length: path.centroid_length(),
            iterations: stats.iterations,
            states: stats.states,
            cells: stats.cells,
            payload_rejections: stats.payload_rejections,
            blocked_cells: mask.blocked_count(),
            validation,
            payload: &path.payload,
        },
    )
}

