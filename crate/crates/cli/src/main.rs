//! `haulbots`: command-line front end for haulbots-core.
//!
//! Every run writes its outputs plus `manifest.json` into the output
//! directory (`--out`, else `$HAULBOTS_OUT`, else `haulbots-out`).
//! Exit status: 0 on success, 1 on a domain failure (infeasible hop or
//! schedule, aborted episode, planner timeout or unreachable goal), 2 on a
//! usage or configuration error.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use haulbots_core::{Error, HopProblem, ScenarioSpec, Vec3};

use commands::{
    absolute, load_config, EvolveConfig, HopsolveConfig, MapSource, PlanConfig, RunConfig,
    SimulateConfig, SpineMaterial, SurfaceConfig, SurfaceSource,
};
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "haulbots", version, about = "Tethered hopping-robot haulage toolkit")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "HAULBOTS_OUT", default_value = "haulbots-out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a climbing episode and export its trajectory.
    Simulate(SimulateArgs),
    /// Solve one minimum-thrust hop and print it as JSON.
    Hopsolve(HopsolveArgs),
    /// Generate or load a rough surface and report spine grip sites.
    Surface(SurfaceArgs),
    /// Search tether attachment layouts with NSGA-II.
    Evolve(EvolveArgs),
    /// Plan a three-robot path over a heightmap.
    Plan(PlanArgs),
    /// Re-run the configuration recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Preset {
    ClimbUp,
    ClimbDown,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (TOML or JSON); overrides `--preset`.
    #[arg(long, alias = "config")]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "climb-up")]
    preset: Preset,
    /// Episode time limit (s).
    #[arg(long)]
    duration: Option<f64>,
    /// Integrator step (s).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    n_hops: Option<usize>,
    /// Hop length (m).
    #[arg(long)]
    hop_len: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct HopsolveArgs {
    /// HopProblem file (TOML or JSON).
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Start position `x,y,z` (m).
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    from: Option<Vec3>,
    /// Landing position `x,y,z` (m).
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    to: Option<Vec3>,
    /// Robot mass (kg).
    #[arg(long)]
    mass: Option<f64>,
    /// Incline angle (deg); recomputes gravity with `--g`.
    #[arg(long)]
    theta_deg: Option<f64>,
    #[arg(long, default_value_t = 9.81)]
    g: f64,
    /// Thrust limit (N).
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    tau_min: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    /// Constant external force `x,y,z` (N).
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    external: Option<Vec3>,
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Surface grid CSV to analyse instead of generating one.
    #[arg(long, conflicts_with_all = ["rms", "extent", "resolution", "correlation", "seed"])]
    input: Option<PathBuf>,
    /// RMS roughness (m).
    #[arg(long)]
    rms: Option<f64>,
    /// Side length (m).
    #[arg(long)]
    extent: Option<f64>,
    /// Sample spacing (m).
    #[arg(long)]
    resolution: Option<f64>,
    /// Correlation length (m).
    #[arg(long)]
    correlation: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated spine tip radii (m).
    #[arg(long, value_delimiter = ',')]
    tip_radii: Option<Vec<f64>>,
    /// Profile row to export.
    #[arg(long)]
    row: Option<usize>,
    #[arg(long)]
    psi_load_deg: Option<f64>,
    #[arg(long)]
    mu_f: Option<f64>,
    /// Tensile strength (Pa).
    #[arg(long, requires_all = ["e_mod", "nu", "count_s"])]
    sigma_max: Option<f64>,
    /// Elastic modulus (Pa).
    #[arg(long, requires = "sigma_max")]
    e_mod: Option<f64>,
    #[arg(long, requires = "sigma_max")]
    nu: Option<f64>,
    /// Spines per robot.
    #[arg(long, requires = "sigma_max")]
    count_s: Option<usize>,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    seed: u64,
    /// EvolveConfig file (TOML or JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base scenario file; replaces the config's scenario.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Node spacing (deg); must divide 360.
    #[arg(long)]
    alpha_node: Option<f64>,
    #[arg(long)]
    generations: Option<usize>,
    /// Parent population size.
    #[arg(long)]
    pop: Option<usize>,
    /// Offspring per generation.
    #[arg(long)]
    offspring: Option<usize>,
    #[arg(long)]
    p_cross: Option<f64>,
    #[arg(long)]
    p_mut: Option<f64>,
    /// Comma-separated objective weights.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Episode time limit (s).
    #[arg(long)]
    duration: Option<f64>,
    /// Integrator step (s).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    n_hops: Option<usize>,
    #[arg(long)]
    hop_len: Option<f64>,
    /// Impulse budget per robot (N·s).
    #[arg(long)]
    fuel_budget: Option<f64>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    seed: u64,
    /// PlanConfig file (TOML or JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Heightmap (`.pgm` or CSV); the built-in two-ridge map when absent.
    #[arg(long)]
    heightmap: Option<PathBuf>,
    /// PlanProblem file (TOML or JSON).
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long)]
    grad_threshold: Option<f64>,
    /// Wall-clock budget (s).
    #[arg(long)]
    time_budget: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    payload_radius: Option<f64>,
    /// Also write the obstacle mask as CSV.
    #[arg(long)]
    export_mask: bool,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(format!("expected x,y,z, got {} components", parts.len())),
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn resolve_simulate(a: SimulateArgs) -> haulbots_core::Result<RunConfig> {
    let mut scenario = match (&a.scenario, a.preset) {
        (Some(p), _) => ScenarioSpec::load(p)?,
        (None, Preset::ClimbUp) => ScenarioSpec::climb_up(),
        (None, Preset::ClimbDown) => ScenarioSpec::climb_down(),
    };
    let c = &mut scenario.controller;
    set(&mut c.duration, a.duration);
    set(&mut c.dt, a.dt);
    set(&mut c.n_hops, a.n_hops);
    set(&mut c.hop_len, a.hop_len);
    set(&mut scenario.seeds.run, a.seed);
    Ok(RunConfig::Simulate(SimulateConfig { scenario }))
}

fn resolve_hopsolve(a: HopsolveArgs) -> haulbots_core::Result<RunConfig> {
    let mut cfg = HopsolveConfig::default();
    if let Some(p) = &a.problem {
        cfg.problem = load_config::<HopProblem>(p)?;
    }
    let p = &mut cfg.problem;
    set(&mut p.r_0, a.from);
    set(&mut p.r_tau, a.to);
    set(&mut p.m_r, a.mass);
    set(&mut p.t_max, a.t_max);
    set(&mut p.tau_bounds.0, a.tau_min);
    set(&mut p.tau_bounds.1, a.tau_max);
    set(&mut p.external_force, a.external);
    if let Some(deg) = a.theta_deg {
        let th = deg.to_radians();
        p.f_g = Vec3::new(0.0, -a.g * th.sin(), -a.g * th.cos());
    }
    Ok(RunConfig::Hopsolve(cfg))
}

fn resolve_surface(a: SurfaceArgs) -> haulbots_core::Result<RunConfig> {
    let mut cfg: SurfaceConfig = match &a.config {
        Some(p) => load_config(p)?,
        None => SurfaceConfig::default(),
    };
    if let Some(p) = &a.input {
        cfg.source = SurfaceSource::File(absolute(p)?);
    } else if let SurfaceSource::Generate {
        rms,
        extent,
        resolution,
        correlation_length,
        seed,
    } = &mut cfg.source
    {
        set(rms, a.rms);
        set(extent, a.extent);
        set(resolution, a.resolution);
        set(correlation_length, a.correlation);
        set(seed, a.seed);
    }
    set(&mut cfg.tip_radii, a.tip_radii);
    if a.row.is_some() {
        cfg.row = a.row;
    }
    set(&mut cfg.psi_load, a.psi_load_deg.map(f64::to_radians));
    set(&mut cfg.mu_f, a.mu_f);
    if let (Some(sigma_max), Some(e_mod), Some(nu), Some(count_s)) = (a.sigma_max, a.e_mod, a.nu, a.count_s) {
        cfg.spine = Some(SpineMaterial {
            sigma_max,
            e_mod,
            nu,
            count_s,
        });
    }
    Ok(RunConfig::Surface(cfg))
}

fn resolve_evolve(a: EvolveArgs) -> haulbots_core::Result<RunConfig> {
    let mut cfg: EvolveConfig = match &a.config {
        Some(p) => load_config(p)?,
        None => EvolveConfig::default(),
    };
    if let Some(p) = &a.scenario {
        cfg.scenario = ScenarioSpec::load(p)?;
    }
    cfg.ga.seed = a.seed;
    set(&mut cfg.alpha_node, a.alpha_node);
    set(&mut cfg.ga.generations, a.generations);
    set(&mut cfg.ga.pop_a, a.pop);
    set(&mut cfg.ga.off_b, a.offspring);
    set(&mut cfg.ga.p_cross, a.p_cross);
    set(&mut cfg.ga.p_mut, a.p_mut);
    set(&mut cfg.ga.weights, a.weights);
    let c = &mut cfg.scenario.controller;
    set(&mut c.duration, a.duration);
    set(&mut c.dt, a.dt);
    let mut episode = cfg
        .episode
        .unwrap_or_else(|| haulbots_core::evo::EpisodeParams::from_scenario(&cfg.scenario));
    set(&mut episode.n_hops, a.n_hops);
    set(&mut episode.hop_len, a.hop_len);
    set(&mut episode.fuel_budget, a.fuel_budget);
    cfg.episode = Some(episode);
    Ok(RunConfig::Evolve(cfg))
}

fn resolve_plan(a: PlanArgs) -> haulbots_core::Result<RunConfig> {
    let mut cfg: PlanConfig = match &a.config {
        Some(p) => load_config(p)?,
        None => PlanConfig::default(),
    };
    if let MapSource::File(p) = &cfg.heightmap {
        cfg.heightmap = MapSource::File(absolute(p)?);
    }
    if let Some(p) = &a.heightmap {
        cfg.heightmap = MapSource::File(absolute(p)?);
    }
    if let Some(p) = &a.problem {
        cfg.problem = load_config(p)?;
    }
    cfg.seed = a.seed;
    set(&mut cfg.grad_threshold, a.grad_threshold);
    set(&mut cfg.problem.time_budget, a.time_budget);
    if a.max_iterations.is_some() {
        cfg.problem.max_iterations = a.max_iterations;
    }
    set(&mut cfg.problem.payload_radius, a.payload_radius);
    cfg.export_mask |= a.export_mask;
    Ok(RunConfig::Plan(cfg))
}

fn dispatch(command: Command, out: &Path) -> haulbots_core::Result<()> {
    let config = match command {
        Command::Simulate(a) => resolve_simulate(a)?,
        Command::Hopsolve(a) => resolve_hopsolve(a)?,
        Command::Surface(a) => resolve_surface(a)?,
        Command::Evolve(a) => resolve_evolve(a)?,
        Command::Plan(a) => resolve_plan(a)?,
        Command::Replay(a) => RunConfig::from_manifest(&RunManifest::load(&a.manifest)?)?,
    };
    commands::run(&config, out)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::HopInfeasible { .. }
        | Error::ScheduleInfeasible { .. }
        | Error::ThrustLimit { .. }
        | Error::EpisodeAborted(_)
        | Error::PlannerTimeout { .. }
        | Error::Unreachable(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command, &cli.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("haulbots: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
