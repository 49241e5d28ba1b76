//! Deterministic simulation and optimization for teams of tethered,
//! microspine-gripping hopping robots that haul a payload across sloped,
//! rough terrain.
//!
//! * [`sim`] holds the coupled robot/payload force model and integrator.
//! * [`grip`] analyses microspine engagement on synthetic rough surfaces.
//! * [`gait`] solves constant-thrust hops and runs one-at-a-time climbs.
//! * [`evo`] searches tether attachment layouts with NSGA-II.
//! * [`planner`] plans separation-constrained paths for three robots on a heightmap.
//! * [`plot`] writes the CSV tables used for external plotting.

pub mod error;
mod gridio;
pub mod evo;
pub mod gait;
pub mod grip;
pub mod planner;
pub mod plot;
pub mod sim;

pub use error::{Error, Result};

pub use nalgebra::{Vector2, Vector3};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

pub use evo::{EvalResult, GAParams, Genotype};
pub use gait::{ClimbSchedule, HopProblem, HopSolution};
pub use grip::{GripSiteReport, MicroSurface, SpineModel};
pub use planner::{Heightmap, ObstacleMask, Path, PlanProblem};
pub use sim::{
    PayloadSpec, RobotSpec, ScenarioSpec, SystemState, TetherSpec, Trajectory, WorldParams,
};
