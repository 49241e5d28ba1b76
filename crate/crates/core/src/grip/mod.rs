//! Microspine grip physics: rough-surface synthesis, spine-tip tracing,
//! grip-site detection, per-spine load limits and the sigmoid grip law.

mod spine;
mod surface;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

pub use spine::{
    aggregate_load, analyse_profile, asperity_radius, effective_radius, find_grip_sites,
    grip_force, max_load_for_radius, min_grip_angle, normal_angles, spine_max_load,
    surface_site_count, trace_profile,
};
pub use surface::{gen_surface, gen_surface_with, MicroSurface, CORRELATION_SAMPLES};

/// Default steepness of the grip sigmoid (1/N).
pub const DEFAULT_SIGMOID_K: f64 = 15.0;

/// Geometry and material of one microspine. Material constants have no
/// defaults and must always be supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpineModel {
    /// Tip radius (m).
    pub r_s: f64,
    /// Load angle (rad).
    pub psi_load: f64,
    /// Spine/surface friction coefficient.
    pub mu_f: f64,
    /// Tensile strength (Pa).
    pub sigma_max: f64,
    /// Elastic modulus (Pa).
    pub e_mod: f64,
    /// Poisson-type coefficient of the load bound.
    pub nu: f64,
    /// Spines per robot.
    pub count_s: usize,
}

impl SpineModel {
    pub fn validate(&self) -> Result<()> {
        ensure(self.r_s > 0.0, "r_s", "must be positive")?;
        ensure(self.mu_f > 0.0, "mu_f", "must be positive")?;
        ensure(self.sigma_max > 0.0, "sigma_max", "must be positive")?;
        ensure(self.e_mod > 0.0, "e_mod", "must be positive")?;
        ensure((0.0..0.5).contains(&self.nu), "nu", "must lie in [0, 0.5)")?;
        ensure(self.count_s >= 1, "count_s", "need at least one spine")
    }

    pub fn psi_min(&self) -> Result<f64> {
        min_grip_angle(self.psi_load, self.mu_f)
    }
}

/// Grip analysis of one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripSiteReport {
    pub resolution: f64,
    pub r_s: f64,
    pub psi_min: f64,
    pub site_indices: Vec<usize>,
    pub traced: Vec<f64>,
    /// Normal inclination of the traced profile (rad); zero at the two ends.
    pub psi_profile: Vec<f64>,
    /// Load capacity at each site, aligned with `site_indices` (N).
    pub per_site_fmax: Vec<f64>,
}
