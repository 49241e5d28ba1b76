//! Coupled robot/payload dynamics on an inclined plane.
//!
//! Frame convention: the incline frame has `z` along the plane normal and
//! `-y` pointing downslope. Robots are point masses whose centres rest at
//! `z = radius_rho`; the payload disk rests at `z = 0`.

mod energy;
mod forces;
mod integrator;
mod scenario;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::{Vec2, Vec3};

pub use energy::{mechanical_energy, EnergyBreakdown};
pub use forces::{
    attachment_world, contact_force, friction_force, gravity_accel, tether_force, TetherKinematics,
};
pub use integrator::{oscillation_angle, step, StepOutcome};
pub use scenario::{ControllerSpec, PayloadSetup, RobotSetup, ScenarioSpec, Seeds};
pub use trajectory::{EnergyLedger, HopRecord, SlipEvent, Trajectory, TrajectoryRecord, TrajectorySummary};

/// Default integrator step (s).
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldParams {
    /// Gravitational acceleration (m/s²).
    pub g: f64,
    /// Incline angle (rad).
    pub slope_theta: f64,
    /// Viscous friction coefficient on the payload (N·s/m).
    pub mu_v: f64,
    /// Hertz contact stiffness (N/m^n).
    pub k_c: f64,
    /// Contact damping (N·s/m).
    pub c_c: f64,
    /// Hertz exponent.
    #[serde(default = "default_contact_exp")]
    pub contact_exp_n: f64,
}

fn default_contact_exp() -> f64 {
    1.5
}

impl WorldParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.g > 0.0, "g", "must be positive")?;
        ensure(
            (0.0..std::f64::consts::FRAC_PI_2).contains(&self.slope_theta),
            "slope_theta",
            "must lie in [0, pi/2)",
        )?;
        ensure(self.k_c >= 0.0, "k_c", "must be non-negative")?;
        ensure(self.c_c >= 0.0, "c_c", "must be non-negative")?;
        ensure(self.mu_v >= 0.0, "mu_v", "must be non-negative")?;
        ensure(self.contact_exp_n > 0.0, "contact_exp_n", "must be positive")
    }
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            g: 9.81,
            slope_theta: 15f64.to_radians(),
            mu_v: 20.0,
            k_c: 1.0e5,
            c_c: 100.0,
            contact_exp_n: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    /// Mass (kg).
    pub m_r: f64,
    /// Collision radius, also the resting height of the centre above the plane (m).
    pub radius_rho: f64,
    /// Aggregate microspine grip capacity (N).
    pub f_load: f64,
    /// Grip sigmoid steepness (1/N).
    #[serde(default = "default_sigmoid_k")]
    pub sigmoid_k: f64,
    /// Maximum thrust magnitude (N).
    pub t_max: f64,
    /// Thrust impulse budget (N·s).
    pub fuel_budget: f64,
}

pub(crate) fn default_sigmoid_k() -> f64 {
    crate::grip::DEFAULT_SIGMOID_K
}

impl RobotSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.m_r > 0.0, "m_r", "must be positive")?;
        ensure(self.radius_rho > 0.0, "radius_rho", "must be positive")?;
        ensure(self.f_load >= 0.0, "f_load", "must be non-negative")?;
        ensure(self.sigmoid_k > 0.0, "sigmoid_k", "must be positive")?;
        ensure(self.t_max > 0.0, "t_max", "must be positive")?;
        ensure(self.fuel_budget >= 0.0, "fuel_budget", "must be non-negative")
    }
}

impl Default for RobotSpec {
    fn default() -> Self {
        Self {
            m_r: 1.0,
            radius_rho: 0.15,
            f_load: 150.0,
            sigmoid_k: crate::grip::DEFAULT_SIGMOID_K,
            t_max: 40.0,
            fuel_budget: 1.0e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadSpec {
    /// Mass (kg).
    #[serde(rename = "M")]
    pub mass: f64,
    /// Yaw moment of inertia (kg·m²).
    #[serde(rename = "I_z")]
    pub inertia_z: f64,
    pub disk_radius: f64,
    /// Rotational stiffness (N·m/rad).
    #[serde(default = "default_rot")]
    pub k_r: f64,
    /// Rotational damping (N·m·s/rad).
    #[serde(default = "default_rot")]
    pub c_r: f64,
    /// Body-frame tether attachment points, one per robot (m).
    pub attachments: Vec<Vec2>,
}

fn default_rot() -> f64 {
    0.5
}

/// Relative tolerance on `|p_i| == disk_radius`.
pub const PERIMETER_TOL: f64 = 1e-6;

impl PayloadSpec {
    /// Attachments at the given perimeter angles (degrees, counter-clockwise from body `x`).
    pub fn with_attachment_angles(mut self, angles_deg: &[f64]) -> Self {
        self.attachments = angles_deg
            .iter()
            .map(|a| {
                let a = a.to_radians();
                Vec2::new(self.disk_radius * a.cos(), self.disk_radius * a.sin())
            })
            .collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.mass > 0.0, "M", "must be positive")?;
        ensure(self.inertia_z > 0.0, "I_z", "must be positive")?;
        ensure(self.disk_radius > 0.0, "disk_radius", "must be positive")?;
        for p in &self.attachments {
            ensure(
                (p.norm() - self.disk_radius).abs() <= PERIMETER_TOL * self.disk_radius,
                "attachments",
                "every attachment must lie on the disk perimeter",
            )?;
        }
        Ok(())
    }
}

impl Default for PayloadSpec {
    fn default() -> Self {
        Self {
            mass: 10.0,
            inertia_z: 5.0,
            disk_radius: 1.0,
            k_r: 0.5,
            c_r: 0.5,
            attachments: Vec::new(),
        }
    }
}

/// Kelvin-Voigt tether.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetherSpec {
    pub k_t: f64,
    pub c_t: f64,
    pub l_0: f64,
}

impl TetherSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.k_t >= 0.0, "k_t", "must be non-negative")?;
        ensure(self.c_t >= 0.0, "c_t", "must be non-negative")?;
        ensure(self.l_0 > 0.0, "l_0", "must be positive")
    }
}

impl Default for TetherSpec {
    fn default() -> Self {
        Self {
            k_t: 50.0,
            c_t: 20.0,
            l_0: 1.0,
        }
    }
}

/// Complete kinematic state of `N` robots plus the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub robot_pos: Vec<Vec3>,
    pub robot_vel: Vec<Vec3>,
    pub payload_pos: Vec3,
    pub payload_vel: Vec3,
    pub yaw: f64,
    pub yaw_rate: f64,
    pub gripped: Vec<bool>,
    pub fuel_used: Vec<f64>,
}

impl SystemState {
    /// Robots at rest at `robot_pos`, payload at rest at `payload_pos`, all gripped.
    pub fn at_rest(robot_pos: Vec<Vec3>, payload_pos: Vec3) -> Self {
        let n = robot_pos.len();
        Self {
            t: 0.0,
            robot_vel: vec![Vec3::zeros(); n],
            robot_pos,
            payload_pos,
            payload_vel: Vec3::zeros(),
            yaw: 0.0,
            yaw_rate: 0.0,
            gripped: vec![true; n],
            fuel_used: vec![0.0; n],
        }
    }

    pub fn robot_count(&self) -> usize {
        self.robot_pos.len()
    }

    pub fn check_lengths(&self) -> Result<()> {
        let n = self.robot_pos.len();
        if self.robot_vel.len() != n || self.gripped.len() != n || self.fuel_used.len() != n {
            return Err(crate::Error::SizeMismatch(format!(
                "state vectors disagree on robot count (pos {n}, vel {}, gripped {}, fuel {})",
                self.robot_vel.len(),
                self.gripped.len(),
                self.fuel_used.len()
            )));
        }
        Ok(())
    }

    /// Centre of mass of the robots.
    pub fn robot_centroid(&self) -> Vec3 {
        let n = self.robot_pos.len().max(1) as f64;
        self.robot_pos.iter().sum::<Vec3>() / n
    }
}
