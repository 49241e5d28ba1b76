use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::{Vec2, Vec3};

use super::forces::attachment_world;
use super::{PayloadSpec, RobotSpec, SystemState, TetherSpec, WorldParams, DEFAULT_DT};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSetup {
    #[serde(flatten)]
    pub spec: RobotSpec,
    /// Initial centre position. When absent the robot is placed radially
    /// outward from its attachment node with the tether exactly at rest length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Vec3>,
}

impl From<RobotSpec> for RobotSetup {
    fn from(spec: RobotSpec) -> Self {
        Self {
            spec,
            position: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadSetup {
    #[serde(flatten)]
    pub spec: PayloadSpec,
    /// Initial payload position (m).
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerSpec {
    /// Integrator step (s).
    pub dt: f64,
    /// Trajectory sampling interval (s); rounded to a whole number of steps.
    pub sample_interval: f64,
    /// Episode time limit (s).
    pub duration: f64,
    /// Hop length along `goal_dir` (m).
    pub hop_len: f64,
    /// In-plane travel direction; normalised on use.
    pub goal_dir: Vec2,
    /// Number of scheduled hops.
    pub n_hops: usize,
    /// Gripped dwell after each landing (s).
    pub settle_time: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Wait before a slipped robot retries its grip (s).
    pub regrip_delay: f64,
    /// Longest a robot may coast after its thrust window before a grip is forced (s).
    pub max_coast: f64,
    /// Feed the launch-time tether pull to the hop solver as a constant external force.
    pub compensate_tether: bool,
}

impl Default for ControllerSpec {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            sample_interval: 0.01,
            duration: 60.0,
            hop_len: 0.4,
            goal_dir: Vec2::new(0.0, 1.0),
            n_hops: 30,
            settle_time: 1.0,
            tau_min: 0.3,
            tau_max: 1.0,
            regrip_delay: 0.05,
            max_coast: 2.0,
            compensate_tether: true,
        }
    }
}

impl ControllerSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.dt > 0.0, "controller.dt", "must be positive")?;
        ensure(
            self.sample_interval >= self.dt,
            "controller.sample_interval",
            "must be at least dt",
        )?;
        ensure(self.duration >= 0.0, "controller.duration", "must be non-negative")?;
        ensure(self.hop_len > 0.0, "controller.hop_len", "must be positive")?;
        ensure(
            self.goal_dir.norm() > 0.0,
            "controller.goal_dir",
            "must be non-zero",
        )?;
        ensure(self.settle_time >= 0.0, "controller.settle_time", "must be non-negative")?;
        ensure(
            self.tau_min > 0.0 && self.tau_max >= self.tau_min,
            "controller.tau_min",
            "need 0 < tau_min <= tau_max",
        )
    }

    /// Integrator steps between trajectory samples.
    pub fn sample_every(&self) -> usize {
        ((self.sample_interval / self.dt).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub run: u64,
}

/// A complete climbing scenario: world, robots, payload, tethers, controller, seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    pub world: WorldParams,
    pub robots: Vec<RobotSetup>,
    pub payload: PayloadSetup,
    #[serde(rename = "tethers")]
    pub tether: TetherSpec,
    #[serde(default)]
    pub controller: ControllerSpec,
    #[serde(default)]
    pub seeds: Seeds,
}

fn default_version() -> u32 {
    SCENARIO_VERSION
}

impl ScenarioSpec {
    /// Three robots hauling a 10 kg, 1 m disk up a 15° slope from `[3, 2, 0]`.
    pub fn climb_up() -> Self {
        let payload = PayloadSpec::default().with_attachment_angles(&[45.0, 90.0, 135.0]);
        Self {
            version: SCENARIO_VERSION,
            world: WorldParams::default(),
            robots: vec![RobotSpec::default().into(); 3],
            payload: PayloadSetup {
                spec: payload,
                position: Vec3::new(3.0, 2.0, 0.0),
            },
            tether: TetherSpec::default(),
            controller: ControllerSpec::default(),
            seeds: Seeds::default(),
        }
    }

    /// The same team lowering the payload from `[3, 8, 0]`.
    pub fn climb_down() -> Self {
        let mut s = Self::climb_up();
        s.payload.position = Vec3::new(3.0, 8.0, 0.0);
        s.controller.goal_dir = Vec2::new(0.0, -1.0);
        s
    }

    pub fn robot_count(&self) -> usize {
        self.robots.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_VERSION {
            return Err(Error::Config(format!(
                "unsupported scenario version {} (expected {SCENARIO_VERSION})",
                self.version
            )));
        }
        self.world.validate()?;
        self.payload.spec.validate()?;
        self.tether.validate()?;
        self.controller.validate()?;
        for r in &self.robots {
            r.spec.validate()?;
        }
        if self.robots.len() != self.payload.spec.attachments.len() {
            return Err(Error::SizeMismatch(format!(
                "{} robots but {} attachments",
                self.robots.len(),
                self.payload.spec.attachments.len()
            )));
        }
        Ok(())
    }

    /// Replace the attachment layout, one default-spec robot per attachment.
    pub fn with_attachments(&self, attachments: Vec<Vec2>) -> Self {
        let template = self
            .robots
            .first()
            .map(|r| r.spec)
            .unwrap_or_default();
        let mut s = self.clone();
        s.robots = vec![template.into(); attachments.len()];
        s.payload.spec.attachments = attachments;
        s
    }

    /// Nominal robot position for attachment `attach`: radially outward with
    /// the tether at exactly rest length and the robot resting on the plane.
    pub fn nominal_robot_position(&self, attach: &Vec2, radius_rho: f64) -> Vec3 {
        self.radial_robot_position(attach, radius_rho, self.tether.l_0)
    }

    /// Tether stretches that hold the payload against its downslope weight:
    /// the minimum-norm non-negative solution of `Σ k_t s_i u_i = M g sinθ ŷ`
    /// over the radial attachment directions `u_i`.
    pub fn pretension_stretches(&self) -> Vec<f64> {
        let attachments = &self.payload.spec.attachments;
        let n = attachments.len();
        if n == 0 || self.tether.k_t <= 0.0 {
            return vec![0.0; n];
        }
        let dirs = nalgebra::Matrix2xX::from_columns(
            &attachments
                .iter()
                .map(|a| if a.norm() > 0.0 { a.normalize() } else { Vec2::new(0.0, 1.0) })
                .collect::<Vec<_>>(),
        );
        let w = &self.world;
        let load = Vec2::new(0.0, self.payload.spec.mass * w.g * w.slope_theta.sin() / self.tether.k_t);
        match dirs.clone().pseudo_inverse(1e-12) {
            Ok(pinv) => (pinv * load).iter().map(|s| s.max(0.0)).collect(),
            Err(_) => vec![0.0; n],
        }
    }

    /// Robot radially outward from `attach` with the tether at `length` and
    /// the robot resting on the plane.
    fn radial_robot_position(&self, attach: &Vec2, radius_rho: f64, length: f64) -> Vec3 {
        let anchor = attachment_world(&self.payload.position, 0.0, attach);
        let dir = if attach.norm() > 0.0 {
            attach.normalize()
        } else {
            Vec2::new(0.0, 1.0)
        };
        let planar = (length * length - radius_rho * radius_rho).max(0.0).sqrt();
        Vec3::new(anchor.x + dir.x * planar, anchor.y + dir.y * planar, radius_rho)
    }

    /// All bodies at rest, every robot gripped. Robots without an explicit
    /// position sit radially outward on tethers pre-stretched by
    /// [`Self::pretension_stretches`], so the payload starts near equilibrium.
    pub fn initial_state(&self) -> SystemState {
        let stretch = self.pretension_stretches();
        let positions = self
            .robots
            .iter()
            .zip(&self.payload.spec.attachments)
            .zip(stretch)
            .map(|((r, a), s)| {
                r.position.unwrap_or_else(|| {
                    self.radial_robot_position(a, r.spec.radius_rho, self.tether.l_0 + s)
                })
            })
            .collect();
        SystemState::at_rest(positions, self.payload.position)
    }

    /// Read a scenario from TOML (`.toml`) or JSON (anything else).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: Self = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text)?
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let s = ScenarioSpec::climb_down();
        let text = s.to_toml().unwrap();
        let back: ScenarioSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn nominal_positions_sit_at_rest_length() {
        let s = ScenarioSpec::climb_up();
        for a in &s.payload.spec.attachments {
            let anchor = attachment_world(&s.payload.position, 0.0, a);
            let len = (anchor - s.nominal_robot_position(a, 0.15)).norm();
            assert!((len - s.tether.l_0).abs() < 1e-12);
        }
    }

    #[test]
    fn pretension_balances_downslope_weight() {
        // 45/90/135 degree layout: stretches c·(1/√2, 1, 1/√2) with
        // 2·k_t·c = M g sin θ
        let s = ScenarioSpec::climb_up();
        let w = &s.world;
        let c = s.payload.spec.mass * w.g * w.slope_theta.sin() / (2.0 * s.tether.k_t);
        let expect = [c / 2f64.sqrt(), c, c / 2f64.sqrt()];
        let st = s.initial_state();
        for (i, a) in s.payload.spec.attachments.iter().enumerate() {
            assert!((s.pretension_stretches()[i] - expect[i]).abs() < 1e-12);
            let anchor = attachment_world(&st.payload_pos, 0.0, a);
            let len = (anchor - st.robot_pos[i]).norm();
            assert!((len - s.tether.l_0 - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn pretension_never_negative() {
        let s = ScenarioSpec::climb_up().with_attachments(vec![Vec2::new(0.0, -1.0), Vec2::new(1.0, 0.0)]);
        assert!(s.pretension_stretches().iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn attachment_count_must_match() {
        let mut s = ScenarioSpec::climb_up();
        s.robots.pop();
        assert!(s.validate().is_err());
    }

    #[test]
    fn off_perimeter_attachment_rejected() {
        let mut s = ScenarioSpec::climb_up();
        s.payload.spec.attachments[0] = Vec2::new(0.5, 0.0);
        assert!(s.validate().is_err());
    }
}
