use crate::error::{Error, Result};
use crate::{Vec2, Vec3};

use super::{SystemState, TetherSpec, WorldParams};

/// Gravity expressed in the incline frame: `[0, -g sin θ, -g cos θ]`.
pub fn gravity_accel(world: &WorldParams) -> Vec3 {
    let (s, c) = world.slope_theta.sin_cos();
    Vec3::new(0.0, -world.g * s, -world.g * c)
}

/// Body-frame attachment point rotated by `yaw` about the plane normal and
/// offset by the payload position.
pub fn attachment_world(payload_pos: &Vec3, yaw: f64, attach: &Vec2) -> Vec3 {
    let (s, c) = yaw.sin_cos();
    payload_pos + Vec3::new(c * attach.x - s * attach.y, s * attach.x + c * attach.y, 0.0)
}

/// Everything needed to evaluate one tether.
#[derive(Debug, Clone, Copy)]
pub struct TetherKinematics {
    pub robot_pos: Vec3,
    pub robot_vel: Vec3,
    pub payload_pos: Vec3,
    pub payload_vel: Vec3,
    pub yaw: f64,
    pub yaw_rate: f64,
    pub attach: Vec2,
}

impl TetherKinematics {
    pub fn from_state(state: &SystemState, robot: usize, attach: Vec2) -> Self {
        Self {
            robot_pos: state.robot_pos[robot],
            robot_vel: state.robot_vel[robot],
            payload_pos: state.payload_pos,
            payload_vel: state.payload_vel,
            yaw: state.yaw,
            yaw_rate: state.yaw_rate,
            attach,
        }
    }

    /// `l = R + Aᵀp − r`, pointing from the robot to its attachment point.
    pub fn chord(&self) -> Vec3 {
        attachment_world(&self.payload_pos, self.yaw, &self.attach) - self.robot_pos
    }

    /// Time derivative of [`Self::chord`].
    pub fn chord_rate(&self) -> Vec3 {
        let arm = attachment_world(&Vec3::zeros(), self.yaw, &self.attach);
        let spin = Vec3::new(-self.yaw_rate * arm.y, self.yaw_rate * arm.x, 0.0);
        self.payload_vel + spin - self.robot_vel
    }
}

/// Kelvin-Voigt tether force acting on the robot. The payload receives the
/// exact negation. Zero while slack; tension is clamped non-negative so a
/// fast-retracting stretched tether never pushes.
pub fn tether_force(kin: &TetherKinematics, spec: &TetherSpec) -> Vec3 {
    let l = kin.chord();
    let len = l.norm();
    if len <= spec.l_0 || len == 0.0 {
        return Vec3::zeros();
    }
    let u = l / len;
    let length_rate = kin.chord_rate().dot(&u);
    let tension = spec.k_t * (len - spec.l_0) + spec.c_t * length_rate;
    u * tension.max(0.0)
}

/// Hertz normal force `k_c δ^n + c_c δ̇`, clamped non-negative.
pub fn contact_force(delta: f64, delta_rate: f64, world: &WorldParams) -> Result<f64> {
    if delta < 0.0 {
        return Err(Error::NegativePenetration(delta));
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    let f = world.k_c * delta.powf(world.contact_exp_n) + world.c_c * delta_rate;
    Ok(f.max(0.0))
}

/// Viscous friction on the payload, opposing its velocity.
pub fn friction_force(payload_vel: &Vec3, world: &WorldParams) -> Vec3 {
    -world.mu_v * payload_vel
}

/// Normal force for a body whose lowest point sits `height` above the plane.
pub(crate) fn plane_contact(height: f64, height_rate: f64, world: &WorldParams) -> f64 {
    if height >= 0.0 {
        return 0.0;
    }
    contact_force(-height, -height_rate, world).unwrap_or(0.0)
}
