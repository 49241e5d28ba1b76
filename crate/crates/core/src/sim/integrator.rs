use crate::error::{Error, Result};
use crate::grip::grip_force;
use crate::Vec3;

use super::forces::{attachment_world, plane_contact, tether_force, TetherKinematics};
use super::{friction_force, gravity_accel, ScenarioSpec, SystemState};

/// Result of one integrator step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SystemState,
    /// Thrust actually applied after grip and fuel coercion.
    pub applied_thrust: Vec<Vec3>,
    /// Robots whose commanded thrust was dropped because the budget ran out.
    pub fuel_exhausted: Vec<bool>,
    /// Robots that were commanded to grip but exceeded capacity this step.
    pub slipped: Vec<usize>,
    /// Tether force on each robot (the payload feels the negation).
    pub tether_forces: Vec<Vec3>,
    /// Load each gripped robot asked its spines to carry (N).
    pub grip_demand: Vec<f64>,
}

/// Advance the coupled system one semi-implicit Euler step.
///
/// `grips[i]` is the commanded grip. A gripped robot within capacity is
/// anchored: its velocity is zeroed and its position held. A gripped robot
/// whose demanded load exceeds `f_load` slips: the grip releases and only the
/// sigmoid grip force opposes its load for that step. Thrust is ignored while
/// gripped.
pub fn step(
    state: &SystemState,
    thrusts: &[Vec3],
    grips: &[bool],
    scenario: &ScenarioSpec,
    dt: f64,
) -> Result<StepOutcome> {
    let n = state.robot_count();
    state.check_lengths()?;
    if thrusts.len() != n || grips.len() != n || scenario.robots.len() != n {
        return Err(Error::SizeMismatch(format!(
            "{n} robots in state, {} thrusts, {} grips, {} robot specs",
            thrusts.len(),
            grips.len(),
            scenario.robots.len()
        )));
    }
    if scenario.payload.spec.attachments.len() != n {
        return Err(Error::SizeMismatch(format!(
            "{n} robots but {} attachments",
            scenario.payload.spec.attachments.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(crate::error::invalid("dt", "must be positive"));
    }

    let world = &scenario.world;
    let g = gravity_accel(world);
    let mut next = state.clone();
    let mut applied = vec![Vec3::zeros(); n];
    let mut exhausted = vec![false; n];
    let mut slipped = Vec::new();
    let mut tethers = Vec::with_capacity(n);
    let mut demands = vec![0.0; n];

    let mut payload_force = Vec3::zeros();
    let mut payload_torque = 0.0;

    for i in 0..n {
        let robot = &scenario.robots[i].spec;
        let thrust = thrusts[i];
        let magnitude = thrust.norm();
        if magnitude > robot.t_max * (1.0 + 1e-12) {
            return Err(Error::ThrustLimit {
                robot: i,
                requested: magnitude,
                limit: robot.t_max,
            });
        }
        let thrust = if grips[i] {
            Vec3::zeros()
        } else if state.fuel_used[i] + magnitude * dt > robot.fuel_budget {
            if magnitude > 0.0 {
                exhausted[i] = true;
            }
            Vec3::zeros()
        } else {
            thrust
        };
        applied[i] = thrust;

        let attach = scenario.payload.spec.attachments[i];
        let kin = TetherKinematics::from_state(state, i, attach);
        let f_t = tether_force(&kin, &scenario.tether);
        tethers.push(f_t);

        payload_force -= f_t;
        let arm = attachment_world(&Vec3::zeros(), state.yaw, &attach);
        // torque of the reaction -f_t applied at the rotated attachment point
        payload_torque += arm.x * (-f_t.y) - arm.y * (-f_t.x);

        let pos = state.robot_pos[i];
        let vel = state.robot_vel[i];
        let contact = plane_contact(pos.z - robot.radius_rho, vel.z, world);
        let load = f_t + robot.m_r * g + Vec3::new(0.0, 0.0, contact) + thrust;

        let mut net = load;
        if grips[i] {
            let demand = load.norm();
            demands[i] = demand;
            if demand <= robot.f_load {
                next.robot_vel[i] = Vec3::zeros();
                next.robot_pos[i] = pos;
                next.gripped[i] = true;
                continue;
            }
            slipped.push(i);
            let hold = grip_force(demand, robot.f_load, robot.sigmoid_k);
            net -= load * (hold / demand);
        }
        next.gripped[i] = false;
        let v = vel + net / robot.m_r * dt;
        next.robot_vel[i] = v;
        next.robot_pos[i] = pos + v * dt;
        next.fuel_used[i] = state.fuel_used[i] + thrust.norm() * dt;
    }

    let payload = &scenario.payload.spec;
    let contact = plane_contact(state.payload_pos.z, state.payload_vel.z, world);
    payload_force += payload.mass * g
        + Vec3::new(0.0, 0.0, contact)
        + friction_force(&state.payload_vel, world);
    let v = state.payload_vel + payload_force / payload.mass * dt;
    next.payload_vel = v;
    next.payload_pos = state.payload_pos + v * dt;

    let yaw_acc =
        (payload_torque - payload.k_r * state.yaw - payload.c_r * state.yaw_rate) / payload.inertia_z;
    next.yaw_rate = state.yaw_rate + yaw_acc * dt;
    next.yaw = state.yaw + next.yaw_rate * dt;
    next.t = state.t + dt;

    Ok(StepOutcome {
        state: next,
        applied_thrust: applied,
        fuel_exhausted: exhausted,
        slipped,
        tether_forces: tethers,
        grip_demand: demands,
    })
}

/// Unsigned in-plane angle between the downslope axis and the vector from the
/// robots' centre of mass to the payload centre.
pub fn oscillation_angle(state: &SystemState) -> f64 {
    let cm = state.robot_centroid();
    let d = state.payload_pos - cm;
    let planar = (d.x * d.x + d.y * d.y).sqrt();
    if planar < 1e-12 {
        return 0.0;
    }
    (-d.y / planar).clamp(-1.0, 1.0).acos()
}
