use serde::{Deserialize, Serialize};

use super::forces::TetherKinematics;
use super::{gravity_accel, ScenarioSpec, SystemState};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub gravitational: f64,
    pub tether_elastic: f64,
    pub rotational_spring: f64,
    pub contact_elastic: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic
            + self.gravitational
            + self.tether_elastic
            + self.rotational_spring
            + self.contact_elastic
    }
}

/// Mechanical energy of robots plus payload. Gravitational energy is
/// measured from the incline-frame origin.
pub fn mechanical_energy(state: &SystemState, scenario: &ScenarioSpec) -> EnergyBreakdown {
    let world = &scenario.world;
    let g = gravity_accel(world);
    let payload = &scenario.payload.spec;
    let n = world.contact_exp_n;
    let contact_pe = |height: f64| {
        if height < 0.0 {
            world.k_c * (-height).powf(n + 1.0) / (n + 1.0)
        } else {
            0.0
        }
    };

    let mut e = EnergyBreakdown {
        kinetic: 0.5 * payload.mass * state.payload_vel.norm_squared()
            + 0.5 * payload.inertia_z * state.yaw_rate * state.yaw_rate,
        gravitational: -payload.mass * g.dot(&state.payload_pos),
        rotational_spring: 0.5 * payload.k_r * state.yaw * state.yaw,
        contact_elastic: contact_pe(state.payload_pos.z),
        tether_elastic: 0.0,
    };
    for (i, setup) in scenario.robots.iter().enumerate() {
        let robot = &setup.spec;
        let pos = state.robot_pos[i];
        e.kinetic += 0.5 * robot.m_r * state.robot_vel[i].norm_squared();
        e.gravitational -= robot.m_r * g.dot(&pos);
        e.contact_elastic += contact_pe(pos.z - robot.radius_rho);
        if let Some(attach) = payload.attachments.get(i) {
            let len = TetherKinematics::from_state(state, i, *attach).chord().norm();
            let stretch = (len - scenario.tether.l_0).max(0.0);
            e.tether_elastic += 0.5 * scenario.tether.k_t * stretch * stretch;
        }
    }
    e
}
