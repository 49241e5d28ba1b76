use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{
    gravity_accel, mechanical_energy, oscillation_angle, step, tether_force, HopRecord,
    ScenarioSpec, SlipEvent, SystemState, TetherKinematics, Trajectory, TrajectoryRecord,
};
use crate::{Vec2, Vec3};

use super::hop::{solve_hop, HopProblem, HopSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClimbEntry {
    pub robot: usize,
    /// Planned launch point.
    pub start: Vec3,
    /// Planned landing point.
    pub target: Vec3,
    pub hop: HopSolution,
    /// Gripped dwell after landing (s).
    pub dwell: f64,
}

impl ClimbEntry {
    pub fn displacement(&self) -> Vec3 {
        self.target - self.start
    }
}

/// Hops executed strictly one after another.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClimbSchedule {
    pub entries: Vec<ClimbEntry>,
}

impl ClimbSchedule {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn robot_order(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.robot).collect()
    }

    /// Nominal `(launch, landing)` times when each hop starts as soon as the
    /// previous dwell ends, beginning after an initial `lead` settle.
    pub fn nominal_windows(&self, lead: f64) -> Vec<(f64, f64)> {
        let mut t = lead;
        self.entries
            .iter()
            .map(|e| {
                let w = (t, t + e.hop.tau);
                t += e.hop.tau + e.dwell;
                w
            })
            .collect()
    }
}

/// Round-robin schedule, lowest index first: hop `k` moves robot `k mod N`
/// by `hop_len` along `goal_dir` from where its previous hop was planned to land.
pub fn plan_climb_sequence(
    scenario: &ScenarioSpec,
    state: &SystemState,
    goal_dir: Vec2,
    hop_len: f64,
    n_hops: usize,
) -> Result<ClimbSchedule> {
    if !(hop_len > 0.0) {
        return Err(crate::error::invalid("hop_len", "must be positive"));
    }
    if goal_dir.norm() == 0.0 {
        return Err(crate::error::invalid("goal_dir", "must be non-zero"));
    }
    if state.gripped.iter().any(|g| !g) {
        return Err(crate::error::invalid("state", "all robots must be gripped"));
    }
    let n = state.robot_count();
    if n == 0 || scenario.robots.len() != n {
        return Err(Error::SizeMismatch(format!(
            "{n} robots in state, {} in scenario",
            scenario.robots.len()
        )));
    }
    let dir = goal_dir.normalize() * hop_len;
    let step = Vec3::new(dir.x, dir.y, 0.0);
    let g = gravity_accel(&scenario.world);
    let c = &scenario.controller;
    let mut planned = state.robot_pos.clone();
    let mut entries = Vec::with_capacity(n_hops);
    for k in 0..n_hops {
        let robot = k % n;
        let spec = &scenario.robots[robot].spec;
        let start = planned[robot];
        let target = start + step;
        let problem = HopProblem {
            r_0: start,
            r_tau: target,
            m_r: spec.m_r,
            f_g: g,
            t_max: spec.t_max,
            tau_bounds: (c.tau_min, c.tau_max),
            external_force: Vec3::zeros(),
        };
        let hop = solve_hop(&problem).map_err(|e| match e {
            Error::HopInfeasible { required, limit } => Error::ScheduleInfeasible {
                robot,
                hop: k,
                required,
                limit,
            },
            other => other,
        })?;
        entries.push(ClimbEntry {
            robot,
            start,
            target,
            hop,
            dwell: c.settle_time,
        });
        planned[robot] = target;
    }
    Ok(ClimbSchedule { entries })
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    Settle { until: f64 },
    Flight { hop: ActiveHop, steps_left: usize },
    Coast { hop: ActiveHop, deadline: f64 },
    Landing { hop: ActiveHop, retry_at: f64 },
    Done,
}

#[derive(Debug, Clone, Copy)]
struct ActiveHop {
    entry: usize,
    robot: usize,
    start: Vec3,
    target: Vec3,
    sol: HopSolution,
    t_launch: f64,
    fuel_at_launch: f64,
    slack: bool,
}

/// Execute `schedule` through the integrator.
///
/// Each hop releases one robot, re-solves its hop from the actual launch
/// point with the scheduled displacement, applies the constant thrust for
/// `tau`, and re-grips once the robot is back on the plane. The episode ends
/// when the schedule (plus a final dwell) completes, when every robot has run
/// out of fuel, at the controller time limit, or when all robots slip at once.
pub fn run_episode(scenario: &ScenarioSpec, schedule: &ClimbSchedule) -> Result<Trajectory> {
    scenario.validate()?;
    let n = scenario.robot_count();
    if let Some(bad) = schedule.entries.iter().find(|e| e.robot >= n) {
        return Err(Error::SizeMismatch(format!(
            "schedule names robot {} but scenario has {n}",
            bad.robot
        )));
    }
    let c = &scenario.controller;
    let dt = c.dt;
    let every = c.sample_every();
    let g = gravity_accel(&scenario.world);

    let mut state = scenario.initial_state();
    let mut traj = Trajectory {
        sample_interval: every as f64 * dt,
        energy_initial: mechanical_energy(&state, scenario),
        ..Trajectory::default()
    };
    let mut grips = vec![true; n];
    let mut retry_at: Vec<Option<f64>> = vec![None; n];
    let mut out_of_fuel = vec![false; n];
    let mut thrusts = vec![Vec3::zeros(); n];
    let mut next_entry = 0;
    let mut phase = Phase::Settle {
        until: c.settle_time,
    };
    let mut k: usize = 0;

    loop {
        let t = state.t;
        let on_sample = k.is_multiple_of(every);

        // controller decisions for this step
        thrusts.iter_mut().for_each(|th| *th = Vec3::zeros());
        for i in 0..n {
            if let Some(at) = retry_at[i] {
                if t >= at {
                    retry_at[i] = None;
                    grips[i] = true;
                }
            }
        }
        phase = match phase {
            Phase::Settle { until } if t >= until => {
                launch_next(scenario, &state, schedule, &mut next_entry, &mut out_of_fuel, g)?
                    .map(|hop| {
                        grips[hop.robot] = false;
                        retry_at[hop.robot] = None;
                        Phase::Flight {
                            hop,
                            steps_left: ((hop.sol.tau / dt).round() as usize).max(1),
                        }
                    })
                    .unwrap_or(Phase::Done)
            }
            Phase::Flight { hop, steps_left: 0 } => Phase::Coast {
                hop,
                deadline: t + c.max_coast,
            },
            Phase::Coast { hop, deadline } => {
                let rho = scenario.robots[hop.robot].spec.radius_rho;
                if state.robot_pos[hop.robot].z <= rho || t >= deadline {
                    grips[hop.robot] = true;
                    Phase::Landing { hop, retry_at: t }
                } else {
                    Phase::Coast { hop, deadline }
                }
            }
            Phase::Landing { hop, retry_at: at } => {
                grips[hop.robot] = t >= at;
                Phase::Landing { hop, retry_at: at }
            }
            other => other,
        };
        if let Phase::Flight { hop, .. } = phase {
            thrusts[hop.robot] = hop.sol.thrust;
        }

        if on_sample {
            traj.records.push(TrajectoryRecord {
                state: state.clone(),
                thrusts: thrusts.clone(),
                fuel_exhausted: out_of_fuel.clone(),
                vartheta: oscillation_angle(&state),
            });
            let finished = matches!(phase, Phase::Done)
                || t >= c.duration - 0.5 * dt
                || traj.aborted.is_some();
            if finished {
                break;
            }
        }

        let outcome = step(&state, &thrusts, &grips, scenario, dt)?;
        for (i, &ex) in outcome.fuel_exhausted.iter().enumerate() {
            out_of_fuel[i] |= ex;
        }
        for &i in &outcome.slipped {
            traj.slips.push(SlipEvent {
                t: outcome.state.t,
                robot: i,
                demand: outcome.grip_demand[i],
                capacity: scenario.robots[i].spec.f_load,
            });
            grips[i] = false;
            retry_at[i] = Some(outcome.state.t + c.regrip_delay);
        }
        if n > 0 && outcome.slipped.len() == n {
            traj.aborted = Some(format!("all {n} robots slipped at t = {}", outcome.state.t));
        }

        phase = match phase {
            Phase::Flight { mut hop, steps_left } => {
                hop.slack &= outcome.tether_forces[hop.robot] == Vec3::zeros();
                Phase::Flight {
                    hop,
                    steps_left: steps_left - 1,
                }
            }
            Phase::Coast { mut hop, deadline } => {
                hop.slack &= outcome.tether_forces[hop.robot] == Vec3::zeros();
                Phase::Coast { hop, deadline }
            }
            Phase::Landing { hop, .. } if outcome.state.gripped[hop.robot] => {
                let landing = outcome.state.robot_pos[hop.robot];
                traj.hops.push(HopRecord {
                    robot: hop.robot,
                    t_launch: hop.t_launch,
                    t_land: outcome.state.t,
                    start: hop.start,
                    target: hop.target,
                    landing,
                    landing_error: (landing - hop.target).norm(),
                    thrust: hop.sol.thrust,
                    tau: hop.sol.tau,
                    impulse: outcome.state.fuel_used[hop.robot] - hop.fuel_at_launch,
                    slack_in_flight: hop.slack,
                });
                let dwell = schedule.entries[hop.entry].dwell;
                Phase::Settle {
                    until: outcome.state.t + dwell,
                }
            }
            Phase::Landing { hop, .. } => {
                grips[hop.robot] = false;
                Phase::Landing {
                    hop,
                    retry_at: outcome.state.t + c.regrip_delay,
                }
            }
            other => other,
        };
        if let Phase::Landing { hop, .. } = phase {
            // the landing robot's retries are driven by the phase itself
            retry_at[hop.robot] = None;
        }

        state = outcome.state;
        k += 1;
    }

    traj.energy_final = mechanical_energy(&state, scenario);
    Ok(traj)
}

/// Pick the next schedule entry whose robot can still pay for its hop.
fn launch_next(
    scenario: &ScenarioSpec,
    state: &SystemState,
    schedule: &ClimbSchedule,
    next_entry: &mut usize,
    out_of_fuel: &mut [bool],
    g: Vec3,
) -> Result<Option<ActiveHop>> {
    let c = &scenario.controller;
    while *next_entry < schedule.len() {
        if out_of_fuel.iter().all(|&x| x) {
            return Ok(None);
        }
        let idx = *next_entry;
        *next_entry += 1;
        let entry = &schedule.entries[idx];
        let i = entry.robot;
        if out_of_fuel[i] {
            continue;
        }
        let spec = &scenario.robots[i].spec;
        let start = state.robot_pos[i];
        let target = start + entry.displacement();
        let external_force = if c.compensate_tether {
            expected_tether_pull(scenario, state, i, target)
        } else {
            Vec3::zeros()
        };
        let problem = HopProblem {
            r_0: start,
            r_tau: target,
            m_r: spec.m_r,
            f_g: g,
            t_max: spec.t_max,
            tau_bounds: (c.tau_min, c.tau_max),
            external_force,
        };
        let sol = solve_hop(&problem).unwrap_or(entry.hop);
        let remaining = spec.fuel_budget - state.fuel_used[i];
        if sol.thrust.norm() * sol.tau > remaining {
            out_of_fuel[i] = true;
            continue;
        }
        return Ok(Some(ActiveHop {
            entry: idx,
            robot: i,
            start,
            target,
            sol,
            t_launch: state.t,
            fuel_at_launch: state.fuel_used[i],
            slack: true,
        }));
    }
    Ok(None)
}

/// Mean of the tether force at launch and at the target with the payload
/// frozen; a first-order estimate of the pull felt over the flight.
fn expected_tether_pull(scenario: &ScenarioSpec, state: &SystemState, robot: usize, target: Vec3) -> Vec3 {
    let attach = scenario.payload.spec.attachments[robot];
    let launch = TetherKinematics::from_state(state, robot, attach);
    let landed = TetherKinematics {
        robot_pos: target,
        robot_vel: Vec3::zeros(),
        payload_vel: Vec3::zeros(),
        yaw_rate: 0.0,
        ..launch
    };
    0.5 * (tether_force(&launch, &scenario.tether) + tether_force(&landed, &scenario.tether))
}
