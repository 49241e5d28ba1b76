use haulbots_core::sim::{
    contact_force, friction_force, gravity_accel, mechanical_energy, step, PayloadSetup, RobotSetup,
};
use haulbots_core::{Error, PayloadSpec, RobotSpec, ScenarioSpec, SystemState, Vec2, Vec3};
use proptest::prelude::*;

/// One robot tethered to a payload that never reaches it.
fn lone_robot(theta_deg: f64) -> ScenarioSpec {
    let mut s = ScenarioSpec::climb_up().with_attachments(vec![Vec2::new(1.0, 0.0)]);
    s.world.slope_theta = theta_deg.to_radians();
    s.tether.l_0 = 100.0;
    s
}

/// Resting depth of the payload under the normal component of gravity.
fn equilibrium_depth(s: &ScenarioSpec) -> f64 {
    let w = &s.world;
    (s.payload.spec.mass * w.g * w.slope_theta.cos() / w.k_c).powf(1.0 / w.contact_exp_n)
}

fn run(s: &ScenarioSpec, state: &SystemState, grips: &[bool], steps: usize, dt: f64) -> SystemState {
    let zero = vec![Vec3::zeros(); state.robot_count()];
    let mut st = state.clone();
    for _ in 0..steps {
        st = step(&st, &zero, grips, s, dt).unwrap().state;
    }
    st
}

#[test]
fn free_fall_matches_closed_form() {
    let s = lone_robot(0.0);
    let mut state = SystemState::at_rest(vec![Vec3::new(0.0, 0.0, 10.0)], Vec3::new(50.0, 50.0, 0.0));
    state.gripped[0] = false;
    let v0 = Vec3::new(1.0, 0.5, 2.0);
    state.robot_vel[0] = v0;
    let dt = 1e-3;
    let t = 0.2;
    let end = run(&s, &state, &[false], 200, dt);
    let g = Vec3::new(0.0, 0.0, -s.world.g);
    let exact = Vec3::new(0.0, 0.0, 10.0) + v0 * t + 0.5 * g * t * t;
    let err = (end.robot_pos[0] - exact).norm();
    assert!(err < 1e-3, "error {err}");
    // semi-implicit Euler leads free fall by g·dt·t/2
    assert!((err - 0.5 * s.world.g * dt * t).abs() < 1e-9);
}

#[test]
fn gripped_system_at_rest_stays_put() {
    let mut s = ScenarioSpec::climb_up();
    s.world.slope_theta = 0.0;
    for r in &mut s.robots {
        r.spec.f_load = 1e6;
    }
    s.payload.position.z = -equilibrium_depth(&s);
    let state = s.initial_state();
    // lengthen the tethers so every one is slack
    s.tether.l_0 = 1.2;
    let end = run(&s, &state, &[true; 3], 1000, 1e-3);
    assert!((end.t - 1.0).abs() < 1e-9);
    for i in 0..3 {
        assert_eq!(end.robot_pos[i], state.robot_pos[i]);
        assert_eq!(end.robot_vel[i], Vec3::zeros());
    }
    assert!((end.payload_pos - state.payload_pos).norm() < 1e-10);
    assert!(end.payload_vel.norm() < 1e-10);
    assert_eq!(end.yaw, 0.0);
}

/// Robots pinned, payload pulled 0.3 m downslope and twisted.
fn pinned_oscillation() -> (ScenarioSpec, SystemState) {
    let mut s = ScenarioSpec::climb_up();
    for r in &mut s.robots {
        r.spec.f_load = 1e9;
    }
    s.payload.position.z = -equilibrium_depth(&s);
    let mut state = s.initial_state();
    state.payload_pos.y -= 0.3;
    state.yaw = 0.1;
    (s, state)
}

#[test]
fn pinned_oscillation_loses_energy() {
    let (s, mut state) = pinned_oscillation();
    let zero = vec![Vec3::zeros(); 3];
    let mut start = mechanical_energy(&state, &s).total();
    for _window in 0..10 {
        for _ in 0..1000 {
            state = step(&state, &zero, &[true; 3], &s, 1e-3).unwrap().state;
        }
        let end = mechanical_energy(&state, &s).total();
        assert!(end - start <= 0.01 * start.abs(), "{start} -> {end}");
        start = end;
    }
}

#[test]
fn payload_receives_negated_tether_force() {
    let mut s = ScenarioSpec::climb_up().with_attachments(vec![Vec2::new(0.0, 1.0)]);
    s.robots[0].spec.f_load = 1e9;
    let mut state = s.initial_state();
    state.payload_pos += Vec3::new(0.1, -0.4, -0.002);
    state.payload_vel = Vec3::new(0.3, -0.2, 0.05);
    state.yaw = 0.2;
    state.yaw_rate = -0.3;
    let dt = 1e-3;
    let out = step(&state, &[Vec3::zeros()], &[true], &s, dt).unwrap();
    let f_t = out.tether_forces[0];
    assert!(f_t.norm() > 1.0);
    let p = &s.payload.spec;
    let contact = contact_force(-state.payload_pos.z, -state.payload_vel.z, &s.world).unwrap();
    let other = p.mass * gravity_accel(&s.world)
        + Vec3::new(0.0, 0.0, contact)
        + friction_force(&state.payload_vel, &s.world);
    let on_payload = p.mass * (out.state.payload_vel - state.payload_vel) / dt - other;
    assert!((on_payload + f_t).norm() <= 1e-9 * f_t.norm());
}

#[test]
fn halving_dt_converges_first_order() {
    let (s, state) = pinned_oscillation();
    let finals: Vec<SystemState> = [1e-3f64, 5e-4, 2.5e-4]
        .iter()
        .map(|&dt| run(&s, &state, &[true; 3], (10.0 / dt).round() as usize, dt))
        .collect();
    let diff = |a: &SystemState, b: &SystemState| {
        ((a.payload_pos - b.payload_pos).norm_squared()
            + (a.payload_vel - b.payload_vel).norm_squared()
            + (a.yaw - b.yaw).powi(2))
        .sqrt()
    };
    let ratio = diff(&finals[0], &finals[1]) / diff(&finals[1], &finals[2]);
    assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn fuel_accumulates_and_caps() {
    let mut s = lone_robot(15.0);
    s.robots[0].spec.fuel_budget = 0.5;
    let mut state = SystemState::at_rest(vec![Vec3::new(0.0, 0.0, 5.0)], Vec3::new(50.0, 50.0, 0.0));
    state.gripped[0] = false;
    let thrust = [Vec3::new(0.0, 3.0, 4.0)];
    let mut exhausted_seen = false;
    for _ in 0..200 {
        let out = step(&state, &thrust, &[false], &s, 1e-3).unwrap();
        assert!(out.state.fuel_used[0] >= state.fuel_used[0]);
        assert!(out.state.fuel_used[0] <= 0.5 + 1e-12);
        if out.fuel_exhausted[0] {
            exhausted_seen = true;
            assert_eq!(out.applied_thrust[0], Vec3::zeros());
        }
        state = out.state;
    }
    // 5 N for 0.1 s spends the budget
    assert!(exhausted_seen);
    assert!((state.fuel_used[0] - 0.5).abs() < 5.0 * 1e-3 + 1e-12);
}

#[test]
fn over_limit_thrust_is_an_error() {
    let s = lone_robot(15.0);
    let state = SystemState::at_rest(vec![Vec3::new(0.0, 0.0, 5.0)], Vec3::new(50.0, 50.0, 0.0));
    let t = Vec3::new(0.0, 0.0, s.robots[0].spec.t_max + 1.0);
    assert!(matches!(
        step(&state, &[t], &[false], &s, 1e-3),
        Err(Error::ThrustLimit { robot: 0, .. })
    ));
}

#[test]
fn overloaded_grip_slips() {
    let mut s = ScenarioSpec::climb_up();
    for r in &mut s.robots {
        r.spec.f_load = 1.0;
    }
    let state = s.initial_state();
    let out = step(&state, &[Vec3::zeros(); 3], &[true; 3], &s, 1e-3).unwrap();
    assert_eq!(out.slipped, vec![0, 1, 2]);
    assert!(out.state.gripped.iter().all(|g| !g));
}

#[test]
fn scenario_setups_flatten_specs() {
    let setup = RobotSetup {
        spec: RobotSpec::default(),
        position: None,
    };
    let payload = PayloadSetup {
        spec: PayloadSpec::default(),
        position: Vec3::zeros(),
    };
    let json = serde_json::to_value((&setup, &payload)).unwrap();
    assert!(json[0].get("m_r").is_some());
    assert!(json[1].get("M").is_some());
}

proptest! {
    #[test]
    fn fuel_never_exceeds_budget(
        budget in 0.0f64..2.0,
        tx in -20.0f64..20.0, ty in -20.0f64..20.0, tz in 0.0f64..20.0,
    ) {
        let mut s = lone_robot(15.0);
        s.robots[0].spec.fuel_budget = budget;
        s.robots[0].spec.t_max = 40.0;
        let mut state = SystemState::at_rest(vec![Vec3::new(0.0, 0.0, 50.0)], Vec3::new(50.0, 50.0, 0.0));
        state.gripped[0] = false;
        let thrust = [Vec3::new(tx, ty, tz)];
        for _ in 0..300 {
            let next = step(&state, &thrust, &[false], &s, 1e-3).unwrap().state;
            prop_assert!(next.fuel_used[0] >= state.fuel_used[0]);
            prop_assert!(next.fuel_used[0] <= budget + 1e-12);
            prop_assert!(next.t > state.t);
            state = next;
        }
    }
}
