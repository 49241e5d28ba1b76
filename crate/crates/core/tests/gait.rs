use haulbots_core::gait::{plan_climb_sequence, run_episode, solve_hop, ClimbSchedule};
use haulbots_core::{Error, HopProblem, ScenarioSpec, Vec2, Vec3};
use proptest::prelude::*;

fn up() -> (ScenarioSpec, ClimbSchedule) {
    let s = ScenarioSpec::climb_up();
    let c = &s.controller;
    let plan = plan_climb_sequence(&s, &s.initial_state(), c.goal_dir, c.hop_len, c.n_hops).unwrap();
    (s, plan)
}

#[test]
fn round_robin_order() {
    let s = ScenarioSpec::climb_up();
    let plan = plan_climb_sequence(&s, &s.initial_state(), Vec2::new(0.0, 1.0), 0.4, 6).unwrap();
    assert_eq!(plan.robot_order(), vec![0, 1, 2, 0, 1, 2]);
    let w = plan.nominal_windows(0.0);
    assert!(w.windows(2).all(|p| p[0].1 <= p[1].0));
}

#[test]
fn zero_hops_is_empty() {
    let s = ScenarioSpec::climb_up();
    let plan = plan_climb_sequence(&s, &s.initial_state(), Vec2::new(0.0, 1.0), 0.4, 0).unwrap();
    assert!(plan.is_empty());
}

#[test]
fn unreachable_hop_names_robot_and_hop() {
    let mut s = ScenarioSpec::climb_up();
    s.robots[1].spec.t_max = 1.0;
    match plan_climb_sequence(&s, &s.initial_state(), Vec2::new(0.0, 1.0), 0.4, 6) {
        Err(Error::ScheduleInfeasible { robot, hop, required, limit }) => {
            assert_eq!((robot, hop), (1, 1));
            assert!(required > limit);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn empty_schedule_only_settles() {
    let mut s = ScenarioSpec::climb_up();
    s.controller.duration = 10.0;
    let traj = run_episode(&s, &ClimbSchedule::default()).unwrap();
    assert!(traj.payload_displacement().norm() < 0.1);
    assert!(traj.hops.is_empty());
}

#[test]
fn climb_keeps_one_robot_in_flight_and_accounts_fuel() {
    let (s, plan) = up();
    let traj = run_episode(&s, &plan).unwrap();
    assert!(traj.aborted.is_none());
    for r in &traj.records {
        assert!(r.state.gripped.iter().filter(|g| !**g).count() <= 1, "t = {}", r.state.t);
        assert!(r.thrusts.iter().filter(|t| t.norm() > 0.0).count() <= 1);
    }
    assert!(!traj.hops.is_empty());
    let fuel: f64 = traj.last().unwrap().fuel_used.iter().sum();
    let planned: f64 = traj.hops.iter().map(|h| h.thrust.norm() * h.tau).sum();
    let slack: f64 = traj.hops.iter().map(|h| h.thrust.norm() * s.controller.dt).sum();
    assert!((fuel - planned).abs() <= slack, "{fuel} vs {planned}");
    // hop records are sequential
    assert!(traj.hops.windows(2).all(|w| w[0].t_land <= w[1].t_launch));
}

#[test]
fn climb_is_deterministic() {
    let (s, plan) = up();
    let a = run_episode(&s, &plan).unwrap();
    let b = run_episode(&s, &plan).unwrap();
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
}

/// Dense grid over τ: the reference the closed-form minimiser must match.
fn grid_cost(p: &HopProblem) -> f64 {
    let (lo, hi) = p.tau_bounds;
    (0..=20_000)
        .map(|k| lo + (hi - lo) * k as f64 / 20_000.0)
        .map(|tau| p.thrust_for(tau).norm_squared())
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn hop_solver_never_beaten_by_grid(
        dx in -1.0f64..1.0, dy in -1.0f64..1.0,
        theta in 0.0f64..0.6,
        lo in 0.1f64..1.0, span in 0.0f64..2.0,
    ) {
        let g = 9.81;
        let p = HopProblem {
            r_0: Vec3::new(0.0, 0.0, 0.15),
            r_tau: Vec3::new(dx, dy, 0.15),
            m_r: 1.0,
            f_g: Vec3::new(0.0, -g * theta.sin(), -g * theta.cos()),
            t_max: 1e3,
            tau_bounds: (lo, lo + span),
            external_force: Vec3::zeros(),
        };
        let sol = solve_hop(&p).unwrap();
        prop_assert!(sol.cost <= grid_cost(&p) * (1.0 + 1e-9));
        prop_assert!(sol.tau >= lo && sol.tau <= lo + span);
    }
}
