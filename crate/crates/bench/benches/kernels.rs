use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use haulbots_core::evo::{nondominated_sort, Candidate};
use haulbots_core::gait::{plan_climb_sequence, run_episode, solve_hop};
use haulbots_core::grip::{gen_surface, trace_profile};
use haulbots_core::planner::{gradient_obstacles, plan};
use haulbots_core::sim::step;
use haulbots_core::{Heightmap, HopProblem, PlanProblem, ScenarioSpec, Vec3};

fn sim_step(c: &mut Criterion) {
    let s = ScenarioSpec::climb_up();
    let state = s.initial_state();
    let zero = vec![Vec3::zeros(); 3];
    c.bench_function("sim/step", |b| {
        b.iter(|| step(black_box(&state), &zero, &[true; 3], &s, 1e-3).unwrap())
    });
}

fn climb_episode(c: &mut Criterion) {
    let mut s = ScenarioSpec::climb_up();
    s.controller.duration = 12.0;
    s.controller.n_hops = 9;
    let ctl = &s.controller;
    let schedule = plan_climb_sequence(&s, &s.initial_state(), ctl.goal_dir, ctl.hop_len, ctl.n_hops).unwrap();
    c.bench_function("gait/episode_12s", |b| b.iter(|| run_episode(black_box(&s), &schedule).unwrap()));
}

fn hop(c: &mut Criterion) {
    let p = HopProblem {
        r_0: Vec3::new(0.0, 0.0, 0.15),
        r_tau: Vec3::new(0.1, 0.4, 0.15),
        m_r: 1.0,
        f_g: Vec3::new(0.0, -2.54, -9.48),
        t_max: 40.0,
        tau_bounds: (0.3, 1.0),
        external_force: Vec3::new(0.0, -3.0, 0.0),
    };
    c.bench_function("gait/solve_hop", |b| b.iter(|| solve_hop(black_box(&p)).unwrap()));
}

fn trace(c: &mut Criterion) {
    let s = gen_surface(100e-6, 2e-3, 1e-5, 0).unwrap();
    c.bench_function("grip/trace_row_100um", |b| {
        b.iter(|| trace_profile(black_box(s.row(0)), 100e-6, s.resolution).unwrap())
    });
}

fn sort(c: &mut Criterion) {
    // deterministic scatter: objectives from a multiplicative congruence
    let pop: Vec<Candidate> = (0..100u64)
        .map(|i| Candidate {
            objectives: vec![((i * 37) % 101) as f64, ((i * 59) % 103) as f64, ((i * 71) % 107) as f64],
            feasible: i % 7 != 0,
        })
        .collect();
    c.bench_function("evo/nondominated_sort_100", |b| b.iter(|| nondominated_sort(black_box(&pop))));
}

fn planner(c: &mut Criterion) {
    let hm = Heightmap::two_ridge();
    c.bench_function("planner/gradient_obstacles", |b| {
        b.iter(|| gradient_obstacles(black_box(&hm), 1.0).unwrap())
    });
    let mask = gradient_obstacles(&hm, 1.0).unwrap();
    let problem = PlanProblem::two_ridge();
    c.bench_function("planner/two_ridge", |b| b.iter(|| plan(black_box(&problem), &mask, 1).unwrap()));
}

criterion_group!(kernels, sim_step, climb_episode, hop, trace, sort, planner);
criterion_main!(kernels);
