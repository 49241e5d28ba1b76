use serde::{Deserialize, Serialize};

use super::genotype::{decode, tethers_cross, Genotype};
use super::Scored;
use crate::error::{ensure, Error, Result};
use crate::gait::{plan_climb_sequence, run_episode};
use crate::sim::{attachment_world, ScenarioSpec, SystemState};
use crate::Vec2;

/// Per-evaluation episode settings layered over a base scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeParams {
    /// Impulse budget per robot (N·s).
    pub fuel_budget: f64,
    pub n_hops: usize,
    pub hop_len: f64,
}

impl EpisodeParams {
    pub fn from_scenario(scenario: &ScenarioSpec) -> Self {
        Self {
            fuel_budget: scenario
                .robots
                .first()
                .map(|r| r.spec.fuel_budget)
                .unwrap_or_default(),
            n_hops: scenario.controller.n_hops,
            hop_len: scenario.controller.hop_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Payload progress along the goal direction, floored at zero (m).
    pub f1: f64,
    /// Peak oscillation angle (rad).
    pub f2: f64,
    /// Mean oscillation angle (rad).
    pub f3: f64,
    pub feasible: bool,
    pub robots_used: usize,
    /// Why the layout was rejected, if it was.
    pub reason: Option<String>,
}

impl EvalResult {
    fn infeasible(robots_used: usize, reason: impl Into<String>) -> Self {
        Self {
            f1: 0.0,
            f2: 0.0,
            f3: 0.0,
            feasible: false,
            robots_used,
            reason: Some(reason.into()),
        }
    }
}

impl Scored for EvalResult {
    fn objectives(&self) -> Vec<f64> {
        vec![-self.f1, self.f2, self.f3]
    }

    fn feasible(&self) -> bool {
        self.feasible
    }
}

/// True when any pair of tether chords crosses in the plane.
pub fn state_tethers_cross(scenario: &ScenarioSpec, state: &SystemState) -> bool {
    let anchors: Vec<Vec2> = scenario
        .payload
        .spec
        .attachments
        .iter()
        .map(|p| attachment_world(&state.payload_pos, state.yaw, p).xy())
        .collect();
    let robots: Vec<Vec2> = state.robot_pos.iter().map(|r| r.xy()).collect();
    tethers_cross(&anchors, &robots)
}

/// Simulate one climbing episode with the layout encoded by `g`.
///
/// Empty layouts, infeasible hop schedules, aborted episodes and layouts
/// whose tethers cross at any recorded sample are infeasible.
pub fn evaluate(g: &Genotype, base: &ScenarioSpec, params: &EpisodeParams) -> Result<EvalResult> {
    ensure(params.fuel_budget >= 0.0, "fuel_budget", "must be non-negative")?;
    let cfg = decode(g, &base.payload.spec);
    if !cfg.is_feasible() {
        return Ok(EvalResult::infeasible(0, "no attachments"));
    }
    let used = cfg.robot_count();
    let mut scenario = base.with_attachments(cfg.points);
    for r in &mut scenario.robots {
        r.spec.fuel_budget = params.fuel_budget;
    }
    scenario.controller.n_hops = params.n_hops;
    scenario.controller.hop_len = params.hop_len;

    let state = scenario.initial_state();
    if state_tethers_cross(&scenario, &state) {
        return Ok(EvalResult::infeasible(used, "tethers cross at start"));
    }
    let c = &scenario.controller;
    let schedule = match plan_climb_sequence(&scenario, &state, c.goal_dir, c.hop_len, c.n_hops) {
        Ok(s) => s,
        Err(e @ Error::ScheduleInfeasible { .. }) => {
            return Ok(EvalResult::infeasible(used, e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let traj = run_episode(&scenario, &schedule)?;
    if let Some(reason) = &traj.aborted {
        return Ok(EvalResult::infeasible(used, reason.clone()));
    }
    if traj
        .records
        .iter()
        .any(|r| state_tethers_cross(&scenario, &r.state))
    {
        return Ok(EvalResult::infeasible(used, "tethers crossed"));
    }
    let goal = c.goal_dir.normalize();
    let progress = traj.payload_displacement().xy().dot(&goal);
    Ok(EvalResult {
        f1: progress.max(0.0),
        f2: traj.vartheta_max(),
        f3: traj.vartheta_mean(),
        feasible: true,
        robots_used: used,
        reason: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> (ScenarioSpec, EpisodeParams) {
        let mut s = ScenarioSpec::climb_up();
        s.controller.duration = 12.0;
        let p = EpisodeParams {
            fuel_budget: 1e4,
            n_hops: 9,
            hop_len: 0.4,
        };
        (s, p)
    }

    #[test]
    fn empty_layout_is_infeasible() {
        let (s, p) = quick();
        let r = evaluate(&Genotype::zeros(15.0).unwrap(), &s, &p).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.robots_used, 0);
    }

    #[test]
    fn zero_fuel_barely_moves() {
        let (s, mut p) = quick();
        p.fuel_budget = 0.0;
        let g = Genotype::from_nodes(15.0, &[3, 6, 9]).unwrap();
        let r = evaluate(&g, &s, &p).unwrap();
        assert!(r.feasible);
        assert!(r.f1 < 0.05, "f1 = {}", r.f1);
    }

    #[test]
    fn upper_layout_climbs() {
        let (s, p) = quick();
        let g = Genotype::from_nodes(15.0, &[3, 6, 9]).unwrap();
        let r = evaluate(&g, &s, &p).unwrap();
        assert!(r.feasible, "{:?}", r.reason);
        assert!(r.f1 > 0.3, "f1 = {}", r.f1);
        assert!(r.f2 >= r.f3 && r.f3 >= 0.0);
    }
}
