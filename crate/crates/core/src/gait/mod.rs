//! Minimum-thrust hops and the one-robot-at-a-time climbing gait.

mod climb;
mod hop;

pub use climb::{plan_climb_sequence, run_episode, ClimbEntry, ClimbSchedule};
pub use hop::{hop_cost, solve_hop, HopProblem, HopSolution};
