use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::Vec3;

/// Move a robot from rest at `r_0` to `r_tau` under one constant thrust.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopProblem {
    pub r_0: Vec3,
    pub r_tau: Vec3,
    pub m_r: f64,
    /// Gravitational acceleration in the incline frame (m/s²).
    pub f_g: Vec3,
    pub t_max: f64,
    /// Admissible flight times `(min, max)` (s).
    pub tau_bounds: (f64, f64),
    /// Additional force assumed constant over the flight (N).
    #[serde(default = "Vec3::zeros")]
    pub external_force: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopSolution {
    pub thrust: Vec3,
    pub tau: f64,
    /// `Tx² + Ty² + Tz²` (N²).
    pub cost: f64,
}

impl HopProblem {
    pub fn validate(&self) -> Result<()> {
        ensure(self.m_r > 0.0, "m_r", "must be positive")?;
        ensure(self.t_max > 0.0, "t_max", "must be positive")?;
        ensure(self.tau_bounds.0 > 0.0, "tau_bounds", "minimum flight time must be positive")?;
        ensure(
            self.tau_bounds.1 >= self.tau_bounds.0,
            "tau_bounds",
            "max must not be below min",
        )
    }

    /// Constant thrust that lands exactly on target after `tau`.
    pub fn thrust_for(&self, tau: f64) -> Vec3 {
        let delta = self.r_tau - self.r_0;
        2.0 * self.m_r * delta / (tau * tau) - self.m_r * self.f_g - self.external_force
    }
}

/// Squared thrust magnitude needed for flight time `tau`.
pub fn hop_cost(problem: &HopProblem, tau: f64) -> f64 {
    problem.thrust_for(tau).norm_squared()
}

/// Minimise `‖T‖²` over the admissible flight times.
///
/// With `s = 1/τ²` the thrust is affine in `s`, so the cost is a convex
/// quadratic whose minimiser over the feasible interval is found exactly.
/// A zero displacement leaves the cost flat; the shortest flight is then
/// chosen because it spends the least impulse.
pub fn solve_hop(problem: &HopProblem) -> Result<HopSolution> {
    problem.validate()?;
    let (tau_lo, tau_hi) = problem.tau_bounds;
    let delta = problem.r_tau - problem.r_0;
    let dd = delta.norm_squared();
    let tau = if dd == 0.0 {
        tau_lo
    } else {
        let bias = problem.m_r * problem.f_g + problem.external_force;
        let s_star = bias.dot(&delta) / (2.0 * problem.m_r * dd);
        let s = s_star.clamp(1.0 / (tau_hi * tau_hi), 1.0 / (tau_lo * tau_lo));
        (1.0 / s.sqrt()).clamp(tau_lo, tau_hi)
    };
    let thrust = problem.thrust_for(tau);
    let cost = thrust.norm_squared();
    let required = cost.sqrt();
    if required > problem.t_max {
        return Err(Error::HopInfeasible {
            required,
            limit: problem.t_max,
        });
    }
    Ok(HopSolution { thrust, tau, cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat_problem(delta: Vec3, tau: (f64, f64)) -> HopProblem {
        HopProblem {
            r_0: Vec3::new(1.0, 1.0, 0.15),
            r_tau: Vec3::new(1.0, 1.0, 0.15) + delta,
            m_r: 1.0,
            f_g: Vec3::new(0.0, 0.0, -9.81),
            t_max: 50.0,
            tau_bounds: tau,
            external_force: Vec3::zeros(),
        }
    }

    #[test]
    fn fixed_tau_closed_form() {
        let sol = solve_hop(&flat_problem(Vec3::new(0.0, 1.0, 0.0), (1.0, 1.0))).unwrap();
        assert_abs_diff_eq!(sol.thrust, Vec3::new(0.0, 2.0, 9.81), epsilon = 1e-12);
        assert_eq!(sol.tau, 1.0);
    }

    #[test]
    fn zero_displacement_hovers() {
        let sol = solve_hop(&flat_problem(Vec3::zeros(), (0.4, 2.0))).unwrap();
        assert_abs_diff_eq!(sol.thrust, Vec3::new(0.0, 0.0, 9.81), epsilon = 1e-12);
        assert_eq!(sol.tau, 0.4);
    }

    #[test]
    fn infeasible_reports_required_thrust() {
        let mut p = flat_problem(Vec3::new(0.0, 1.0, 0.0), (1.0, 1.0));
        p.t_max = 5.0;
        match solve_hop(&p) {
            Err(Error::HopInfeasible { required, limit }) => {
                assert_abs_diff_eq!(required, (4.0f64 + 9.81 * 9.81).sqrt(), epsilon = 1e-12);
                assert_eq!(limit, 5.0);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn landing_matches_ballistic_integration() {
        let p = HopProblem {
            f_g: Vec3::new(0.0, -2.5, -9.4),
            ..flat_problem(Vec3::new(0.3, -0.8, 0.0), (0.2, 3.0))
        };
        let sol = solve_hop(&p).unwrap();
        let acc = sol.thrust / p.m_r + p.f_g;
        let landing = p.r_0 + 0.5 * acc * sol.tau * sol.tau;
        assert_abs_diff_eq!(landing, p.r_tau, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(solve_hop(&flat_problem(Vec3::zeros(), (0.0, 1.0))).is_err());
        assert!(solve_hop(&flat_problem(Vec3::zeros(), (2.0, 1.0))).is_err());
    }
}
