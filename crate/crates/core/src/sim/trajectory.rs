use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::Vec3;

use super::{EnergyBreakdown, SystemState};

/// One sample of a simulated episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub state: SystemState,
    pub thrusts: Vec<Vec3>,
    /// Set when the commanded thrust was coerced to zero by the fuel budget.
    pub fuel_exhausted: Vec<bool>,
    /// CM→CG oscillation angle (rad).
    pub vartheta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlipEvent {
    pub t: f64,
    pub robot: usize,
    /// Demanded load (N).
    pub demand: f64,
    /// Grip capacity `f_load` (N).
    pub capacity: f64,
}

/// One executed hop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopRecord {
    pub robot: usize,
    pub t_launch: f64,
    pub t_land: f64,
    pub start: Vec3,
    pub target: Vec3,
    pub landing: Vec3,
    /// Distance between landing point and target (m).
    pub landing_error: f64,
    pub thrust: Vec3,
    pub tau: f64,
    /// Impulse actually spent on this hop (N·s).
    pub impulse: f64,
    /// False when the robot's tether went taut during flight.
    pub slack_in_flight: bool,
}

/// Fixed-interval record of an episode plus its event log.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub sample_interval: f64,
    pub records: Vec<TrajectoryRecord>,
    pub slips: Vec<SlipEvent>,
    pub hops: Vec<HopRecord>,
    pub energy_initial: EnergyBreakdown,
    pub energy_final: EnergyBreakdown,
    /// Reason the episode stopped early, if it did.
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub initial: EnergyBreakdown,
    pub initial_total: f64,
    pub r#final: EnergyBreakdown,
    pub final_total: f64,
    /// Σ‖T‖·dt over the episode (N·s).
    pub thrust_impulse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub samples: usize,
    pub duration: f64,
    pub final_state: SystemState,
    pub payload_displacement: Vec3,
    pub distance: f64,
    pub vartheta_max: f64,
    pub vartheta_mean: f64,
    pub slip_events: Vec<SlipEvent>,
    pub hops: Vec<HopRecord>,
    pub max_landing_error: f64,
    pub energy: EnergyLedger,
    pub aborted: Option<String>,
}

impl Trajectory {
    pub fn first(&self) -> Option<&SystemState> {
        self.records.first().map(|r| &r.state)
    }

    pub fn last(&self) -> Option<&SystemState> {
        self.records.last().map(|r| &r.state)
    }

    /// `R_final − R_0`.
    pub fn payload_displacement(&self) -> Vec3 {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => b.payload_pos - a.payload_pos,
            _ => Vec3::zeros(),
        }
    }

    pub fn vartheta_max(&self) -> f64 {
        self.records.iter().map(|r| r.vartheta).fold(0.0, f64::max)
    }

    pub fn vartheta_mean(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.vartheta).sum::<f64>() / self.records.len() as f64
    }

    pub fn summary(&self) -> TrajectorySummary {
        let final_state = self.last().cloned().unwrap_or_else(|| SystemState::at_rest(vec![], Vec3::zeros()));
        let disp = self.payload_displacement();
        TrajectorySummary {
            samples: self.records.len(),
            duration: match (self.first(), self.last()) {
                (Some(a), Some(b)) => b.t - a.t,
                _ => 0.0,
            },
            payload_displacement: disp,
            distance: disp.norm(),
            vartheta_max: self.vartheta_max(),
            vartheta_mean: self.vartheta_mean(),
            slip_events: self.slips.clone(),
            hops: self.hops.clone(),
            max_landing_error: self.hops.iter().map(|h| h.landing_error).fold(0.0, f64::max),
            energy: EnergyLedger {
                initial: self.energy_initial,
                initial_total: self.energy_initial.total(),
                r#final: self.energy_final,
                final_total: self.energy_final.total(),
                thrust_impulse: final_state.fuel_used.iter().sum(),
            },
            final_state,
            aborted: self.aborted.clone(),
        }
    }

    /// One row per sample: `t`, per-robot position/velocity/grip/fuel,
    /// payload position/velocity/yaw, `vartheta`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.records.first().map_or(0, |r| r.state.robot_count());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for i in 0..n {
            for f in ["x", "y", "z", "vx", "vy", "vz"] {
                header.push(format!("r{i}_{f}"));
            }
            header.push(format!("grip{i}"));
            header.push(format!("fuel{i}"));
        }
        for f in ["R_x", "R_y", "R_z", "V_x", "V_y", "V_z", "phi", "phi_dot", "vartheta"] {
            header.push(f.to_string());
        }
        w.write_record(&header)?;
        for rec in &self.records {
            let s = &rec.state;
            let mut row = vec![s.t.to_string()];
            for i in 0..n {
                let (p, v) = (s.robot_pos[i], s.robot_vel[i]);
                row.extend([p.x, p.y, p.z, v.x, v.y, v.z].iter().map(f64::to_string));
                row.push(u8::from(s.gripped[i]).to_string());
                row.push(s.fuel_used[i].to_string());
            }
            let (p, v) = (s.payload_pos, s.payload_vel);
            row.extend(
                [p.x, p.y, p.z, v.x, v.y, v.z, s.yaw, s.yaw_rate, rec.vartheta]
                    .iter()
                    .map(f64::to_string),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
