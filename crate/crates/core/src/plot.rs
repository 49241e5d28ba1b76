//! CSV tables for external plotting.
//!
//! * climb staircase: `t, y_robot0.., y_payload`
//! * evolution: `gen, individual, fitness`, then one `mean` row per generation
//! * grip profile: `x, surface_h`, then `traced_h_<r>um` and `site_<r>um` per
//!   tip radius `r` in micrometres

use std::io::Write;

use crate::error::Result;
use crate::evo::HistoryEntry;
use crate::grip::{find_grip_sites, trace_profile};
use crate::sim::Trajectory;

pub fn write_climb_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = traj.first().map_or(0, |s| s.robot_count());
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("y_robot{i}")));
    header.push("y_payload".into());
    w.write_record(&header)?;
    for r in &traj.records {
        let s = &r.state;
        let mut row = vec![s.t.to_string()];
        row.extend(s.robot_pos.iter().map(|p| p.y.to_string()));
        row.push(s.payload_pos.y.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Individuals in history order, each generation closed by its mean fitness.
pub fn write_fitness_csv<E, W: Write>(history: &[HistoryEntry<E>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gen", "individual", "fitness"])?;
    let mut k = 0;
    while k < history.len() {
        let gen = history[k].generation;
        let end = k + history[k..].iter().take_while(|h| h.generation == gen).count();
        for h in &history[k..end] {
            w.write_record([gen.to_string(), h.index.to_string(), h.fitness.to_string()])?;
        }
        let mean = history[k..end].iter().map(|h| h.fitness).sum::<f64>() / (end - k) as f64;
        w.write_record([gen.to_string(), "mean".to_string(), mean.to_string()])?;
        k = end;
    }
    w.flush()?;
    Ok(())
}

/// One row per profile sample.
pub fn write_grip_profile_csv<W: Write>(
    profile: &[f64],
    resolution: f64,
    tip_radii: &[f64],
    psi_min: f64,
    out: W,
) -> Result<()> {
    let mut traces = Vec::with_capacity(tip_radii.len());
    let mut flags = Vec::with_capacity(tip_radii.len());
    for &r_s in tip_radii {
        let traced = trace_profile(profile, r_s, resolution)?;
        let mut flag = vec![false; profile.len()];
        for j in find_grip_sites(&traced, resolution, psi_min) {
            flag[j] = true;
        }
        traces.push(traced);
        flags.push(flag);
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x".to_string(), "surface_h".to_string()];
    for r_s in tip_radii {
        header.push(format!("traced_h_{}um", micrometres(*r_s)));
    }
    for r_s in tip_radii {
        header.push(format!("site_{}um", micrometres(*r_s)));
    }
    w.write_record(&header)?;
    for (j, h) in profile.iter().enumerate() {
        let mut row = vec![(j as f64 * resolution).to_string(), h.to_string()];
        row.extend(traces.iter().map(|t| t[j].to_string()));
        row.extend(flags.iter().map(|f| u8::from(f[j]).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Metres to micrometres, rounded to a picometre so labels stay short.
fn micrometres(r: f64) -> f64 {
    (r * 1e12).round() / 1e6
}
