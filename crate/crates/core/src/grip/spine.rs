use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure, invalid, Error, Result};

use super::{GripSiteReport, MicroSurface, SpineModel};

/// Locus of the centre of a round tip of radius `r_s` rolled over `profile`
/// (grey-scale dilation by a half-disk).
pub fn trace_profile(profile: &[f64], r_s: f64, resolution: f64) -> Result<Vec<f64>> {
    if profile.is_empty() {
        return Err(Error::EmptyProfile);
    }
    ensure(r_s > 0.0, "r_s", "must be positive")?;
    ensure(resolution > 0.0, "resolution", "must be positive")?;
    let reach = (r_s / resolution).floor() as usize;
    let cap: Vec<f64> = (0..=reach)
        .map(|d| {
            let x = d as f64 * resolution;
            (r_s * r_s - x * x).max(0.0).sqrt()
        })
        .collect();
    let n = profile.len();
    Ok((0..n)
        .map(|j| {
            let lo = j.saturating_sub(reach);
            let hi = (j + reach).min(n - 1);
            (lo..=hi)
                .map(|k| profile[k] + cap[k.abs_diff(j)])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

/// Smallest surface-normal inclination a spine loaded at `psi_load` can hold:
/// `psi_load + arccot(mu_f)`.
pub fn min_grip_angle(psi_load: f64, mu_f: f64) -> Result<f64> {
    if !(mu_f > 0.0) {
        return Err(invalid("mu_f", "friction coefficient must be positive"));
    }
    Ok(psi_load + (1.0 / mu_f).atan())
}

/// Normal inclination from central differences; the end samples get zero.
///
/// The spine is dragged toward `+x`, so faces rising with `x` have positive
/// inclination.
pub fn normal_angles(traced: &[f64], resolution: f64) -> Vec<f64> {
    let n = traced.len();
    let mut psi = vec![0.0; n];
    for j in 1..n.saturating_sub(1) {
        let slope = (traced[j + 1] - traced[j - 1]) / (2.0 * resolution);
        psi[j] = slope.atan();
    }
    psi
}

/// Indices whose normal inclination exceeds `psi_min`.
pub fn find_grip_sites(traced: &[f64], resolution: f64, psi_min: f64) -> Vec<usize> {
    if traced.len() < 3 {
        return Vec::new();
    }
    normal_angles(traced, resolution)
        .iter()
        .enumerate()
        .filter(|&(j, &psi)| j > 0 && j + 1 < traced.len() && psi > psi_min)
        .map(|(j, _)| j)
        .collect()
}

/// `1/R = 1/r_s + 1/r_a`.
pub fn effective_radius(r_s: f64, r_a: f64) -> f64 {
    1.0 / (1.0 / r_s + 1.0 / r_a)
}

/// `f_max = (π σ_max / (1 − 2ν))³ / (2E²) · R²`.
pub fn max_load_for_radius(spine: &SpineModel, r_eff: f64) -> Result<f64> {
    if spine.nu >= 0.5 {
        return Err(invalid("nu", "1 - 2 nu must be positive"));
    }
    let stress = PI * spine.sigma_max / (1.0 - 2.0 * spine.nu);
    Ok(stress.powi(3) / (2.0 * spine.e_mod * spine.e_mod) * r_eff * r_eff)
}

/// Load limit of one spine on an asperity of radius `r_a`.
pub fn spine_max_load(spine: &SpineModel, r_a: f64) -> Result<f64> {
    ensure(r_a > 0.0, "r_a", "must be positive")?;
    max_load_for_radius(spine, effective_radius(spine.r_s, r_a))
}

/// Sigmoid grip force `f_load / (1 + exp(−k (demand − f_load/2)))`.
pub fn grip_force(demand: f64, f_load: f64, k: f64) -> f64 {
    if f_load <= 0.0 {
        return 0.0;
    }
    f_load / (1.0 + (-k * (demand - 0.5 * f_load)).exp())
}

/// Asperity radius at `j`: reciprocal of the second-difference curvature of
/// the raw profile, floored at `resolution`.
pub fn asperity_radius(profile: &[f64], j: usize, resolution: f64) -> f64 {
    if j == 0 || j + 1 >= profile.len() {
        return f64::INFINITY;
    }
    let curvature = (profile[j - 1] - 2.0 * profile[j] + profile[j + 1]) / (resolution * resolution);
    if curvature == 0.0 {
        f64::INFINITY
    } else {
        (1.0 / curvature.abs()).max(resolution)
    }
}

/// Trace, detect sites and evaluate per-site load capacity for one profile.
pub fn analyse_profile(
    profile: &[f64],
    resolution: f64,
    spine: &SpineModel,
    psi_min: f64,
) -> Result<GripSiteReport> {
    let traced = trace_profile(profile, spine.r_s, resolution)?;
    let psi_profile = normal_angles(&traced, resolution);
    let site_indices = find_grip_sites(&traced, resolution, psi_min);
    let per_site_fmax = site_indices
        .iter()
        .map(|&j| spine_max_load(spine, asperity_radius(profile, j, resolution)))
        .collect::<Result<_>>()?;
    Ok(GripSiteReport {
        resolution,
        r_s: spine.r_s,
        psi_min,
        site_indices,
        traced,
        psi_profile,
        per_site_fmax,
    })
}

/// Total grip sites over every row profile of `surface`.
pub fn surface_site_count(surface: &MicroSurface, r_s: f64, psi_min: f64) -> Result<usize> {
    let mut total = 0;
    for i in 0..surface.rows {
        let traced = trace_profile(surface.row(i), r_s, surface.resolution)?;
        total += find_grip_sites(&traced, surface.resolution, psi_min).len();
    }
    Ok(total)
}

/// Aggregate grip capacity of one robot: each of `count_s` spines engages a
/// uniformly drawn site (with replacement) from all row profiles, and the
/// engaged load limits are summed. Zero when the surface offers no site.
pub fn aggregate_load(spine: &SpineModel, surface: &MicroSurface, psi_min: f64) -> Result<f64> {
    spine.validate()?;
    let mut capacities = Vec::new();
    for i in 0..surface.rows {
        let report = analyse_profile(surface.row(i), surface.resolution, spine, psi_min)?;
        capacities.extend(report.per_site_fmax);
    }
    if capacities.is_empty() {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(surface.seed ^ 0x5b1e_u64);
    Ok((0..spine.count_s)
        .map(|_| capacities[rng.random_range(0..capacities.len())])
        .sum())
}
