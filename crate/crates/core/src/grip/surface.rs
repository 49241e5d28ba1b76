use std::io::{BufReader, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::gridio;

/// Default correlation length in samples.
pub const CORRELATION_SAMPLES: f64 = 10.0;

/// Square height field sampled every `resolution` metres, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroSurface {
    pub heights: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub resolution: f64,
    pub target_rms: f64,
    pub seed: u64,
}

impl MicroSurface {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.heights[i * self.cols..(i + 1) * self.cols]
    }

    /// RMS about the mean.
    pub fn rms(&self) -> f64 {
        let n = self.heights.len() as f64;
        let mean = self.heights.iter().sum::<f64>() / n;
        (self.heights.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n).sqrt()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        gridio::write_grid(
            out,
            &[
                ("resolution", self.resolution.to_string()),
                ("target_rms", self.target_rms.to_string()),
                ("seed", self.seed.to_string()),
            ],
            self.cols,
            &self.heights,
        )
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let grid = gridio::read_grid(BufReader::new(file), path)?;
        let resolution = grid
            .meta_f64("resolution", path)?
            .ok_or_else(|| Error::Config(format!("{}: missing resolution header", path.display())))?;
        let target_rms = grid.meta_f64("target_rms", path)?.unwrap_or(0.0);
        let seed = grid
            .meta
            .get("seed")
            .and_then(|s| s.parse().ok())
            .unwrap_or(0);
        ensure(grid.rows >= 2 && grid.cols >= 2, "surface", "grid must be at least 2x2")?;
        Ok(Self {
            heights: grid.values,
            rows: grid.rows,
            cols: grid.cols,
            resolution,
            target_rms,
            seed,
        })
    }
}

/// Gaussian rough surface with the default correlation length.
pub fn gen_surface(target_rms: f64, extent: f64, resolution: f64, seed: u64) -> Result<MicroSurface> {
    gen_surface_with(
        target_rms,
        extent,
        resolution,
        CORRELATION_SAMPLES * resolution,
        seed,
    )
}

/// White Gaussian noise smoothed by a periodic isotropic Gaussian kernel,
/// then mean-removed and rescaled to exactly `target_rms`.
pub fn gen_surface_with(
    target_rms: f64,
    extent: f64,
    resolution: f64,
    correlation_length: f64,
    seed: u64,
) -> Result<MicroSurface> {
    ensure(target_rms >= 0.0, "target_rms", "must be non-negative")?;
    ensure(resolution > 0.0, "resolution", "must be positive")?;
    ensure(extent > resolution, "extent", "must exceed resolution")?;
    ensure(correlation_length > 0.0, "correlation_length", "must be positive")?;

    let n = ((extent / resolution).round() as usize).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();

    // kernel sigma in samples; white noise blurred by sigma has an
    // autocorrelation width of sigma * sqrt(2)
    let sigma = 0.5 * correlation_length / resolution;
    let half = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-half..=half)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();

    let wrap = |i: isize| i.rem_euclid(n as isize) as usize;
    let mut tmp = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            tmp[r * n + c] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * noise[r * n + wrap(c as isize + k as isize - half)])
                .sum();
        }
    }
    let mut heights = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            heights[r * n + c] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * tmp[wrap(r as isize + k as isize - half) * n + c])
                .sum();
        }
    }

    let mean = heights.iter().sum::<f64>() / heights.len() as f64;
    heights.iter_mut().for_each(|h| *h -= mean);
    let rms = (heights.iter().map(|h| h * h).sum::<f64>() / heights.len() as f64).sqrt();
    let scale = if rms > 0.0 { target_rms / rms } else { 0.0 };
    heights.iter_mut().for_each(|h| *h *= scale);

    Ok(MicroSurface {
        heights,
        rows: n,
        cols: n,
        resolution,
        target_rms,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rms_is_flat() {
        let s = gen_surface(0.0, 1e-3, 1e-5, 3).unwrap();
        assert!(s.heights.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn rms_matches_target() {
        let s = gen_surface(100e-6, 1e-3, 5e-6, 11).unwrap();
        let rms = s.rms();
        assert!((95e-6..=105e-6).contains(&rms), "rms {rms}");
        assert_eq!(s.rows, 200);
    }

    #[test]
    fn seeded_surfaces_are_identical() {
        let a = gen_surface(1e-4, 5e-4, 5e-6, 7).unwrap();
        let b = gen_surface(1e-4, 5e-4, 5e-6, 7).unwrap();
        let c = gen_surface(1e-4, 5e-4, 5e-6, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.heights, c.heights);
    }

    #[test]
    fn bad_geometry_rejected() {
        assert!(gen_surface(1e-4, 0.0, 1e-5, 0).is_err());
        assert!(gen_surface(1e-4, 1e-3, 0.0, 0).is_err());
        assert!(gen_surface(1e-4, 1e-5, 1e-5, 0).is_err());
        assert!(gen_surface(-1.0, 1e-3, 1e-5, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = gen_surface(1e-4, 2e-4, 1e-5, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        s.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        assert_eq!(MicroSurface::read_csv(&path).unwrap(), s);
    }
}
