//! NSGA-II search over binary tether-attachment genotypes.

mod evaluate;
mod evolve;
mod genotype;
mod nsga2;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

pub use evaluate::{evaluate, state_tethers_cross, EpisodeParams, EvalResult};
pub use evolve::{
    evolve, evolve_with, scalar_fitness, write_history_csv, EvolutionRun, HistoryEntry,
};
pub use genotype::{decode, tethers_cross, AttachmentConfig, Genotype};
pub use nsga2::{
    constrained_dominates, crowding_distance, dominates, nondominated_sort, Candidate, SortResult,
};

/// Anything the evolutionary loop can rank: objectives in minimisation form
/// plus a feasibility flag.
pub trait Scored {
    fn objectives(&self) -> Vec<f64>;
    fn feasible(&self) -> bool;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GAParams {
    /// Parent population size.
    pub pop_a: usize,
    /// Offspring per generation.
    pub off_b: usize,
    pub p_cross: f64,
    /// Per-bit flip probability.
    pub p_mut: f64,
    /// Number of recorded populations, the initial one included.
    pub generations: usize,
    /// Weights of the normalised objectives in the scalar fitness.
    pub weights: Vec<f64>,
    pub seed: u64,
}

impl Default for GAParams {
    fn default() -> Self {
        Self {
            pop_a: 50,
            off_b: 50,
            p_cross: 0.8,
            p_mut: 0.2,
            generations: 21,
            weights: vec![0.5, 0.25, 0.25],
            seed: 0,
        }
    }
}

impl GAParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.pop_a >= 2, "pop_a", "need at least two parents")?;
        ensure(self.off_b >= 1, "off_b", "need at least one offspring")?;
        ensure((0.0..=1.0).contains(&self.p_cross), "p_cross", "must lie in [0, 1]")?;
        ensure((0.0..=1.0).contains(&self.p_mut), "p_mut", "must lie in [0, 1]")?;
        ensure(self.generations >= 1, "generations", "must be at least 1")?;
        ensure(
            self.weights.iter().all(|w| *w >= 0.0),
            "weights",
            "must be non-negative",
        )?;
        ensure(
            (self.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9,
            "weights",
            "must sum to 1",
        )
    }
}
