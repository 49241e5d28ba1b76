use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate, EpisodeParams, EvalResult};
use super::genotype::Genotype;
use super::nsga2::{nondominated_sort, Candidate};
use super::{GAParams, Scored};
use crate::error::{ensure, Result};
use crate::sim::ScenarioSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry<E> {
    pub generation: usize,
    pub index: usize,
    pub genotype: Genotype,
    pub eval: E,
    pub rank: usize,
    pub crowding: f64,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRun<E> {
    /// Every member of every recorded population, generation-major.
    pub history: Vec<HistoryEntry<E>>,
    /// Feasible, non-dominated members of the last population.
    pub archive: Vec<HistoryEntry<E>>,
    /// Distinct genotypes simulated.
    pub evaluations: usize,
}

impl<E> EvolutionRun<E> {
    pub fn generation(&self, g: usize) -> impl Iterator<Item = &HistoryEntry<E>> {
        self.history.iter().filter(move |h| h.generation == g)
    }

    pub fn generations(&self) -> usize {
        self.history.last().map_or(0, |h| h.generation + 1)
    }
}

/// Weighted sum of min-max normalised objectives, higher is better.
///
/// `f1` counts directly, `f2` and `f3` count as `1 − f̂`. An objective with no
/// spread across `results` normalises to 0.5.
pub fn scalar_fitness(results: &[EvalResult], weights: &[f64]) -> Result<Vec<f64>> {
    fitness_of(results, weights)
}

fn fitness_of<E: Scored>(evals: &[E], weights: &[f64]) -> Result<Vec<f64>> {
    let objs: Vec<Vec<f64>> = evals.iter().map(Scored::objectives).collect();
    let Some(first) = objs.first() else {
        return Ok(Vec::new());
    };
    ensure(
        first.len() == weights.len(),
        "weights",
        "need one weight per objective",
    )?;
    let mut out = vec![0.0; objs.len()];
    for (k, w) in weights.iter().enumerate() {
        let lo = objs.iter().map(|o| o[k]).fold(f64::INFINITY, f64::min);
        let hi = objs.iter().map(|o| o[k]).fold(f64::NEG_INFINITY, f64::max);
        for (f, o) in out.iter_mut().zip(&objs) {
            let norm = if hi > lo { (o[k] - lo) / (hi - lo) } else { 0.5 };
            *f += w * (1.0 - norm);
        }
    }
    Ok(out)
}

/// NSGA-II over attachment layouts, each scored by a climbing episode.
pub fn evolve(
    params: &GAParams,
    base: &ScenarioSpec,
    alpha_node: f64,
    episode: &EpisodeParams,
) -> Result<EvolutionRun<EvalResult>> {
    base.validate()?;
    evolve_with(params, alpha_node, |g| evaluate(g, base, episode))
}

/// NSGA-II with an arbitrary evaluator.
///
/// Parents are chosen by binary tournament on (rank, crowding), recombined by
/// one-point crossover and mutated bitwise; the next population is the best
/// `pop_a` of parents and offspring. Evaluation runs in parallel but the
/// result depends only on `params.seed`.
pub fn evolve_with<E, F>(params: &GAParams, alpha_node: f64, eval: F) -> Result<EvolutionRun<E>>
where
    E: Scored + Clone + Send + Sync,
    F: Fn(&Genotype) -> Result<E> + Sync,
{
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut cache: HashMap<Genotype, E> = HashMap::new();

    let mut pop = (0..params.pop_a)
        .map(|_| Genotype::random(alpha_node, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    evaluate_all(&pop, &mut cache, &eval)?;

    let mut history = Vec::with_capacity(params.generations * params.pop_a);
    let mut last = Vec::new();
    for generation in 0..params.generations {
        let evals: Vec<E> = pop.iter().map(|g| cache[g].clone()).collect();
        let sorted = nondominated_sort(&candidates(&evals));
        let fitness = fitness_of(&evals, &params.weights)?;
        last = pop
            .iter()
            .enumerate()
            .map(|(index, g)| HistoryEntry {
                generation,
                index,
                genotype: g.clone(),
                eval: evals[index].clone(),
                rank: sorted.ranks[index],
                crowding: sorted.crowding[index],
                fitness: fitness[index],
            })
            .collect();
        history.extend(last.iter().cloned());
        if generation + 1 == params.generations {
            break;
        }

        let mut offspring = Vec::with_capacity(params.off_b + 1);
        while offspring.len() < params.off_b {
            let a = tournament(&sorted.ranks, &sorted.crowding, &mut rng);
            let b = tournament(&sorted.ranks, &sorted.crowding, &mut rng);
            let (mut c1, mut c2) = crossover(&pop[a], &pop[b], params.p_cross, &mut rng);
            mutate(&mut c1, params.p_mut, &mut rng);
            mutate(&mut c2, params.p_mut, &mut rng);
            offspring.push(c1);
            offspring.push(c2);
        }
        offspring.truncate(params.off_b);
        evaluate_all(&offspring, &mut cache, &eval)?;

        let combined: Vec<Genotype> = pop.into_iter().chain(offspring).collect();
        let evals: Vec<E> = combined.iter().map(|g| cache[g].clone()).collect();
        pop = select(&combined, &evals, params.pop_a);
    }

    let archive = last
        .into_iter()
        .filter(|h| h.rank == 0 && h.eval.feasible())
        .collect();
    Ok(EvolutionRun {
        history,
        archive,
        evaluations: cache.len(),
    })
}

fn candidates<E: Scored>(evals: &[E]) -> Vec<Candidate> {
    evals
        .iter()
        .map(|e| Candidate {
            objectives: e.objectives(),
            feasible: e.feasible(),
        })
        .collect()
}

fn evaluate_all<E, F>(pop: &[Genotype], cache: &mut HashMap<Genotype, E>, eval: &F) -> Result<()>
where
    E: Send,
    F: Fn(&Genotype) -> Result<E> + Sync,
{
    let mut todo: Vec<&Genotype> = pop.iter().filter(|g| !cache.contains_key(*g)).collect();
    todo.sort_by(|a, b| a.bits.cmp(&b.bits));
    todo.dedup();
    let results = todo
        .par_iter()
        .map(|g| eval(g))
        .collect::<Result<Vec<E>>>()?;
    for (g, e) in todo.into_iter().zip(results) {
        cache.insert(g.clone(), e);
    }
    Ok(())
}

/// Lower rank wins, then larger crowding distance, then the first draw.
fn tournament<R: Rng>(ranks: &[usize], crowding: &[f64], rng: &mut R) -> usize {
    let i = rng.random_range(0..ranks.len());
    let j = rng.random_range(0..ranks.len());
    if ranks[j] < ranks[i] || (ranks[j] == ranks[i] && crowding[j] > crowding[i]) {
        j
    } else {
        i
    }
}

fn crossover<R: Rng>(a: &Genotype, b: &Genotype, p: f64, rng: &mut R) -> (Genotype, Genotype) {
    let (mut c1, mut c2) = (a.clone(), b.clone());
    let m = a.len();
    if m > 1 && rng.random_bool(p) {
        let cut = rng.random_range(1..m);
        c1.bits[cut..].copy_from_slice(&b.bits[cut..]);
        c2.bits[cut..].copy_from_slice(&a.bits[cut..]);
    }
    (c1, c2)
}

fn mutate<R: Rng>(g: &mut Genotype, p: f64, rng: &mut R) {
    for bit in &mut g.bits {
        if rng.random_bool(p) {
            *bit = !*bit;
        }
    }
}

/// Fill by fronts; the front that overflows is cut by descending crowding.
fn select<E: Scored>(combined: &[Genotype], evals: &[E], n: usize) -> Vec<Genotype> {
    let sorted = nondominated_sort(&candidates(evals));
    let mut chosen = Vec::with_capacity(n);
    for front in &sorted.fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend(front.iter().copied());
        } else {
            let mut rest = front.clone();
            rest.sort_by(|&a, &b| {
                sorted.crowding[b]
                    .partial_cmp(&sorted.crowding[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            chosen.extend(rest.into_iter().take(n - chosen.len()));
        }
        if chosen.len() == n {
            break;
        }
    }
    chosen.into_iter().map(|i| combined[i].clone()).collect()
}

/// One row per individual per generation.
pub fn write_history_csv<W: Write>(history: &[HistoryEntry<EvalResult>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "generation",
        "individual",
        "genotype",
        "robots",
        "f1",
        "f2",
        "f3",
        "feasible",
        "rank",
        "crowding",
        "fitness",
    ])?;
    for h in history {
        w.write_record([
            h.generation.to_string(),
            h.index.to_string(),
            h.genotype.to_bit_string(),
            h.eval.robots_used.to_string(),
            h.eval.f1.to_string(),
            h.eval.f2.to_string(),
            h.eval.f3.to_string(),
            h.eval.feasible.to_string(),
            h.rank.to_string(),
            h.crowding.to_string(),
            h.fitness.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(f1: f64, f2: f64, f3: f64) -> EvalResult {
        EvalResult {
            f1,
            f2,
            f3,
            feasible: true,
            robots_used: 1,
            reason: None,
        }
    }

    #[test]
    fn fitness_single_weight() {
        let rs = [result(0.0, 0.0, 0.0), result(0.7, 0.0, 0.0), result(1.0, 0.0, 0.0)];
        let f = scalar_fitness(&rs, &[1.0, 0.0, 0.0]).unwrap();
        assert!((f[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn fitness_equal_weights() {
        // normalised (0.6, 0.3, 0.9) against spreads of [0, 1]
        let rs = [
            result(0.0, 0.0, 0.0),
            result(0.6, 0.3, 0.9),
            result(1.0, 1.0, 1.0),
        ];
        let w = [1.0 / 3.0; 3];
        let f = scalar_fitness(&rs, &w).unwrap();
        assert!((f[1] - (0.6 + 0.7 + 0.1) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fitness_degenerate_spread() {
        let rs = [result(1.0, 1.0, 1.0), result(1.0, 1.0, 1.0)];
        let f = scalar_fitness(&rs, &[0.5, 0.25, 0.25]).unwrap();
        assert!(f.iter().all(|x| (x - 0.5).abs() < 1e-12));
    }

    #[test]
    fn crossover_swaps_tails() {
        let a = Genotype::from_bits(90.0, vec![true; 4]).unwrap();
        let b = Genotype::from_bits(90.0, vec![false; 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (c1, c2) = crossover(&a, &b, 1.0, &mut rng);
        let cut = c1.bits.iter().position(|x| !x).unwrap();
        assert!((1..4).contains(&cut));
        assert!(c1.bits[..cut].iter().all(|x| *x) && c1.bits[cut..].iter().all(|x| !x));
        assert!(c2.bits.iter().zip(&c1.bits).all(|(x, y)| x != y));
    }

    #[test]
    fn select_keeps_population_size() {
        let gs: Vec<Genotype> = (0..8)
            .map(|k| Genotype::from_nodes(45.0, &[k]).unwrap())
            .collect();
        let es: Vec<EvalResult> = (0..8).map(|k| result(k as f64, 0.0, 0.0)).collect();
        let chosen = select(&gs, &es, 3);
        assert_eq!(chosen.len(), 3);
        assert_eq!(chosen[0], gs[7]);
    }
}
