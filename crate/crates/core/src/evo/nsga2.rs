//! Fast non-dominated sorting and crowding distance with constrained domination.

use std::cmp::Ordering;

/// Objectives in minimisation form plus feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub objectives: Vec<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortResult {
    /// Front index per candidate, 0 for the non-dominated front.
    pub ranks: Vec<usize>,
    pub crowding: Vec<f64>,
    pub fronts: Vec<Vec<usize>>,
}

/// Pareto domination for minimisation.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Feasible beats infeasible; otherwise plain Pareto domination.
pub fn constrained_dominates(a: &Candidate, b: &Candidate) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        _ => dominates(&a.objectives, &b.objectives),
    }
}

pub fn nondominated_sort(pop: &[Candidate]) -> SortResult {
    let n = pop.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if constrained_dominates(&pop[p], &pop[q]) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if constrained_dominates(&pop[q], &pop[p]) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }

    let mut ranks = vec![0; n];
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| domination_count[p] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            ranks[p] = rank;
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
        rank += 1;
    }

    let mut crowding = vec![0.0; n];
    for front in &fronts {
        for (i, d) in front.iter().zip(crowding_distance(pop, front)) {
            crowding[*i] = d;
        }
    }
    SortResult {
        ranks,
        crowding,
        fronts,
    }
}

/// Crowding distance of each member of `front` (same order). Boundary
/// members of every objective get infinity.
pub fn crowding_distance(pop: &[Candidate], front: &[usize]) -> Vec<f64> {
    let len = front.len();
    let mut dist = vec![0.0; len];
    if len == 0 {
        return dist;
    }
    if len <= 2 {
        return vec![f64::INFINITY; len];
    }
    let n_obj = pop[front[0]].objectives.len();
    let mut order: Vec<usize> = (0..len).collect();
    for m in 0..n_obj {
        let value = |k: usize| pop[front[k]].objectives[m];
        order.sort_by(|&a, &b| value(a).partial_cmp(&value(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let lo = value(order[0]);
        let hi = value(order[len - 1]);
        dist[order[0]] = f64::INFINITY;
        dist[order[len - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for w in 1..len - 1 {
            let k = order[w];
            if dist[k].is_finite() {
                dist[k] += (value(order[w + 1]) - value(order[w - 1])) / span;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cand(obj: &[f64], feasible: bool) -> Candidate {
        Candidate {
            objectives: obj.to_vec(),
            feasible,
        }
    }

    /// Peel fronts by checking every pair against the remaining set: O(n³).
    pub(crate) fn brute_force_ranks(pop: &[Candidate]) -> Vec<usize> {
        let n = pop.len();
        let mut ranks = vec![usize::MAX; n];
        let mut rank = 0;
        while ranks.contains(&usize::MAX) {
            let remaining: Vec<usize> = (0..n).filter(|&i| ranks[i] == usize::MAX).collect();
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| !remaining.iter().any(|&j| constrained_dominates(&pop[j], &pop[i])))
                .collect();
            for i in front {
                ranks[i] = rank;
            }
            rank += 1;
        }
        ranks
    }

    #[test]
    fn singleton_is_rank_zero() {
        let r = nondominated_sort(&[cand(&[1.0, 2.0], true)]);
        assert_eq!(r.ranks, vec![0]);
        assert!(r.crowding[0].is_infinite());
    }

    #[test]
    fn strict_domination() {
        // A = (f1=2, f2=1, f3=1), B = (1, 2, 2); f1 is maximised so it enters negated
        let a = cand(&[-2.0, 1.0, 1.0], true);
        let b = cand(&[-1.0, 2.0, 2.0], true);
        assert_eq!(nondominated_sort(&[a, b]).ranks, vec![0, 1]);
    }

    #[test]
    fn infeasible_always_worse() {
        let good = cand(&[10.0, 10.0], true);
        let bad = cand(&[0.0, 0.0], false);
        assert_eq!(nondominated_sort(&[bad, good]).ranks, vec![1, 0]);
    }

    #[test]
    fn crowding_extremes_infinite() {
        let pop = vec![
            cand(&[0.0, 4.0], true),
            cand(&[1.0, 1.0], true),
            cand(&[2.0, 0.5], true),
            cand(&[4.0, 0.0], true),
        ];
        let r = nondominated_sort(&pop);
        assert!(r.ranks.iter().all(|&x| x == 0));
        assert!(r.crowding[0].is_infinite() && r.crowding[3].is_infinite());
        // interior: (2-0)/4 + (4-0.5)/4 and (4-1)/4 + (1-0)/4
        assert!((r.crowding[1] - 1.375).abs() < 1e-12);
        assert!((r.crowding[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_on_random_populations() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let n = rng.random_range(1..=30);
            let pop: Vec<Candidate> = (0..n)
                .map(|_| {
                    let obj: Vec<f64> = (0..3).map(|_| rng.random_range(0..5) as f64).collect();
                    cand(&obj, rng.random_bool(0.8))
                })
                .collect();
            assert_eq!(nondominated_sort(&pop).ranks, brute_force_ranks(&pop));
        }
    }
}
