use haulbots_core::evo::{
    constrained_dominates, evolve_with, nondominated_sort, Candidate, Scored,
};
use haulbots_core::{GAParams, Genotype};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Toy {
    x: f64,
}

impl Scored for Toy {
    fn objectives(&self) -> Vec<f64> {
        vec![self.x * self.x, (self.x - 2.0) * (self.x - 2.0)]
    }
    fn feasible(&self) -> bool {
        true
    }
}

/// Eight bits, most significant first, mapped onto [-1, 3].
fn decode_x(g: &Genotype) -> f64 {
    let v = g.bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
    -1.0 + 4.0 * v as f64 / 255.0
}

fn toy_params(seed: u64) -> GAParams {
    GAParams {
        weights: vec![0.5, 0.5],
        seed,
        ..GAParams::default()
    }
}

#[test]
fn toy_front_converges_and_spreads() {
    let run = evolve_with(&toy_params(11), 45.0, |g| Ok(Toy { x: decode_x(g) })).unwrap();
    assert_eq!(run.generations(), 21);
    let front: Vec<[f64; 2]> = run
        .archive
        .iter()
        .map(|h| {
            let o = h.eval.objectives();
            [o[0], o[1]]
        })
        .collect();
    assert!(!front.is_empty());

    // f2 = (sqrt(f1) - 2)^2 on the true front, f1 in [0, 4]
    for p in &front {
        assert!(p[0] <= 4.0 + 1e-9);
        let on_curve = (p[0].sqrt() - 2.0).powi(2);
        assert!((p[1] - on_curve).abs() <= 0.05, "{p:?} off the front");
    }
    for k in 0..10 {
        let x = 2.0 * k as f64 / 9.0;
        let target = [x * x, (x - 2.0) * (x - 2.0)];
        let nearest = front
            .iter()
            .map(|p| ((p[0] - target[0]).powi(2) + (p[1] - target[1]).powi(2)).sqrt() / 4.0)
            .fold(f64::INFINITY, f64::min);
        assert!(nearest <= 0.05, "no front member near x = {x}: {nearest}");
    }
}

#[test]
fn same_seed_same_history() {
    let a = evolve_with(&toy_params(3), 45.0, |g| Ok(Toy { x: decode_x(g) })).unwrap();
    let b = evolve_with(&toy_params(3), 45.0, |g| Ok(Toy { x: decode_x(g) })).unwrap();
    let bits = |r: &haulbots_core::evo::EvolutionRun<Toy>| {
        r.history.iter().map(|h| h.genotype.to_bit_string()).collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn infeasible_never_archived() {
    #[derive(Debug, Clone)]
    struct Half(Toy, bool);
    impl Scored for Half {
        fn objectives(&self) -> Vec<f64> {
            self.0.objectives()
        }
        fn feasible(&self) -> bool {
            self.1
        }
    }
    let run = evolve_with(&toy_params(5), 45.0, |g| {
        Ok(Half(Toy { x: decode_x(g) }, g.bits[7]))
    })
    .unwrap();
    assert!(!run.archive.is_empty());
    assert!(run.archive.iter().all(|h| h.eval.1));
}

fn population() -> impl Strategy<Value = Vec<Candidate>> {
    prop::collection::vec(
        (prop::collection::vec(0u8..6, 3), prop::bool::weighted(0.8)),
        1..40,
    )
    .prop_map(|v| {
        v.into_iter()
            .map(|(o, feasible)| Candidate {
                objectives: o.into_iter().map(f64::from).collect(),
                feasible,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn no_front_member_dominated_within_or_by_later_fronts(pop in population()) {
        let r = nondominated_sort(&pop);
        for i in 0..pop.len() {
            for j in 0..pop.len() {
                if constrained_dominates(&pop[j], &pop[i]) {
                    prop_assert!(r.ranks[j] < r.ranks[i]);
                }
            }
        }
        let max_feasible = (0..pop.len()).filter(|&i| pop[i].feasible).map(|i| r.ranks[i]).max();
        let min_infeasible = (0..pop.len()).filter(|&i| !pop[i].feasible).map(|i| r.ranks[i]).min();
        if let (Some(a), Some(b)) = (max_feasible, min_infeasible) {
            prop_assert!(a < b);
        }
    }

    #[test]
    fn crowding_non_negative_with_infinite_extremes(pop in population()) {
        let r = nondominated_sort(&pop);
        prop_assert!(r.crowding.iter().all(|d| *d >= 0.0));
        for front in &r.fronts {
            for m in 0..3 {
                let lo = front.iter().map(|&i| pop[i].objectives[m]).fold(f64::INFINITY, f64::min);
                let hit = front.iter().any(|&i| pop[i].objectives[m] == lo && r.crowding[i].is_infinite());
                prop_assert!(hit);
            }
        }
    }
}
