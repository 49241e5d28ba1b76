//! Bidirectional tree search guided by a grid over the robot centroid, with
//! growth biased toward exterior (frontier) cells and lazy payload checks.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    centroid, joint_segment_free, separation_ok, validate_payload_path, Joint, ObstacleMask, Path,
    PlanProblem, SEGMENT_SAMPLES,
};
use crate::error::{Error, Result};
use crate::Vec2;

const EXTERIOR_BIAS: f64 = 0.75;
const GOAL_BIAS: f64 = 0.1;
const CONNECT_HOPS: f64 = 6.0;
const SAMPLE_TRIES: usize = 20;
const PENALTY_FACTOR: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub iterations: usize,
    pub states: usize,
    pub cells: usize,
    /// Tree connections rejected by payload validation.
    pub payload_rejections: usize,
    pub planning_time: f64,
}

type CellKey = (i64, i64);

#[derive(Debug, Default)]
struct Cell {
    nodes: Vec<usize>,
    selections: u32,
}

struct Node {
    q: Joint,
    parent: Option<usize>,
}

#[derive(Default)]
struct Tree {
    nodes: Vec<Node>,
    cells: BTreeMap<CellKey, Cell>,
}

impl Tree {
    fn rooted(q: Joint, key: CellKey) -> Self {
        let mut t = Self::default();
        t.add(q, None, key);
        t
    }

    fn add(&mut self, q: Joint, parent: Option<usize>, key: CellKey) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { q, parent });
        self.cells.entry(key).or_default().nodes.push(id);
        id
    }

    fn exterior(&self, key: &CellKey) -> bool {
        let (x, y) = *key;
        [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
            .iter()
            .any(|k| !self.cells.contains_key(k))
    }

    /// Root-to-node chain.
    fn chain(&self, mut id: usize) -> Vec<Joint> {
        let mut out = vec![self.nodes[id].q];
        while let Some(p) = self.nodes[id].parent {
            out.push(self.nodes[p].q);
            id = p;
        }
        out.reverse();
        out
    }
}

struct Search<'a> {
    problem: &'a PlanProblem,
    mask: &'a ObstacleMask,
    proj_cell: f64,
    penalty: BTreeMap<CellKey, u32>,
}

impl Search<'_> {
    fn key(&self, q: &Joint) -> CellKey {
        let c = centroid(q);
        ((c.x / self.proj_cell).floor() as i64, (c.y / self.proj_cell).floor() as i64)
    }

    fn state_ok(&self, q: &Joint) -> bool {
        separation_ok(q, self.problem.sep_p)
            && q.iter().all(|p| self.mask.disk_free(p, self.problem.robot_radius))
    }

    /// Samples along `a → b`: at least the validation count, and dense
    /// enough that no robot skips a cell.
    fn samples(&self, a: &Joint, b: &Joint) -> usize {
        let longest = (0..3).map(|i| (b[i] - a[i]).norm()).fold(0.0, f64::max);
        SEGMENT_SAMPLES.max((longest / (0.25 * self.mask.cell_size)).ceil() as usize)
    }

    fn edge_ok(&self, a: &Joint, b: &Joint) -> bool {
        joint_segment_free(a, b, self.mask, self.problem.robot_radius, self.samples(a, b)).is_none()
    }

    /// Straight joint motion `a → b` cut into pieces no robot moves more
    /// than `max_hop` in; excludes `a`, includes `b`.
    fn subdivide(&self, a: &Joint, b: &Joint) -> Vec<Joint> {
        let longest = (0..3).map(|i| (b[i] - a[i]).norm()).fold(0.0, f64::max);
        let k = ((longest / self.problem.max_hop) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (1..=k)
            .map(|s| {
                let t = s as f64 / k as f64;
                std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
            })
            .collect()
    }

    fn line_ok(&self, a: &Joint, b: &Joint) -> bool {
        let mut prev = *a;
        for q in self.subdivide(a, b) {
            if !self.edge_ok(&prev, &q) {
                return false;
            }
            prev = q;
        }
        true
    }

    fn cell_weight(&self, key: &CellKey, cell: &Cell) -> f64 {
        let p = self.penalty.get(key).copied().unwrap_or(0);
        PENALTY_FACTOR.powi(p as i32) / ((1.0 + cell.selections as f64) * (1.0 + cell.nodes.len() as f64).sqrt())
    }

    fn pick_cell<R: Rng>(&self, tree: &Tree, rng: &mut R) -> CellKey {
        let (ext, int): (Vec<_>, Vec<_>) = tree.cells.iter().partition(|(k, _)| tree.exterior(k));
        let pool = if int.is_empty() || (!ext.is_empty() && rng.random_bool(EXTERIOR_BIAS)) {
            ext
        } else {
            int
        };
        let weights: Vec<f64> = pool.iter().map(|(k, c)| self.cell_weight(k, c)).collect();
        let idx = WeightedIndex::new(&weights).map_or(0, |w| w.sample(rng));
        *pool[idx].0
    }

    /// Random admissible neighbour: robot 0 moves first, then robots 1 and 2
    /// are drawn within their hop disks and accepted only inside the p/2 ball
    /// of the robot before them.
    fn sample_near<R: Rng>(&self, q: &Joint, rng: &mut R) -> Option<Joint> {
        let hop = self.problem.max_hop;
        let half = 0.5 * self.problem.sep_p;
        let mut disk = |c: Vec2| loop {
            let v = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if v.norm_squared() <= 1.0 {
                return c + hop * v;
            }
        };
        let r0 = disk(q[0]);
        let r1 = (0..SAMPLE_TRIES).map(|_| disk(q[1])).find(|p| (p - r0).norm() < half)?;
        let r2 = (0..SAMPLE_TRIES).map(|_| disk(q[2])).find(|p| (p - r1).norm() < half)?;
        Some([r0, r1, r2])
    }

    /// Step from `q` toward `target` along the straight joint line, no robot
    /// moving further than `max_hop`.
    fn steer(&self, q: &Joint, target: &Joint) -> Joint {
        let longest = (0..3).map(|i| (target[i] - q[i]).norm()).fold(0.0, f64::max);
        let t = if longest > self.problem.max_hop {
            self.problem.max_hop / longest
        } else {
            1.0
        };
        std::array::from_fn(|i| q[i] + t * (target[i] - q[i]))
    }

    /// Greedy shortcutting: from each waypoint jump to the furthest later one
    /// reachable in a straight, collision-free line.
    fn shortcut(&self, path: &[Joint]) -> Vec<Joint> {
        let mut out = vec![path[0]];
        let mut i = 0;
        while i + 1 < path.len() {
            let j = (i + 1..path.len())
                .rev()
                .find(|&j| j == i + 1 || self.line_ok(&path[i], &path[j]))
                .unwrap_or(i + 1);
            if j == i + 1 {
                out.push(path[j]);
            } else {
                out.extend(self.subdivide(&path[i], &path[j]));
            }
            i = j;
        }
        out
    }

    fn penalise(&mut self, payload: &[Vec2]) {
        for p in payload {
            let c = *p - self.problem.payload_offset;
            let key = ((c.x / self.proj_cell).floor() as i64, (c.y / self.proj_cell).floor() as i64);
            *self.penalty.entry(key).or_default() += 1;
        }
    }
}

fn joint_dist(a: &Joint, b: &Joint) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).norm()).fold(0.0, f64::max)
}

/// Plan a joint path from `problem.starts` to `problem.goals`.
pub fn plan(problem: &PlanProblem, mask: &ObstacleMask, seed: u64) -> Result<Path> {
    plan_with_stats(problem, mask, seed).map(|(p, _)| p)
}

/// [`plan`] plus exploration statistics.
///
/// Two trees grow from the start and goal states. Each iteration picks a
/// centroid cell of one tree (exterior cells preferred, busy and penalised
/// cells down-weighted), extends one of its states by a random admissible
/// move or a step toward the other tree, and tries to join the trees through
/// nearby states. A joined path is shortcut and then checked for payload
/// clearance; on failure the cells along the offending stretch are penalised
/// and search continues.
pub fn plan_with_stats(problem: &PlanProblem, mask: &ObstacleMask, seed: u64) -> Result<(Path, PlanStats)> {
    problem.validate()?;
    let started = Instant::now();
    let mut search = Search {
        problem,
        mask,
        proj_cell: 4.0 * mask.cell_size,
        penalty: BTreeMap::new(),
    };
    for (name, q) in [("starts", &problem.starts), ("goals", &problem.goals)] {
        if !search.state_ok(q) {
            return Err(crate::error::invalid(name, "robots collide with obstacles"));
        }
    }
    let stats = |iterations, trees: &[Tree; 2], payload_rejections, started: Instant| PlanStats {
        iterations,
        states: trees.iter().map(|t| t.nodes.len()).sum(),
        cells: trees
            .iter()
            .flat_map(|t| t.cells.keys())
            .collect::<BTreeSet<_>>()
            .len(),
        payload_rejections,
        planning_time: started.elapsed().as_secs_f64(),
    };

    if joint_dist(&problem.starts, &problem.goals) == 0.0 {
        let path = Path::new(vec![problem.starts], problem.payload_offset);
        if validate_payload_path(&path, mask, problem.payload_radius).is_none() {
            let trees = [Tree::default(), Tree::default()];
            return Ok((path, stats(0, &trees, 0, started)));
        }
    }
    check_reachable(problem, mask)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trees = [
        Tree::rooted(problem.starts, search.key(&problem.starts)),
        Tree::rooted(problem.goals, search.key(&problem.goals)),
    ];
    let mut failed_links: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut payload_rejections = 0;
    let mut iterations = 0;

    loop {
        if started.elapsed().as_secs_f64() > problem.time_budget
            || problem.max_iterations.is_some_and(|m| iterations >= m)
        {
            let s = stats(iterations, &trees, payload_rejections, started);
            return Err(Error::PlannerTimeout {
                iterations: s.iterations,
                states: s.states,
                cells: s.cells,
            });
        }
        let side = iterations % 2;
        iterations += 1;

        let key = search.pick_cell(&trees[side], &mut rng);
        let from = {
            let cell = trees[side].cells.get_mut(&key).expect("picked cell exists");
            cell.selections += 1;
            cell.nodes[rng.random_range(0..cell.nodes.len())]
        };
        let q = trees[side].nodes[from].q;
        let candidate = if rng.random_bool(GOAL_BIAS) {
            let other = &trees[1 - side];
            let target = other.nodes[rng.random_range(0..other.nodes.len())].q;
            Some(search.steer(&q, &target))
        } else {
            search.sample_near(&q, &mut rng)
        };
        let Some(next) = candidate else { continue };
        if !search.state_ok(&next) || !search.edge_ok(&q, &next) {
            continue;
        }
        let new_key = search.key(&next);
        let id = trees[side].add(next, Some(from), new_key);

        let Some(partner) = nearest_in_neighbourhood(&trees[1 - side], new_key, &next) else {
            continue;
        };
        let link = if side == 0 { (id, partner) } else { (partner, id) };
        let other_q = trees[1 - side].nodes[partner].q;
        if joint_dist(&next, &other_q) > CONNECT_HOPS * problem.max_hop
            || failed_links.contains(&link)
            || !search.line_ok(&next, &other_q)
        {
            continue;
        }

        let mut raw = trees[0].chain(link.0);
        let last = *raw.last().expect("chain is never empty");
        let goal_q = trees[1].nodes[link.1].q;
        raw.extend(search.subdivide(&last, &goal_q));
        let mut tail = trees[1].chain(link.1);
        tail.reverse();
        raw.extend(tail.into_iter().skip(1));

        let smooth = search.shortcut(&raw);
        for candidate in [smooth, raw.clone()] {
            let path = Path::new(candidate, problem.payload_offset);
            if validate_payload_path(&path, mask, problem.payload_radius).is_none() {
                return Ok((path, stats(iterations, &trees, payload_rejections, started)));
            }
        }
        payload_rejections += 1;
        failed_links.insert(link);
        let path = Path::new(raw, problem.payload_offset);
        if let Some(seg) = validate_payload_path(&path, mask, problem.payload_radius) {
            search.penalise(&path.payload[seg..=seg + 1]);
        }
    }
}

fn nearest_in_neighbourhood(tree: &Tree, key: CellKey, q: &Joint) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for dx in -1..=1 {
        for dy in -1..=1 {
            let Some(cell) = tree.cells.get(&(key.0 + dx, key.1 + dy)) else {
                continue;
            };
            for &n in &cell.nodes {
                let d = joint_dist(q, &tree.nodes[n].q);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, n));
                }
            }
        }
    }
    best.map(|(_, n)| n)
}

/// Each robot's start and goal must lie in the same 4-connected component of
/// free cells; otherwise no continuous motion joins them.
fn check_reachable(problem: &PlanProblem, mask: &ObstacleMask) -> Result<()> {
    let labels = mask.free_components();
    let label = |p: &Vec2| mask.cell_of(p).map(|(r, c)| labels[r * mask.cols + c]);
    for i in 0..3 {
        let (a, b) = (label(&problem.starts[i]), label(&problem.goals[i]));
        if a.is_none() || a != b {
            return Err(Error::Unreachable(format!(
                "robot {i}: start and goal lie in disconnected free regions"
            )));
        }
    }
    Ok(())
}
