//! Instrumented exploration of marked trees.
//!
//! [`explore_one`] reveals the quotient ball around a uniform mark one
//! tree neighbour at a time; [`explore_two`] grows worms from the classes of
//! marks 0 and 1 towards a far vertex, with dead vertices, disasters and a
//! collision test between its two stages. Both return full step-by-step
//! traces so the bookkeeping can be checked after the fact.

mod first;
mod second;

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::marked::MarkedTree;
use crate::sample::sample_marking;
use crate::tree::{RootedPlaneTree, TreeIndex, NO_PARENT};

pub use first::{explore_one, explore_one_from};
pub use second::{
    coupling_tree_levels, explore_two, CouplingTree, DisasterEvent, ProcessTwoConfig, ProcessTwoRun, WormState,
};

/// Stop once the step count exceeds `max_steps` or the number of completed
/// rounds exceeds `max_rounds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub max_steps: f64,
    pub max_rounds: f64,
}

impl Thresholds {
    /// `n^(1/10)` steps, `ln n` rounds.
    pub fn process_one(n: usize) -> Self {
        let n = n.max(1) as f64;
        Self { max_steps: n.powf(0.1), max_rounds: n.ln() }
    }

    /// `n^(3/4)` steps, `ln^2 n` rounds.
    pub fn process_two(n: usize) -> Self {
        let n = n.max(1) as f64;
        Self { max_steps: n.powf(0.75), max_rounds: n.ln().powi(2) }
    }

    fn steps_exceeded(limits: Option<Self>, steps: usize) -> bool {
        limits.is_some_and(|t| steps as f64 > t.max_steps)
    }

    fn rounds_exceeded(limits: Option<Self>, rounds: usize) -> bool {
        limits.is_some_and(|t| rounds as f64 > t.max_rounds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StepLimit,
    RoundLimit,
    /// Nothing left to explore.
    Exhausted,
    /// The next ancestor to reveal was already revealed by this stage.
    SelfHit,
    /// The explored vertex has no live ancestor towards the far vertex.
    NoAncestor,
    /// Second stage came within distance one of the first stage.
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexState {
    Unrevealed,
    Active,
    Neutral,
    Dead,
}

/// One step of an exploration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    /// 1-based step number.
    pub step: usize,
    /// 1-based round; round `r + 1` explores the vertices first revealed in round `r`.
    pub round: usize,
    pub explored: u32,
    /// The tree neighbour whose class is revealed (first process) or the
    /// nearest live ancestor (second process).
    pub target: u32,
    /// Vertices newly revealed as active.
    pub revealed: Vec<u32>,
    /// Newly revealed vertices other than `target`, uniformly shuffled.
    pub seeds: Vec<u32>,
    /// Vertices newly declared dead.
    pub dead: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplorationTrace {
    pub start_mark: u32,
    /// `rounds[r]` lists, ascending, the active vertices first revealed in
    /// round `r`; entries up to `completed_rounds` are final.
    pub rounds: Vec<Vec<u32>>,
    pub completed_rounds: usize,
    pub steps: Vec<StepRecord>,
    /// Seeds in reveal order, uniformly ordered within each step.
    pub seeds: Vec<u32>,
    /// Fully explored (neutral) vertices in exploration order.
    pub explored: Vec<u32>,
    /// All revealed non-dead vertices at the end, ascending.
    pub revealed: Vec<u32>,
    /// All dead vertices at the end, ascending.
    pub dead: Vec<u32>,
    pub termination: Termination,
}

impl ExplorationTrace {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn states(&self, vertex_count: usize) -> Vec<VertexState> {
        let mut s = vec![VertexState::Unrevealed; vertex_count];
        for &v in &self.revealed {
            s[v as usize] = VertexState::Active;
        }
        for &v in &self.explored {
            s[v as usize] = VertexState::Neutral;
        }
        for &v in &self.dead {
            s[v as usize] = VertexState::Dead;
        }
        s
    }
}

/// Observable events of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventLog {
    /// Bad pairs among the seeds (first process only; empty for the second).
    pub bad_pairs: Vec<(u32, u32)>,
    pub disasters: Vec<DisasterEvent>,
    /// Second-stage step at which the collision happened (0 = at the start).
    pub collision_step: Option<usize>,
    pub termination: Vec<Termination>,
}

/// `(ln n)^2`, the separation below which a pair is bad.
pub fn bad_pair_threshold(n: usize) -> f64 {
    (n.max(1) as f64).ln().powi(2)
}

/// `C(u, v)`: distance from the deepest common ancestor of `u` and `v` to
/// the nearest of `u`, `v` and the root.
pub fn pair_separation(index: &TreeIndex, u: usize, v: usize) -> u32 {
    let w = index.meet(u, v);
    let dw = index.depth[w];
    (index.depth[u] - dw).min(index.depth[v] - dw).min(dw)
}

/// All unordered pairs (by position in `vertices`) with separation below
/// `threshold`.
pub fn find_bad_pairs(index: &TreeIndex, vertices: &[u32], threshold: f64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            if f64::from(pair_separation(index, u as usize, v as usize)) < threshold {
                out.push((u, v));
            }
        }
    }
    out
}

/// Connected components of the subgraph of `tree` induced by `vertices`,
/// each sorted, ordered by their smallest vertex.
pub fn revealed_components(index: &TreeIndex, vertices: &[u32]) -> Vec<Vec<u32>> {
    let set: std::collections::HashSet<u32> = vertices.iter().copied().collect();
    // in a tree, a component is determined by its top vertex: walk up while
    // the parent is also in the set
    let mut by_top: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut top_cache: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
    for &v in vertices {
        let mut path = vec![v];
        let mut x = v;
        let top = loop {
            if let Some(&t) = top_cache.get(&x) {
                break t;
            }
            let p = index.parent[x as usize];
            if p == NO_PARENT || !set.contains(&p) {
                break x;
            }
            x = p;
            path.push(x);
        };
        for y in path {
            top_cache.insert(y, top);
        }
        by_top.entry(top).or_default().push(v);
    }
    let mut out: Vec<Vec<u32>> = by_top
        .into_values()
        .map(|mut c| {
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Union of the tree paths from the root to the vertex of each revealed
/// component closest to the root, endpoints included. Ascending.
pub fn compute_web(index: &TreeIndex, revealed: &[u32]) -> Vec<u32> {
    let mut web = std::collections::BTreeSet::new();
    for component in revealed_components(index, revealed) {
        let top = *component.iter().min_by_key(|&&v| (index.depth[v as usize], v)).unwrap();
        let mut x = top as usize;
        // stop early once we join a path already in the web
        while web.insert(x as u32) {
            let p = index.parent[x];
            if p == NO_PARENT {
                break;
            }
            x = p as usize;
        }
    }
    web.into_iter().collect()
}

/// Whether every component of `revealed` holds exactly one of `seeds` and
/// meets the web in at most one vertex.
pub fn web_constraint_holds(index: &TreeIndex, revealed: &[u32], seeds: &[u32]) -> bool {
    let web: std::collections::HashSet<u32> = compute_web(index, revealed).into_iter().collect();
    let seeds: std::collections::HashSet<u32> = seeds.iter().copied().collect();
    revealed_components(index, revealed).iter().all(|c| {
        c.iter().filter(|v| seeds.contains(v)).count() == 1 && c.iter().filter(|v| web.contains(v)).count() <= 1
    })
}

/// Low-dimensional image of a seed sequence used to compare it with an
/// i.i.d. uniform sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedStatistic {
    Constant,
    /// Buckets (by rank of subtree size, `buckets` equal shares) of the first
    /// `length` entries; shorter sequences are padded with a sentinel.
    SubtreeRank { buckets: usize, length: usize },
}

impl Default for SeedStatistic {
    fn default() -> Self {
        Self::SubtreeRank { buckets: 4, length: 3 }
    }
}

fn subtree_rank_buckets(tree: &RootedPlaneTree, buckets: usize) -> Vec<u8> {
    let count = tree.vertex_count();
    let mut size = vec![1u32; count];
    // preorder ids: children have larger ids than their parent
    for v in (0..count).rev() {
        for &c in tree.children(v) {
            size[v] += size[c as usize];
        }
    }
    let mut order: Vec<u32> = (0..count as u32).collect();
    order.sort_by_key(|&v| (size[v as usize], v));
    let mut bucket = vec![0u8; count];
    for (rank, &v) in order.iter().enumerate() {
        bucket[v as usize] = (rank * buckets / count) as u8;
    }
    bucket
}

impl SeedStatistic {
    fn key(&self, buckets: &[u8], seq: &[u32]) -> Vec<u8> {
        match *self {
            Self::Constant => Vec::new(),
            Self::SubtreeRank { length, .. } => {
                (0..length).map(|i| seq.get(i).map_or(u8::MAX, |&v| buckets[v as usize])).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvEstimate {
    pub tv: f64,
    pub trials: usize,
    /// Distinct statistic values seen on either side.
    pub cells: usize,
    /// Rough plug-in bias scale, `sqrt(cells / trials)`.
    pub noise: f64,
}

/// Plug-in total-variation estimate between the law of the seed sequence
/// of [`explore_one`] (marking of `mt`'s tree redrawn uniformly each trial)
/// and an i.i.d. uniform vertex sequence of the same length, both pushed
/// through `statistic`. With `self_compare`, the seed side is compared
/// against an independent copy of itself instead.
pub fn seeds_vs_iid_distance<R: Rng + ?Sized>(
    mt: &MarkedTree,
    rng: &mut R,
    trials: usize,
    statistic: SeedStatistic,
    self_compare: bool,
) -> Result<TvEstimate> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(format!("{trials} trials; need at least 1000")));
    }
    let tree = mt.tree();
    let count = tree.vertex_count();
    let buckets = match statistic {
        SeedStatistic::SubtreeRank { buckets, .. } => subtree_rank_buckets(tree, buckets.clamp(1, 255)),
        SeedStatistic::Constant => Vec::new(),
    };
    let thresholds = Some(Thresholds::process_one(mt.n()));
    let seed_sequence = |rng: &mut R| {
        let fresh = sample_marking(tree.clone(), mt.lambda(), rng).expect("sizes already match");
        explore_one(&fresh, thresholds, rng).seeds
    };
    let mut left: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    let mut right: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    for _ in 0..trials {
        let seeds = seed_sequence(rng);
        *left.entry(statistic.key(&buckets, &seeds)).or_insert(0) += 1;
        let other = if self_compare {
            seed_sequence(rng)
        } else {
            (0..seeds.len()).map(|_| rng.random_range(0..count) as u32).collect()
        };
        *right.entry(statistic.key(&buckets, &other)).or_insert(0) += 1;
    }
    let mut keys: Vec<&Vec<u8>> = left.keys().chain(right.keys()).collect();
    keys.sort();
    keys.dedup();
    let t = trials as f64;
    let tv = keys
        .iter()
        .map(|k| {
            let a = left.get(*k).copied().unwrap_or(0) as f64;
            let b = right.get(*k).copied().unwrap_or(0) as f64;
            (a - b).abs() / t
        })
        .sum::<f64>()
        / 2.0;
    Ok(TvEstimate { tv, trials, cells: keys.len(), noise: (keys.len() as f64 / t).sqrt() })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::sample::sample_marked_tree;

    #[test]
    fn web_examples() {
        // root 0 with branches 0-1-2-3 and 0-4-5-6
        let t = RootedPlaneTree::from_contour("(((()))((())))").unwrap();
        let idx = t.index();
        assert_eq!(compute_web(&idx, &[0, 1]), vec![0]);
        let path = RootedPlaneTree::path(5);
        assert_eq!(compute_web(&path.index(), &[5]), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(compute_web(&idx, &[3, 6]), vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(compute_web(&idx, &[2, 3, 5]), vec![0, 1, 2, 4, 5]);
        assert_eq!(revealed_components(&idx, &[2, 3, 5, 0]), vec![vec![0], vec![2, 3], vec![5]]);
    }

    #[test]
    fn bad_pair_examples() {
        let t = RootedPlaneTree::from_contour("(((()))((())))").unwrap();
        let idx = t.index();
        assert_eq!(pair_separation(&idx, 0, 6), 0);
        assert_eq!(pair_separation(&idx, 1, 3), 0);
        assert_eq!(pair_separation(&idx, 3, 6), 0);
        assert_eq!(pair_separation(&idx, 2, 3), 0);
        // n = 10: every pair of leaves of a fixed 11-vertex tree is bad
        let t = RootedPlaneTree::from_contour("((()(()))((()())())())").unwrap();
        assert_eq!(t.n(), 10);
        let idx = t.index();
        let leaves: Vec<u32> = (0..11).filter(|&v| t.children(v as usize).is_empty()).collect();
        let pairs = find_bad_pairs(&idx, &leaves, bad_pair_threshold(10));
        assert_eq!(pairs.len(), leaves.len() * (leaves.len() - 1) / 2);
        // a deep spread-out pair is good for a small threshold
        let t = RootedPlaneTree::from_contour("((((((()))))((((()))))))").unwrap();
        let idx = t.index();
        assert_eq!(pair_separation(&idx, 6, 11), 1);
    }

    #[test]
    fn tv_estimator_sanity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mt, _) = sample_marked_tree(300, 60, &mut rng).unwrap();
        let c = seeds_vs_iid_distance(&mt, &mut rng, 1000, SeedStatistic::Constant, false).unwrap();
        assert_eq!(c.tv, 0.0);
        let own = seeds_vs_iid_distance(&mt, &mut rng, 4000, SeedStatistic::default(), true).unwrap();
        assert!(own.tv < 3.0 * own.noise, "{own:?}");
        assert!(seeds_vs_iid_distance(&mt, &mut rng, 999, SeedStatistic::Constant, false).is_err());
    }
}
