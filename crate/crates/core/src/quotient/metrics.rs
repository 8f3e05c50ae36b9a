use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::graph::QuotientGraph;

/// Graphs with more vertices than this get a flagged double-sweep lower
/// bound instead of an exact diameter.
pub const DEFAULT_DIAMETER_CAP: usize = 200_000;

const UNSEEN: u32 = u32::MAX;

/// Distance between the classes of two independent uniform marks.
pub fn typical_distance<R: Rng + ?Sized>(gq: &QuotientGraph, rng: &mut R) -> u32 {
    let v = gq.vertex_count();
    let x = rng.random_range(0..v);
    let y = rng.random_range(0..v);
    if x == y {
        return 0;
    }
    gq.bfs_from(x)[y]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Diameter {
    pub value: u32,
    /// False when `value` is only a double-sweep lower bound.
    pub exact: bool,
}

fn eccentricity(dist: &[u32]) -> u32 {
    let e = dist.iter().copied().max().unwrap_or(0);
    assert!(e != UNSEEN, "diameter of a disconnected graph");
    e
}

/// Maximum BFS eccentricity over every source, sharded over the rayon pool.
pub fn diameter_all_sources(gq: &QuotientGraph) -> u32 {
    (0..gq.vertex_count()).into_par_iter().map(|v| eccentricity(&gq.bfs_from(v))).max().unwrap_or(0)
}

pub fn diameter(gq: &QuotientGraph) -> Diameter {
    diameter_with_cap(gq, DEFAULT_DIAMETER_CAP)
}

/// Exact diameter up to `cap` vertices, double-sweep lower bound above it.
///
/// The exact route keeps per-vertex eccentricity bounds
/// `max(d(v,w), ecc(v) - d(v,w)) <= ecc(w) <= ecc(v) + d(v,w)` from every
/// BFS run so far and drops vertices whose upper bound cannot beat the best
/// eccentricity found. Once single searches stop pruning much, the
/// survivors get their eccentricities computed 64 at a time by a
/// bit-parallel BFS. It returns the same value as [`diameter_all_sources`].
pub fn diameter_with_cap(gq: &QuotientGraph, cap: usize) -> Diameter {
    let count = gq.vertex_count();
    if count > cap {
        return Diameter { value: double_sweep_lower_bound(gq, 4), exact: false };
    }
    let mut lower = vec![0u32; count];
    let mut upper = vec![UNSEEN; count];
    let mut candidates: Vec<u32> = (0..count as u32).collect();
    let mut best = 0u32;
    let mut pick_high = true;
    // start from a vertex of maximum degree, a reasonable centre guess
    let adj = gq.adjacency();
    let mut next = (0..count).max_by_key(|&v| (adj.neighbors(v).len(), std::cmp::Reverse(v))).unwrap_or(0);
    loop {
        let dist = gq.bfs_from(next);
        let ecc = eccentricity(&dist);
        best = best.max(ecc);
        lower[next] = ecc;
        upper[next] = ecc;
        let before = candidates.len();
        candidates.retain(|&w| {
            let w = w as usize;
            let d = dist[w];
            lower[w] = lower[w].max(d.max(ecc - d));
            upper[w] = upper[w].min(ecc + d);
            upper[w] > best && lower[w] != upper[w]
        });
        if candidates.is_empty() {
            return Diameter { value: best, exact: true };
        }
        // a 64-source batch costs about one BFS per level
        if before - candidates.len() < PRUNE_WORTH {
            break;
        }
        // alternate between the most promising and the least constrained vertex
        next = if pick_high {
            *candidates.iter().max_by_key(|&&w| (upper[w as usize], std::cmp::Reverse(w))).unwrap() as usize
        } else {
            *candidates.iter().min_by_key(|&&w| (lower[w as usize], w)).unwrap() as usize
        };
        pick_high = !pick_high;
    }
    candidates.sort_unstable_by_key(|&w| (std::cmp::Reverse(upper[w as usize]), w));
    for batch in candidates.chunks(64) {
        let batch: Vec<u32> = batch.iter().copied().filter(|&w| upper[w as usize] > best).collect();
        if batch.is_empty() {
            continue;
        }
        for e in batch_eccentricities(gq, &batch) {
            best = best.max(e);
        }
    }
    Diameter { value: best, exact: true }
}

const PRUNE_WORTH: usize = 8;

/// Eccentricities of up to 64 sources with one BFS over bitsets.
fn batch_eccentricities(gq: &QuotientGraph, sources: &[u32]) -> Vec<u32> {
    assert!(sources.len() <= 64);
    let adj = gq.adjacency();
    let count = gq.vertex_count();
    let mut seen = vec![0u64; count];
    let mut frontier = vec![0u64; count];
    for (i, &s) in sources.iter().enumerate() {
        seen[s as usize] |= 1 << i;
        frontier[s as usize] |= 1 << i;
    }
    let mut ecc = vec![0u32; sources.len()];
    let mut next = vec![0u64; count];
    let mut level = 0;
    loop {
        level += 1;
        let mut reached = 0u64;
        for v in 0..count {
            let mut bits = 0u64;
            for &w in adj.neighbors(v) {
                bits |= frontier[w as usize];
            }
            bits &= !seen[v];
            next[v] = bits;
            seen[v] |= bits;
            reached |= bits;
        }
        if reached == 0 {
            return ecc;
        }
        for (i, e) in ecc.iter_mut().enumerate() {
            if reached >> i & 1 == 1 {
                *e = level;
            }
        }
        std::mem::swap(&mut frontier, &mut next);
    }
}

/// Repeated double sweep: BFS from the farthest vertex of the previous BFS.
pub fn double_sweep_lower_bound(gq: &QuotientGraph, sweeps: usize) -> u32 {
    let mut source = gq.root();
    let mut best = 0;
    for _ in 0..sweeps.max(1) {
        let dist = gq.bfs_from(source);
        let (far, &d) = dist.iter().enumerate().max_by_key(|&(i, &d)| (d, std::cmp::Reverse(i))).unwrap();
        assert!(d != UNSEEN, "diameter of a disconnected graph");
        best = best.max(d);
        source = far;
    }
    best
}

/// Largest `r` for which the subgraph induced by the radius-`r` ball around
/// the root is a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum InjectivityRadius {
    /// The root already carries a loop.
    Absent,
    Finite(u32),
    /// No circuit anywhere: the graph is a tree.
    Unbounded,
}

impl InjectivityRadius {
    /// Whether the radius is at least `x` (absent counts as below everything).
    pub fn at_least(self, x: f64) -> bool {
        match self {
            Self::Absent => false,
            Self::Finite(r) => f64::from(r) >= x,
            Self::Unbounded => true,
        }
    }
}

impl fmt::Display for InjectivityRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Absent => f.write_str("undef"),
            Self::Finite(r) => write!(f, "{r}"),
            Self::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for InjectivityRadius {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Finite(r) => s.serialize_u32(*r),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// The induced ball of radius `r` has vertex set `{d <= r}` and contains
/// every edge (loops and repeats included) whose far endpoint is within
/// `r`; it is connected, so it is a tree iff it has one edge fewer than
/// vertices. Both counts are cumulative histograms over one BFS.
pub fn injectivity_radius(gq: &QuotientGraph) -> InjectivityRadius {
    let dist = gq.bfs_from(gq.root());
    let ecc = eccentricity(&dist) as usize;
    let mut vertices = vec![0i64; ecc + 1];
    for &d in &dist {
        vertices[d as usize] += 1;
    }
    let mut edges = vec![0i64; ecc + 1];
    for &(a, b) in gq.edges() {
        edges[dist[a as usize].max(dist[b as usize]) as usize] += 1;
    }
    let (mut vs, mut es) = (0i64, 0i64);
    for r in 0..=ecc {
        vs += vertices[r];
        es += edges[r];
        if es != vs - 1 {
            return if r == 0 { InjectivityRadius::Absent } else { InjectivityRadius::Finite(r as u32 - 1) };
        }
    }
    InjectivityRadius::Unbounded
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub v: usize,
    pub n: usize,
    pub g: usize,
    pub typical_distance: u32,
    pub diameter: u32,
    pub diameter_exact: bool,
    pub injectivity_radius: InjectivityRadius,
}

pub fn metric_report<R: Rng + ?Sized>(gq: &QuotientGraph, rng: &mut R) -> MetricReport {
    let d = diameter(gq);
    MetricReport {
        v: gq.vertex_count(),
        n: gq.edge_count(),
        g: gq.genus(),
        typical_distance: typical_distance(gq, rng),
        diameter: d.value,
        diameter_exact: d.exact,
        injectivity_radius: injectivity_radius(gq),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::marked::MarkedTree;
    use crate::quotient::glue;
    use crate::sample::{sample_marked_tree, sample_unicellular_graph};
    use crate::tree::RootedPlaneTree;

    fn tree_graph(contour: &str) -> QuotientGraph {
        let t = RootedPlaneTree::from_contour(contour).unwrap();
        let count = t.vertex_count() as u32;
        glue(&MarkedTree::from_labels(t, (0..count).collect()).unwrap())
    }

    #[test]
    fn typical_distance_small_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let single = QuotientGraph::new(1, vec![(0, 0), (0, 0)], 0).unwrap();
        assert!((0..100).all(|_| typical_distance(&single, &mut rng) == 0));

        let double = QuotientGraph::new(2, vec![(0, 1), (0, 1), (1, 1)], 0).unwrap();
        let trials = 40_000;
        let ones: u32 = (0..trials).map(|_| typical_distance(&double, &mut rng)).sum();
        assert!((f64::from(ones) / f64::from(trials) - 0.5).abs() < 0.015);

        let path = tree_graph("((()))");
        let mut hist = [0usize; 3];
        for _ in 0..90_000 {
            hist[typical_distance(&path, &mut rng) as usize] += 1;
        }
        let expected = [1.0 / 3.0, 4.0 / 9.0, 2.0 / 9.0];
        for (h, e) in hist.iter().zip(expected) {
            assert!((*h as f64 / 90_000.0 - e).abs() < 0.01);
        }
    }

    #[test]
    fn diameter_examples() {
        let single = QuotientGraph::new(1, vec![(0, 0), (0, 0)], 0).unwrap();
        assert_eq!(diameter(&single), Diameter { value: 0, exact: true });
        assert_eq!(diameter(&tree_graph("((()))")).value, 2);
        assert_eq!(diameter(&tree_graph("(()()()())")).value, 2);
        let capped = diameter_with_cap(&tree_graph("((()))"), 2);
        assert_eq!(capped, Diameter { value: 2, exact: false });
    }

    #[test]
    fn injectivity_examples() {
        assert_eq!(injectivity_radius(&tree_graph("((()())(()))")), InjectivityRadius::Unbounded);
        let single = QuotientGraph::new(1, vec![(0, 0), (0, 0)], 0).unwrap();
        assert_eq!(injectivity_radius(&single), InjectivityRadius::Absent);
        // root r=0, edge r-a, double edge a-b (plus a loop at b for parity)
        let g = QuotientGraph::new(3, vec![(0, 1), (1, 2), (1, 2), (2, 2)], 0).unwrap();
        assert_eq!(injectivity_radius(&g), InjectivityRadius::Finite(1));
        // a loop away from the root
        let g = QuotientGraph::new(2, vec![(0, 1), (1, 1), (1, 1)], 0).unwrap();
        assert_eq!(injectivity_radius(&g), InjectivityRadius::Finite(0));
        assert_eq!(InjectivityRadius::Finite(3).to_string(), "3");
        assert_eq!(serde_json::to_string(&InjectivityRadius::Unbounded).unwrap(), "\"inf\"");
    }

    // independent check: induced ball subgraph contains a circuit iff a
    // union-find over its edges closes a cycle
    fn brute_injectivity(gq: &QuotientGraph) -> InjectivityRadius {
        let dist = gq.bfs_from(gq.root());
        let ecc = *dist.iter().max().unwrap();
        let mut last_ok: Option<u32> = None;
        for r in 0..=ecc {
            let mut parent: Vec<usize> = (0..gq.vertex_count()).collect();
            fn find(p: &mut Vec<usize>, x: usize) -> usize {
                if p[x] != x {
                    let root = find(p, p[x]);
                    p[x] = root;
                }
                p[x]
            }
            let mut circuit = false;
            for &(a, b) in gq.edges() {
                if dist[a as usize] <= r && dist[b as usize] <= r {
                    let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
                    if ra == rb {
                        circuit = true;
                    } else {
                        parent[ra] = rb;
                    }
                }
            }
            if circuit {
                return last_ok.map_or(InjectivityRadius::Absent, InjectivityRadius::Finite);
            }
            last_ok = Some(r);
        }
        InjectivityRadius::Unbounded
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn metrics_agree_with_brute_force(n in 1usize..120, seed: u64, theta in 0.0f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = ((theta * n as f64) as usize).min(n / 2);
            let (mt, _) = sample_marked_tree(n, g, &mut rng).unwrap();
            let gq = glue(&mt);
            let exact = diameter_all_sources(&gq);
            prop_assert_eq!(diameter(&gq), Diameter { value: exact, exact: true });
            prop_assert!(double_sweep_lower_bound(&gq, 2) <= exact);
            prop_assert!(typical_distance(&gq, &mut rng) <= exact);
            prop_assert!(exact as usize <= gq.vertex_count() - 1);
            let inj = injectivity_radius(&gq);
            prop_assert_eq!(inj, brute_injectivity(&gq));
            prop_assert_eq!(inj == InjectivityRadius::Unbounded, gq.genus() == 0);
        }
    }

    #[test]
    fn batch_eccentricities_match_single_searches() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let gq = sample_unicellular_graph(3000, 700, &mut rng).unwrap();
        let sources: Vec<u32> = (0..64).map(|i| i * 17).collect();
        let batch = batch_eccentricities(&gq, &sources);
        for (&s, e) in sources.iter().zip(batch) {
            assert_eq!(e, eccentricity(&gq.bfs_from(s as usize)));
        }
        assert_eq!(batch_eccentricities(&gq, &[5]), vec![eccentricity(&gq.bfs_from(5))]);
    }

    #[test]
    fn exact_diameter_on_mid_sized_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &(n, g) in &[(400, 100), (1000, 50), (1000, 0), (2000, 900), (8000, 2000)] {
            let gq = sample_unicellular_graph(n, g, &mut rng).unwrap();
            assert_eq!(diameter(&gq).value, diameter_all_sources(&gq));
        }
    }
}
