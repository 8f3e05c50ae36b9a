//! Exhaustive enumeration and exact arithmetic for small instances.
//!
//! Everything here is brute force over explicit objects with big-integer or
//! rational arithmetic, so it can serve as ground truth for the samplers
//! and for the tree/permutation correspondence.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::composition::{check_feasible, OddComposition};
use crate::error::{Error, Result};
use crate::marked::MarkedTree;
use crate::quotient::glue;
use crate::tree::RootedPlaneTree;

pub const MAX_TREE_EDGES: usize = 12;
pub const MAX_MAP_EDGES: usize = 6;
pub const MAX_DISTRIBUTION_EDGES: usize = 5;
/// Largest vertex count the canonical form handles (permutation brute force).
pub const MAX_CANONICAL_VERTICES: usize = 8;

fn above_cap(what: &'static str, value: usize, cap: usize) -> Result<()> {
    if value > cap {
        return Err(Error::AboveCap { what, value, cap });
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn catalan(n: usize) -> BigUint {
    binomial(2 * n, n) / BigUint::from(n + 1)
}

/// Every plane tree with `n` edges, ordered lexicographically by contour
/// word with `(` before `)`.
pub fn enumerate_plane_trees(n: usize) -> Result<Vec<RootedPlaneTree>> {
    above_cap("tree edges", n, MAX_TREE_EDGES)?;
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(2 * n);
    fn rec(word: &mut Vec<bool>, open: usize, depth: usize, n: usize, out: &mut Vec<RootedPlaneTree>) {
        if word.len() == 2 * n {
            out.push(RootedPlaneTree::from_dyck_steps(word).unwrap());
            return;
        }
        if open < n {
            word.push(true);
            rec(word, open + 1, depth + 1, n, out);
            word.pop();
        }
        if depth > 0 {
            word.push(false);
            rec(word, open, depth - 1, n, out);
            word.pop();
        }
    }
    rec(&mut word, 0, 0, n, &mut out);
    Ok(out)
}

/// Every ordered odd composition of `n + 1` into `parts` parts with its
/// probability proportional to `prod 1 / lambda_i`.
pub fn enumerate_odd_compositions(n: usize, parts: usize) -> Result<Vec<(OddComposition, BigRational)>> {
    check_feasible(n, parts)?;
    let mut raw: Vec<Vec<u32>> = Vec::new();
    fn rec(current: &mut Vec<u32>, left: u32, parts: usize, raw: &mut Vec<Vec<u32>>) {
        if current.len() + 1 == parts {
            if left % 2 == 1 {
                current.push(left);
                raw.push(current.clone());
                current.pop();
            }
            return;
        }
        let mut p = 1;
        while p + (parts - current.len() - 1) as u32 <= left {
            current.push(p);
            rec(current, left - p, parts, raw);
            current.pop();
            p += 2;
        }
    }
    rec(&mut Vec::new(), n as u32 + 1, parts, &mut raw);
    let weights: Vec<BigRational> = raw
        .iter()
        .map(|c| {
            let denom: BigUint = c.iter().map(|&p| BigUint::from(p)).product();
            BigRational::new(1.into(), denom.into())
        })
        .collect();
    let total: BigRational = weights.iter().sum();
    Ok(raw
        .into_iter()
        .zip(weights)
        .map(|(c, w)| (OddComposition::new(c).unwrap(), w / &total))
        .collect())
}

/// Rooted multigraph up to isomorphisms fixing the root: the
/// lexicographically smallest upper-triangular multiplicity matrix (row
/// major, diagonal = loop count) over all relabellings that send the root
/// to vertex 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalGraph {
    vertex_count: usize,
    code: Vec<u8>,
}

impl CanonicalGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.code.iter().map(|&c| c as usize).sum()
    }
}

fn tri_index(v: usize, a: usize, b: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    a * v - a * (a + 1) / 2 + b
}

pub fn canonical_form(vertex_count: usize, edges: &[(u32, u32)], root: usize) -> Result<CanonicalGraph> {
    above_cap("canonical form vertices", vertex_count, MAX_CANONICAL_VERTICES)?;
    if root >= vertex_count {
        return Err(Error::UnknownVertex { vertex: root, vertex_count });
    }
    let v = vertex_count;
    let mut mult = vec![vec![0u8; v]; v];
    for &(a, b) in edges {
        mult[a as usize][b as usize] += 1;
        if a != b {
            mult[b as usize][a as usize] += 1;
        }
    }
    // perm[new] = old; new label 0 is always the root
    let mut rest: Vec<usize> = (0..v).filter(|&x| x != root).collect();
    let mut best: Option<Vec<u8>> = None;
    let mut code = vec![0u8; v * (v + 1) / 2];
    loop {
        let perm: Vec<usize> = std::iter::once(root).chain(rest.iter().copied()).collect();
        for a in 0..v {
            for b in a..v {
                code[tri_index(v, a, b)] = mult[perm[a]][perm[b]];
            }
        }
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code.clone());
        }
        if !next_permutation(&mut rest) {
            break;
        }
    }
    Ok(CanonicalGraph { vertex_count: v, code: best.unwrap() })
}

fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Canonical forms keyed by the raw labelled graph, since the oracle
/// produces the same labelled graph many times.
#[derive(Default)]
struct CanonicalCache(HashMap<(usize, usize, Vec<(u32, u32)>), CanonicalGraph>);

impl CanonicalCache {
    fn get(&mut self, vertex_count: usize, mut edges: Vec<(u32, u32)>, root: usize) -> CanonicalGraph {
        edges.sort_unstable();
        let key = (vertex_count, root, edges);
        if let Some(c) = self.0.get(&key) {
            return c.clone();
        }
        let c = canonical_form(vertex_count, &key.2, root).unwrap();
        self.0.insert(key, c.clone());
        c
    }
}

/// Rooted one-face maps with `n` edges of one genus, with the multiset of
/// their rooted underlying graphs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapCensus {
    pub count: u64,
    pub graphs: BTreeMap<CanonicalGraph, u64>,
}

/// Censuses for every genus `0..=n/2`, from the dart model: darts `0..2n`,
/// the face permutation fixed to `d -> d + 1 mod 2n` (which roots the map
/// at dart 0), the edge involution ranging over all perfect matchings, and
/// vertices read off as cycles of `face ∘ edge`. The root vertex is the one
/// holding dart 0.
pub fn unicellular_census(n: usize) -> Result<Vec<MapCensus>> {
    above_cap("map edges", n, MAX_MAP_EDGES)?;
    let mut out = vec![MapCensus::default(); n / 2 + 1];
    if n == 0 {
        out[0].count = 1;
        out[0].graphs.insert(canonical_form(1, &[], 0)?, 1);
        return Ok(out);
    }
    let darts = 2 * n;
    let mut cache = CanonicalCache::default();
    let mut alpha = vec![usize::MAX; darts];
    fn matchings(alpha: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        let Some(first) = alpha.iter().position(|&x| x == usize::MAX) else {
            visit(alpha);
            return;
        };
        for partner in first + 1..alpha.len() {
            if alpha[partner] == usize::MAX {
                alpha[first] = partner;
                alpha[partner] = first;
                matchings(alpha, visit);
                alpha[first] = usize::MAX;
                alpha[partner] = usize::MAX;
            }
        }
    }
    matchings(&mut alpha, &mut |alpha| {
        let sigma: Vec<usize> = (0..darts).map(|d| (alpha[d] + 1) % darts).collect();
        let mut vertex = vec![usize::MAX; darts];
        let mut cycles = 0;
        for start in 0..darts {
            if vertex[start] != usize::MAX {
                continue;
            }
            let mut d = start;
            while vertex[d] == usize::MAX {
                vertex[d] = cycles;
                d = sigma[d];
            }
            cycles += 1;
        }
        let g = (n + 1 - cycles) / 2;
        let edges: Vec<(u32, u32)> = (0..darts)
            .filter(|&d| d < alpha[d])
            .map(|d| {
                let (a, b) = (vertex[d] as u32, vertex[alpha[d]] as u32);
                (a.min(b), a.max(b))
            })
            .collect();
        let census = &mut out[g];
        census.count += 1;
        *census.graphs.entry(cache.get(cycles, edges, vertex[0])).or_insert(0) += 1;
    });
    Ok(out)
}

pub fn count_unicellular_maps(n: usize, g: usize) -> Result<MapCensus> {
    let mut all = unicellular_census(n)?;
    if g >= all.len() {
        return Err(Error::Infeasible(format!("genus {g} with {n} edges")));
    }
    Ok(all.swap_remove(g))
}

/// Tree count times the number of sign-decorated permutations of `n + 1`
/// points whose cycles are all odd, `(n + 1 - cycles) / 2 = g`; the
/// permutations are listed one by one.
pub fn count_c_decorated(n: usize, g: usize) -> Result<BigUint> {
    above_cap("decorated tree edges", n, MAX_MAP_EDGES)?;
    if 2 * g > n {
        return Err(Error::Infeasible(format!("genus {g} with {n} edges")));
    }
    let order = n + 1;
    let mut perm: Vec<usize> = (0..order).collect();
    let mut signed = BigUint::zero();
    loop {
        let mut seen = vec![false; order];
        let mut cycles = 0;
        let mut all_odd = true;
        for start in 0..order {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = perm[x];
                len += 1;
            }
            cycles += 1;
            all_odd &= len % 2 == 1;
        }
        if all_odd && order - cycles == 2 * g {
            signed += BigUint::one() << cycles;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(catalan(n) * signed)
}

/// Number of ordered forests of `sigma` plane trees with `e` edges in total,
/// `sigma / (2e + sigma) * C(2e + sigma, e)`. The empty forest convention
/// `sigma = 0` gives `[e = 0]`.
pub fn count_forests(sigma: usize, e: usize) -> BigUint {
    if sigma == 0 {
        return if e == 0 { BigUint::one() } else { BigUint::zero() };
    }
    let m = 2 * e + sigma;
    binomial(m, e) * BigUint::from(sigma) / BigUint::from(m)
}

/// Counts forests by listing them as words: a forest with `sigma` trees and
/// `e` edges is a sequence of `sigma` balanced blocks using `e + sigma`
/// bracket pairs (each vertex is one pair). Keys `(sigma, e)` with
/// `2e + sigma <= max_weight`.
pub fn tally_forests(max_weight: usize) -> BTreeMap<(usize, usize), BigUint> {
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    // pairs = e + sigma and 2e + sigma <= max_weight force pairs <= max_weight
    fn rec(pairs: usize, open: usize, depth: usize, blocks: usize, counts: &mut BTreeMap<(usize, usize), u64>, max_weight: usize) {
        if open == pairs && depth == 0 {
            let e = pairs - blocks;
            if 2 * e + blocks <= max_weight {
                *counts.entry((blocks, e)).or_insert(0) += 1;
            }
            return;
        }
        if open < pairs {
            rec(pairs, open + 1, depth + 1, blocks + usize::from(depth == 0), counts, max_weight);
        }
        if depth > 0 {
            rec(pairs, open, depth - 1, blocks, counts, max_weight);
        }
    }
    for pairs in 1..=max_weight {
        rec(pairs, 0, 0, 0, &mut counts, max_weight);
    }
    counts.into_iter().map(|(k, v)| (k, BigUint::from(v))).collect()
}

fn ratio(num: BigUint, den: &BigUint) -> BigRational {
    BigRational::new(num.into(), den.clone().into())
}

/// `P(d0 = j)` for the root degree of the first tree of a uniform forest
/// with `sigma` trees and `e` edges, for `j = 0..=e`:
/// `Phi(sigma + j - 1, e - j) / Phi(sigma, e)`.
pub fn root_degree_pmf(sigma: usize, e: usize) -> Result<Vec<BigRational>> {
    if sigma == 0 {
        return Err(Error::Infeasible("a forest with no trees has no first root".into()));
    }
    let total = count_forests(sigma, e);
    Ok((0..=e).map(|j| ratio(count_forests(sigma + j - 1, e - j), &total)).collect())
}

/// `P(d0 + d1 = j) = (j + 1) Phi(sigma + j - 2, e - j) / Phi(sigma, e)` for
/// the first two roots, `j = 0..=e`.
pub fn root_pair_degree_pmf(sigma: usize, e: usize) -> Result<Vec<BigRational>> {
    if sigma < 2 {
        return Err(Error::Infeasible("need at least two trees".into()));
    }
    let total = count_forests(sigma, e);
    Ok((0..=e)
        .map(|j| ratio(count_forests(sigma + j - 2, e - j) * BigUint::from(j + 1), &total))
        .collect())
}

/// Checks `P(d0 = j) < 4j / 2^j` and `P(d0 + d1 = j) < 4j(j + 1) / 2^j`
/// for every `1 <= j <= e`; returns the first violation as `(j, which)`.
/// `j = 0` is excluded: both bounds vanish there while the
/// probabilities need not.
pub fn root_degree_bound_violation(sigma: usize, e: usize) -> Result<Option<(usize, &'static str)>> {
    let single = root_degree_pmf(sigma, e)?;
    let pair = if sigma >= 2 { Some(root_pair_degree_pmf(sigma, e)?) } else { None };
    for j in 1..=e {
        let pow = BigUint::one() << j;
        let single_bound = ratio(BigUint::from(4 * j), &pow);
        if single[j] >= single_bound {
            return Ok(Some((j, "single")));
        }
        if let Some(pair) = &pair {
            if pair[j] >= ratio(BigUint::from(4 * j * (j + 1)), &pow) {
                return Ok(Some((j, "pair")));
            }
        }
    }
    Ok(None)
}

fn for_each_marking(parts: &[u32], vertices: usize, visit: &mut dyn FnMut(&[u32])) {
    fn rec(left: &mut [u32], marks: &mut Vec<u32>, vertices: usize, visit: &mut dyn FnMut(&[u32])) {
        if marks.len() == vertices {
            visit(marks);
            return;
        }
        for m in 0..left.len() {
            if left[m] > 0 {
                left[m] -= 1;
                marks.push(m as u32);
                rec(left, marks, vertices, visit);
                marks.pop();
                left[m] += 1;
            }
        }
    }
    rec(&mut parts.to_vec(), &mut Vec::with_capacity(vertices), vertices, visit);
}

fn multinomial(parts: &[u32]) -> BigUint {
    let mut left = parts.iter().map(|&p| p as usize).sum::<usize>();
    let mut acc = BigUint::one();
    for &p in parts {
        acc *= binomial(left, p as usize);
        left -= p as usize;
    }
    acc
}

/// Exact law of the rooted quotient graph when the composition follows the
/// `prod 1 / lambda_i` law, the tree is uniform and the marking uniform.
pub fn marked_tree_distribution(n: usize, g: usize) -> Result<BTreeMap<CanonicalGraph, BigRational>> {
    above_cap("distribution edges", n, MAX_DISTRIBUTION_EDGES)?;
    if 2 * g > n {
        return Err(Error::Infeasible(format!("genus {g} with {n} edges")));
    }
    let parts = n + 1 - 2 * g;
    let trees = enumerate_plane_trees(n)?;
    let tree_share = BigRational::new(1.into(), BigUint::from(trees.len()).into());
    let mut cache = CanonicalCache::default();
    let mut out: BTreeMap<CanonicalGraph, BigRational> = BTreeMap::new();
    for (lambda, p) in enumerate_odd_compositions(n, parts)? {
        let share = p * &tree_share / BigRational::from_integer(multinomial(lambda.parts()).into());
        for t in &trees {
            let mut tally: BTreeMap<CanonicalGraph, u64> = BTreeMap::new();
            for_each_marking(lambda.parts(), t.vertex_count(), &mut |marks| {
                let mt = MarkedTree::new(t.clone(), marks.to_vec(), lambda.clone()).unwrap();
                let gq = glue(&mt);
                *tally.entry(cache.get(gq.vertex_count(), gq.edges().to_vec(), gq.root())).or_insert(0) += 1;
            });
            for (c, k) in tally {
                *out.entry(c).or_insert_with(BigRational::zero) += &share * BigRational::from_integer(k.into());
            }
        }
    }
    Ok(out)
}

/// Law of the rooted underlying graph of a uniform rooted one-face map.
pub fn unicellular_graph_distribution(n: usize, g: usize) -> Result<BTreeMap<CanonicalGraph, BigRational>> {
    above_cap("distribution edges", n, MAX_DISTRIBUTION_EDGES)?;
    let census = count_unicellular_maps(n, g)?;
    let total = BigRational::from_integer(census.count.into());
    Ok(census
        .graphs
        .into_iter()
        .map(|(c, k)| (c, BigRational::from_integer(k.into()) / &total))
        .collect())
}

/// Total-variation distance between an empirical histogram and an exact law
/// (floating point; for reporting only).
pub fn total_variation<K: Ord>(counts: &BTreeMap<K, u64>, exact: &BTreeMap<K, BigRational>) -> f64 {
    let total: u64 = counts.values().sum();
    let mut tv = 0.0;
    for (k, p) in exact {
        let q = counts.get(k).copied().unwrap_or(0) as f64 / total as f64;
        tv += (p.to_f64().unwrap_or(0.0) - q).abs();
    }
    for (k, &c) in counts {
        if !exact.contains_key(k) {
            tv += c as f64 / total as f64;
        }
    }
    tv / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn plane_tree_counts_and_order() {
        for (n, count) in [(0, 1), (1, 1), (3, 5), (5, 42), (8, 1430)] {
            assert_eq!(enumerate_plane_trees(n).unwrap().len(), count);
        }
        let words: Vec<String> = enumerate_plane_trees(3).unwrap().iter().map(|t| t.to_contour()).collect();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
        assert_eq!(words[0], "(((())))");
        assert!(enumerate_plane_trees(13).is_err());
    }

    #[test]
    fn composition_laws() {
        let c = enumerate_odd_compositions(3, 2).unwrap();
        let parts: Vec<_> = c.iter().map(|(l, p)| (l.parts().to_vec(), p.clone())).collect();
        assert_eq!(parts, vec![(vec![1, 3], q(1, 2)), (vec![3, 1], q(1, 2))]);
        let c = enumerate_odd_compositions(2, 1).unwrap();
        assert_eq!(c[0].1, q(1, 1));
        let c = enumerate_odd_compositions(4, 3).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|(_, p)| *p == q(1, 3)));
        assert!(enumerate_odd_compositions(3, 3).is_err());
    }

    #[test]
    fn map_counts() {
        assert_eq!(count_unicellular_maps(2, 1).unwrap().count, 1);
        assert_eq!(count_unicellular_maps(3, 1).unwrap().count, 10);
        assert_eq!(count_unicellular_maps(2, 0).unwrap().count, 2);
        // all gluings of 2n darts: (2n - 1)!!
        let total: u64 = unicellular_census(5).unwrap().iter().map(|c| c.count).sum();
        assert_eq!(total, 945);
        for n in 0..=6 {
            assert_eq!(BigUint::from(count_unicellular_maps(n, 0).unwrap().count), catalan(n));
        }
        assert!(count_unicellular_maps(7, 0).is_err());
    }

    #[test]
    fn decorated_counts() {
        assert_eq!(count_c_decorated(2, 1).unwrap(), BigUint::from(8u32));
        assert_eq!(count_c_decorated(3, 1).unwrap(), BigUint::from(160u32));
    }

    #[test]
    fn canonical_form_is_invariant() {
        // relabel a small graph every way that fixes the root
        let edges = [(0u32, 1u32), (1, 2), (1, 2), (2, 3), (3, 3), (0, 3)];
        let base = canonical_form(4, &edges, 0).unwrap();
        let mut rest = vec![1usize, 2, 3];
        loop {
            let map = |x: u32| if x == 0 { 0 } else { rest[x as usize - 1] as u32 };
            let relabelled: Vec<_> = edges.iter().map(|&(a, b)| (map(a), map(b))).collect();
            assert_eq!(canonical_form(4, &relabelled, 0).unwrap(), base);
            if !next_permutation(&mut rest) {
                break;
            }
        }
        // moving the root changes the class
        assert_ne!(canonical_form(4, &edges, 1).unwrap(), base);
        assert_eq!(base.edge_count(), 6);
    }

    #[test]
    fn forest_examples() {
        for n in 0..10 {
            assert_eq!(count_forests(1, n), catalan(n));
            assert_eq!(count_forests(n + 1, 0), BigUint::one());
        }
        assert_eq!(count_forests(2, 1), BigUint::from(2u32));
        let tally = tally_forests(8);
        for (&(sigma, e), count) in &tally {
            assert_eq!(&count_forests(sigma, e), count, "sigma={sigma} e={e}");
        }
    }

    #[test]
    fn root_degree_examples() {
        assert_eq!(root_degree_pmf(1, 1).unwrap(), vec![q(0, 1), q(1, 1)]);
        assert_eq!(root_degree_pmf(2, 1).unwrap(), vec![q(1, 2), q(1, 2)]);
        for sigma in 1..6 {
            for e in 0..6 {
                let total: BigRational = root_degree_pmf(sigma, e).unwrap().into_iter().sum();
                assert_eq!(total, q(1, 1));
                if sigma >= 2 {
                    let total: BigRational = root_pair_degree_pmf(sigma, e).unwrap().into_iter().sum();
                    assert_eq!(total, q(1, 1));
                }
            }
        }
    }

    // first-root degree tallied over explicitly listed forests
    #[test]
    fn root_degree_matches_listing() {
        for sigma in 1..=3 {
            for e in 0..=5 {
                let mut hist = vec![0u64; e + 1];
                let mut pair_hist = vec![0u64; e + 1];
                let pairs = e + sigma;
                let mut word = Vec::new();
                fn rec(word: &mut Vec<bool>, pairs: usize, open: usize, depth: usize, out: &mut Vec<Vec<bool>>) {
                    if open == pairs && depth == 0 {
                        out.push(word.clone());
                        return;
                    }
                    if open < pairs {
                        word.push(true);
                        rec(word, pairs, open + 1, depth + 1, out);
                        word.pop();
                    }
                    if depth > 0 {
                        word.push(false);
                        rec(word, pairs, open, depth - 1, out);
                        word.pop();
                    }
                }
                let mut words = Vec::new();
                rec(&mut word, pairs, 0, 0, &mut words);
                let mut listed = 0u64;
                for w in words {
                    // split into top-level blocks; root degree = children of the block root
                    let mut degrees = Vec::new();
                    let mut depth = 0;
                    for &up in &w {
                        if up {
                            depth += 1;
                            if depth == 1 {
                                degrees.push(0);
                            } else if depth == 2 {
                                *degrees.last_mut().unwrap() += 1;
                            }
                        } else {
                            depth -= 1;
                        }
                    }
                    if degrees.len() != sigma {
                        continue;
                    }
                    listed += 1;
                    hist[degrees[0]] += 1;
                    if sigma >= 2 {
                        pair_hist[degrees[0] + degrees[1]] += 1;
                    }
                }
                assert_eq!(BigUint::from(listed), count_forests(sigma, e));
                let pmf = root_degree_pmf(sigma, e).unwrap();
                for j in 0..=e {
                    assert_eq!(pmf[j], q(hist[j] as i64, listed as i64));
                }
                if sigma >= 2 {
                    let pmf = root_pair_degree_pmf(sigma, e).unwrap();
                    for j in 0..=e {
                        assert_eq!(pmf[j], q(pair_hist[j] as i64, listed as i64));
                    }
                }
            }
        }
    }

    #[test]
    fn small_distributions() {
        let d = marked_tree_distribution(2, 1).unwrap();
        assert_eq!(d.len(), 1);
        let (c, p) = d.iter().next().unwrap();
        assert_eq!((c.vertex_count(), c.edge_count()), (1, 2));
        assert_eq!(*p, q(1, 1));
        let d = marked_tree_distribution(3, 0).unwrap();
        assert_eq!(d.values().cloned().sum::<BigRational>(), q(1, 1));
        assert_eq!(d, unicellular_graph_distribution(3, 0).unwrap());
    }
}
