//! Random generation of compositions, plane trees, markings and
//! C-permutations, and the composite sampler for the underlying graph of a
//! uniform unicellular map.
//!
//! Every sampler takes an explicit generator; nothing here reads ambient
//! randomness.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::composition::{check_feasible, OddComposition};
use crate::cperm::{CPermutation, Sign};
use crate::error::{Error, Result};
use crate::graph::QuotientGraph;
use crate::marked::MarkedTree;
use crate::quotient::glue;
use crate::tree::RootedPlaneTree;

/// Default cap on the target mean `(n + 1) / N`.
pub const DEFAULT_MEAN_CAP: f64 = 1e6;
/// Default number of rejection attempts before giving up.
pub const DEFAULT_ATTEMPT_CAP: u64 = 1_000_000;
/// Series for moments are truncated once the geometric tail bound drops below this.
pub const SERIES_TAIL: f64 = 1e-15;

/// Odd-supported law `P(xi = 2i+1) = beta^(2i+1) / (B(beta) (2i+1))` with
/// `B(beta) = atanh(beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffspringLaw {
    beta: f64,
    normalizer: f64,
}

impl OffspringLaw {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta = {beta} outside (0, 1)")));
        }
        Ok(Self { beta, normalizer: 0.5 * ((1.0 + beta) / (1.0 - beta)).ln() })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k % 2 == 0 {
            return 0.0;
        }
        (k as f64 * self.beta.ln()).exp() / (self.normalizer * k as f64)
    }

    /// `beta / ((1 - beta^2) B(beta))`.
    pub fn mean(&self) -> f64 {
        mean_of_beta(self.beta)
    }

    /// Sums `k^power * pmf(k)` over odd `k` until the tail bound is below
    /// [`SERIES_TAIL`].
    pub fn moment_series(&self, power: i32) -> f64 {
        let b2 = self.beta * self.beta;
        let mut pow = self.beta;
        let mut total = 0.0;
        let mut k = 1.0f64;
        loop {
            let term = k.powi(power) * pow / (self.normalizer * k);
            total += term;
            // successive term ratio is b2 * ((k + 2) / k)^(power - 1), decreasing in k
            let ratio = b2 * ((k + 2.0) / k).powi(power - 1);
            if ratio < 1.0 && term * ratio / (1.0 - ratio) < SERIES_TAIL {
                return total;
            }
            pow *= b2;
            k += 2.0;
        }
    }

    /// Variance from the truncated series.
    pub fn variance(&self) -> f64 {
        let m = self.moment_series(1);
        self.moment_series(2) - m * m
    }
}

pub fn mean_of_beta(beta: f64) -> f64 {
    let b = 0.5 * ((1.0 + beta) / (1.0 - beta)).ln();
    beta / ((1.0 - beta * beta) * b)
}

/// Solution of the mean calibration `E xi = (n + 1) / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffspringParameter {
    /// Zero when degenerate.
    pub beta: f64,
    pub target_mean: f64,
    /// Mean 1: every part is forced to 1 and no law is needed.
    pub degenerate: bool,
}

impl OffspringParameter {
    pub fn law(&self) -> Result<OffspringLaw> {
        if self.degenerate {
            return Err(Error::Degenerate("all parts are forced to 1"));
        }
        OffspringLaw::new(self.beta)
    }
}

pub fn solve_offspring_parameter(n: usize, parts: usize) -> Result<OffspringParameter> {
    solve_offspring_parameter_with_cap(n, parts, DEFAULT_MEAN_CAP)
}

/// Bisection on `(0, 1)` to absolute tolerance `1e-12` for the unique
/// `beta` with `mean(beta) = (n + 1) / parts`.
pub fn solve_offspring_parameter_with_cap(n: usize, parts: usize, mean_cap: f64) -> Result<OffspringParameter> {
    check_feasible(n, parts)?;
    let target = (n + 1) as f64 / parts as f64;
    if parts == n + 1 {
        return Ok(OffspringParameter { beta: 0.0, target_mean: 1.0, degenerate: true });
    }
    if target > mean_cap {
        return Err(Error::MeanTooLarge { mean: target, cap: mean_cap });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_of_beta(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(OffspringParameter { beta: 0.5 * (lo + hi), target_mean: target, degenerate: false })
}

/// Exact sampler for `P(lambda = z) ∝ prod 1/z_i` over odd compositions
/// of `n + 1` into `parts` parts, by rejection on i.i.d. draws.
#[derive(Debug, Clone)]
pub struct OddCompositionSampler {
    n: usize,
    parts: usize,
    param: OffspringParameter,
    // split[i] = P(xi = 2i + 1 | xi >= 2i + 1) over odd values up to n + 1;
    // whatever mass lies above n + 1 always overshoots
    split: Vec<f64>,
    attempt_cap: u64,
}

impl OddCompositionSampler {
    pub fn new(n: usize, parts: usize) -> Result<Self> {
        let param = solve_offspring_parameter(n, parts)?;
        let mut split = Vec::new();
        if !param.degenerate {
            let law = param.law()?;
            let pmf: Vec<f64> = (0..=n as u64 / 2).map(|i| law.pmf(2 * i + 1)).collect();
            let inside: f64 = pmf.iter().sum();
            // tails summed from the small end for accuracy
            let mut tail = (1.0 - inside).max(0.0);
            split = vec![0.0; pmf.len()];
            for i in (0..pmf.len()).rev() {
                tail += pmf[i];
                split[i] = if tail > 0.0 { (pmf[i] / tail).min(1.0) } else { 1.0 };
            }
        }
        Ok(Self { n, parts, param, split, attempt_cap: DEFAULT_ATTEMPT_CAP })
    }

    pub fn with_attempt_cap(mut self, cap: u64) -> Self {
        self.attempt_cap = cap;
        self
    }

    pub fn parameter(&self) -> &OffspringParameter {
        &self.param
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    /// How many of `xi_1..xi_N` take each odd value `2i + 1`, or `None`
    /// when their sum misses `n + 1`. The counts of N i.i.d. draws are
    /// multinomial, drawn here as a chain of binomials, so an attempt costs
    /// one binomial per value rather than one draw per part.
    pub fn attempt_counts<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<u64>> {
        if self.param.degenerate {
            return Some(vec![self.parts as u64]);
        }
        let target = self.n as u64 + 1;
        let mut left = self.parts as u64;
        let mut sum = 0u64;
        let mut counts = Vec::new();
        for (i, &q) in self.split.iter().enumerate() {
            if left == 0 {
                break;
            }
            let c = if q >= 1.0 {
                left
            } else if q <= 0.0 {
                0
            } else {
                Binomial::new(left, q).expect("probability in (0, 1)").sample(rng)
            };
            let value = 2 * i as u64 + 1;
            sum += value * c;
            left -= c;
            counts.push(c);
            // every remaining draw is at least value + 2
            if sum + left * (value + 2) > target && left > 0 || sum > target {
                return None;
            }
        }
        (left == 0 && sum == target).then_some(counts)
    }

    /// One rejection attempt: `xi_1..xi_N` in uniformly random order if they
    /// sum to `n + 1`. Given the value counts every order is equally likely,
    /// so this has the law of the i.i.d. sequence conditioned on its sum.
    pub fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<u32>> {
        let counts = self.attempt_counts(rng)?;
        let mut out = Vec::with_capacity(self.parts);
        for (i, &c) in counts.iter().enumerate() {
            out.extend(std::iter::repeat_n(2 * i as u32 + 1, c as usize));
        }
        out.shuffle(rng);
        Some(out)
    }

    /// Returns the composition and the number of attempts used.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(OddComposition, u64)> {
        for attempts in 1..=self.attempt_cap {
            if let Some(parts) = self.attempt(rng) {
                return Ok((OddComposition::new(parts)?, attempts));
            }
        }
        Err(Error::AttemptCapExceeded { attempts: self.attempt_cap })
    }
}

pub fn sample_odd_composition<R: Rng + ?Sized>(n: usize, parts: usize, rng: &mut R) -> Result<(OddComposition, u64)> {
    OddCompositionSampler::new(n, parts)?.sample(rng)
}

/// Local-limit prediction `2 / (sqrt(2 pi N) sigma)` of the acceptance rate.
pub fn acceptance_rate_prediction(n: usize, parts: usize) -> Result<f64> {
    let param = solve_offspring_parameter(n, parts)?;
    let sigma = param.law()?.variance().sqrt();
    if !(sigma > 0.0) {
        return Err(Error::Degenerate("zero variance"));
    }
    Ok(2.0 / ((2.0 * std::f64::consts::PI * parts as f64).sqrt() * sigma))
}

/// Exact `P(xi_1 + ... + xi_N = n + 1)` by convolution of the pmf.
pub fn exact_acceptance_probability(n: usize, parts: usize) -> Result<f64> {
    let param = solve_offspring_parameter(n, parts)?;
    if param.degenerate {
        return Ok(1.0);
    }
    let law = param.law()?;
    let target = n + 1;
    let pmf: Vec<f64> = (0..=target as u64).map(|k| law.pmf(k)).collect();
    let mut dist = vec![0.0; target + 1];
    dist[0] = 1.0;
    for _ in 0..parts {
        let mut next = vec![0.0; target + 1];
        for (s, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for k in (1..=target - s).step_by(2) {
                next[s + k] += p * pmf[k];
            }
        }
        dist = next;
    }
    Ok(dist[target])
}

/// Uniform plane tree with `n` edges: a uniform arrangement of `n` up-steps
/// and `n + 1` down-steps, rotated by the cycle lemma into the unique
/// rotation whose proper prefixes stay non-negative.
pub fn sample_plane_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RootedPlaneTree {
    let mut word: Vec<bool> = (0..2 * n + 1).map(|i| i < n).collect();
    word.shuffle(rng);
    // rotation starts right after the first position of the minimum prefix sum
    let (mut height, mut min_height, mut cut) = (0i64, 0i64, 0usize);
    for (i, &up) in word.iter().enumerate() {
        height += if up { 1 } else { -1 };
        if height < min_height {
            min_height = height;
            cut = i + 1;
        }
    }
    let len = word.len();
    word.rotate_left(cut % len);
    // the rotated word ends with its only visit to -1; drop that step
    word.pop();
    RootedPlaneTree::from_dyck_steps(&word).expect("cycle lemma yields a Dyck word")
}

/// Uniform marking of `tree` with class sizes `lambda`.
pub fn sample_marking<R: Rng + ?Sized>(
    tree: RootedPlaneTree,
    lambda: &OddComposition,
    rng: &mut R,
) -> Result<MarkedTree> {
    if lambda.n() != tree.n() {
        return Err(Error::MarkingMismatch(format!(
            "composition of {} for a tree with {} vertices",
            lambda.n() + 1,
            tree.vertex_count()
        )));
    }
    let mut marks: Vec<u32> = Vec::with_capacity(tree.vertex_count());
    for (i, &p) in lambda.parts().iter().enumerate() {
        marks.extend(std::iter::repeat_n(i as u32, p as usize));
    }
    marks.shuffle(rng);
    MarkedTree::new(tree, marks, lambda.clone())
}

/// C-permutation with cycle type `lambda`: uniform blocks, uniform cyclic
/// order inside each block and independent uniform signs.
pub fn sample_c_permutation<R: Rng + ?Sized>(lambda: &OddComposition, rng: &mut R) -> CPermutation {
    let order = lambda.n() + 1;
    let mut elems: Vec<u32> = (0..order as u32).collect();
    elems.shuffle(rng);
    let mut cycles = Vec::with_capacity(lambda.len());
    let mut rest = elems.as_slice();
    for &p in lambda.parts() {
        let (block, tail) = rest.split_at(p as usize);
        // a uniform linear order of the block induces a uniform cyclic order
        cycles.push(block.to_vec());
        rest = tail;
    }
    let signs = (0..cycles.len()).map(|_| if rng.random::<bool>() { Sign::Plus } else { Sign::Minus }).collect();
    CPermutation::new(cycles, signs).expect("blocks partition the vertex set")
}

/// Number of parts for genus `g` on `n` edges.
pub fn parts_for_genus(n: usize, g: usize) -> Result<usize> {
    if 2 * g > n {
        return Err(Error::Infeasible(format!("genus {g} above n/2 for n = {n}")));
    }
    Ok(n + 1 - 2 * g)
}

/// A marked tree distributed so that its glued graph has the law of the
/// underlying graph of a uniform unicellular map of genus `g` with `n`
/// edges, plus the rejection attempts spent on the composition.
pub fn sample_marked_tree<R: Rng + ?Sized>(n: usize, g: usize, rng: &mut R) -> Result<(MarkedTree, u64)> {
    let parts = parts_for_genus(n, g)?;
    let (lambda, attempts) = sample_odd_composition(n, parts, rng)?;
    let tree = sample_plane_tree(n, rng);
    Ok((sample_marking(tree, &lambda, rng)?, attempts))
}

pub fn sample_unicellular_graph<R: Rng + ?Sized>(n: usize, g: usize, rng: &mut R) -> Result<QuotientGraph> {
    let (mt, _) = sample_marked_tree(n, g, rng)?;
    Ok(glue(&mt))
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn mean_at_half() {
        let law = OffspringLaw::new(0.5).unwrap();
        // closed form against the independently summed series
        assert!((law.mean() - law.moment_series(1)).abs() < 1e-12);
        assert!((law.mean() - 1.213_65).abs() < 1e-5);
        let total: f64 = (0..200).map(|k| law.pmf(k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_is_increasing() {
        let grid: Vec<f64> = (1..1000).map(|i| mean_of_beta(i as f64 / 1000.0)).collect();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn variance_series_matches_closed_form() {
        for beta in [0.1, 0.5, 0.8, 0.95] {
            let law = OffspringLaw::new(beta).unwrap();
            let b = law.normalizer();
            let second = beta * (1.0 + beta * beta) / ((1.0 - beta * beta).powi(2) * b);
            let var = second - law.mean().powi(2);
            assert!((law.variance() - var).abs() < 1e-10 * var.max(1.0), "beta {beta}");
        }
    }

    #[test]
    fn solver_hits_target() {
        for (n, parts) in [(3, 2), (4, 3), (8, 3), (5000, 2501), (100, 1)] {
            let p = solve_offspring_parameter(n, parts).unwrap();
            assert!(!p.degenerate);
            assert!((mean_of_beta(p.beta) - p.target_mean).abs() < 1e-6 * p.target_mean);
        }
        let p = solve_offspring_parameter(4, 5).unwrap();
        assert!(p.degenerate);
        assert!(p.law().is_err());
        assert!(solve_offspring_parameter(4, 4).is_err());
        assert!(matches!(
            solve_offspring_parameter_with_cap(100, 1, 10.0),
            Err(Error::MeanTooLarge { .. })
        ));
    }

    #[test]
    fn degenerate_composition_is_all_ones() {
        let (c, attempts) = sample_odd_composition(6, 7, &mut rng(1)).unwrap();
        assert_eq!(c.parts(), &[1; 7]);
        assert_eq!(attempts, 1);
        assert!(acceptance_rate_prediction(6, 7).is_err());
    }

    #[test]
    fn single_part() {
        let (c, _) = sample_odd_composition(2, 1, &mut rng(2)).unwrap();
        assert_eq!(c.parts(), &[3]);
    }

    #[test]
    fn attempt_cap_reports_count() {
        let s = OddCompositionSampler::new(400, 1).unwrap().with_attempt_cap(3);
        let mut r = rng(3);
        // P(xi = 401) is tiny, so three attempts essentially never suffice
        match s.sample(&mut r) {
            Err(Error::AttemptCapExceeded { attempts }) => assert_eq!(attempts, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exact_acceptance_single_part_is_the_pmf() {
        for n in [2, 10, 30] {
            let p = solve_offspring_parameter(n, 1).unwrap();
            let direct = p.law().unwrap().pmf(n as u64 + 1);
            let conv = exact_acceptance_probability(n, 1).unwrap();
            assert!((direct - conv).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn composition_pmf_n3_n2() {
        let mut r = rng(4);
        let s = OddCompositionSampler::new(3, 2).unwrap();
        let mut ones_first = 0;
        let trials = 20_000;
        for _ in 0..trials {
            let (c, _) = s.sample(&mut r).unwrap();
            assert!(c.parts() == [1, 3] || c.parts() == [3, 1]);
            ones_first += usize::from(c.parts()[0] == 1);
        }
        let f = ones_first as f64 / trials as f64;
        assert!((f - 0.5).abs() < 0.02, "{f}");
    }

    #[test]
    fn attempt_success_rate_is_exact() {
        let mut r = rng(14);
        for (n, parts) in [(20, 7), (40, 21), (11, 2)] {
            let s = OddCompositionSampler::new(n, parts).unwrap();
            let p = exact_acceptance_probability(n, parts).unwrap();
            let trials = 200_000;
            let hits = (0..trials).filter(|_| s.attempt_counts(&mut r).is_some()).count();
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((hits as f64 / trials as f64 - p).abs() < 4.0 * se, "({n}, {parts}): {hits} vs {p}");
        }
    }

    #[test]
    fn composition_law_matches_enumeration() {
        use num_traits::ToPrimitive;
        let mut r = rng(15);
        for (n, parts) in [(8, 3), (10, 5)] {
            let exact = crate::oracle::enumerate_odd_compositions(n, parts).unwrap();
            let s = OddCompositionSampler::new(n, parts).unwrap();
            let trials = 200_000;
            let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
            for _ in 0..trials {
                *counts.entry(s.sample(&mut r).unwrap().0.parts().to_vec()).or_default() += 1;
            }
            let tv: f64 = exact
                .iter()
                .map(|(c, p)| (counts.get(c.parts()).copied().unwrap_or(0) as f64 / trials as f64 - p.to_f64().unwrap()).abs())
                .sum::<f64>()
                / 2.0;
            assert_eq!(counts.len(), exact.len());
            assert!(tv < 0.01, "({n}, {parts}): tv {tv}");
        }
    }

    #[test]
    fn plane_tree_small_cases() {
        let mut r = rng(5);
        assert_eq!(sample_plane_tree(1, &mut r).to_contour(), "(())");
        assert_eq!(sample_plane_tree(0, &mut r).to_contour(), "()");
        let mut counts: HashMap<String, usize> = HashMap::new();
        for _ in 0..50_000 {
            *counts.entry(sample_plane_tree(3, &mut r).to_contour()).or_default() += 1;
        }
        assert_eq!(counts.len(), 5);
        for (_, c) in counts {
            assert!((c as f64 / 10_000.0 - 1.0).abs() < 0.06);
        }
    }

    #[test]
    fn marking_examples() {
        let mut r = rng(6);
        let t = RootedPlaneTree::path(2);
        let mt = sample_marking(t.clone(), &OddComposition::new(vec![3]).unwrap(), &mut r).unwrap();
        assert_eq!(mt.marks(), &[0, 0, 0]);
        assert!(sample_marking(t, &OddComposition::new(vec![1, 3]).unwrap(), &mut r).is_err());

        let lambda = OddComposition::new(vec![1, 3]).unwrap();
        let mut hits = [0usize; 4];
        for _ in 0..40_000 {
            let mt = sample_marking(RootedPlaneTree::path(3), &lambda, &mut r).unwrap();
            hits[mt.marks().iter().position(|&m| m == 0).unwrap()] += 1;
        }
        for h in hits {
            assert!((h as f64 / 10_000.0 - 1.0).abs() < 0.06);
        }
    }

    #[test]
    fn c_permutation_outcomes() {
        let mut r = rng(7);
        let lambda = OddComposition::new(vec![1, 3]).unwrap();
        let mut seen: HashMap<(Vec<u32>, Vec<Sign>), usize> = HashMap::new();
        let draws = 64_000;
        for _ in 0..draws {
            let p = sample_c_permutation(&lambda, &mut r);
            assert_eq!(p.genus(), 1);
            // key on the permutation itself plus signs ordered by cycle type
            let mut signed: Vec<(usize, Sign)> =
                p.cycles().iter().zip(p.signs()).map(|(c, &s)| (c.len(), s)).collect();
            signed.sort_by_key(|&(len, _)| len);
            *seen.entry((p.images(), signed.into_iter().map(|(_, s)| s).collect())).or_default() += 1;
        }
        assert_eq!(seen.len(), 32);
        for (_, c) in seen {
            assert!((c as f64 / (draws as f64 / 32.0) - 1.0).abs() < 0.1);
        }
        let single = OddComposition::new(vec![3]).unwrap();
        let mut outcomes = std::collections::HashSet::new();
        for _ in 0..2000 {
            let p = sample_c_permutation(&single, &mut r);
            outcomes.insert((p.images(), p.signs().to_vec()));
        }
        assert_eq!(outcomes.len(), 4);
    }

    #[test]
    fn unicellular_graph_small_cases() {
        let mut r = rng(8);
        let g = sample_unicellular_graph(2, 1, &mut r).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edges(), &[(0, 0), (0, 0)]);
        for _ in 0..200 {
            let t = sample_unicellular_graph(12, 0, &mut r).unwrap();
            assert_eq!(t.vertex_count(), 13);
            assert_eq!(t.genus(), 0);
        }
        for g in 0..=10 {
            let q = sample_unicellular_graph(20, g, &mut r).unwrap();
            assert_eq!(q.vertex_count() as i64 - q.edge_count() as i64, 1 - 2 * g as i64);
        }
        assert!(sample_unicellular_graph(4, 3, &mut r).is_err());
    }
}
