use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Geometric, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{linear_fit, stream_rng, LinearFit};

pub const DEFAULT_POPULATION_CAP: u64 = 100_000_000;

/// Default `k0` of the two-point law `{1: 1 - k0/2, 2: k0/2}`.
pub const DEFAULT_K0: f64 = 0.1;

// batches of this many trials share one random stream
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
enum Law {
    Table(Vec<f64>),
    /// Number of failures before the first success, success probability 1/2.
    GeometricHalf,
}

/// Offspring distribution on the non-negative integers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffspringSpec {
    law: Law,
    mean: f64,
    variance: f64,
}

impl OffspringSpec {
    /// `pmf[k]` = P(k children). Must sum to one.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter(format!("bad offspring pmf {pmf:?}")));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("offspring pmf sums to {total}")));
        }
        let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let second: f64 = pmf.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
        Ok(Self { law: Law::Table(pmf), mean, variance: second - mean * mean })
    }

    /// Parses `"1:0.95,2:0.05"`, or `"geometric"` for geometric(1/2).
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("geometric") {
            return Ok(Self::geometric_half());
        }
        let mut pmf = Vec::new();
        for item in text.split(',') {
            let (k, p) = item
                .split_once(':')
                .ok_or_else(|| Error::InvalidParameter(format!("expected k:p, got {item:?}")))?;
            let k: usize = k.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad count {k:?}")))?;
            let p: f64 = p.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad probability {p:?}")))?;
            if k > 10_000 {
                return Err(Error::InvalidParameter(format!("offspring count {k} too large")));
            }
            if pmf.len() <= k {
                pmf.resize(k + 1, 0.0);
            }
            pmf[k] += p;
        }
        Self::from_pmf(pmf)
    }

    /// `{1: 1 - k0/2, 2: k0/2}`.
    pub fn two_point(k0: f64) -> Result<Self> {
        if !(k0 > 0.0 && k0 <= 2.0) {
            return Err(Error::InvalidParameter(format!("k0 = {k0} outside (0, 2]")));
        }
        Self::from_pmf(vec![0.0, 1.0 - k0 / 2.0, k0 / 2.0])
    }

    /// P(k) = 2^-(k+1), the critical law with mean 1 and variance 2.
    pub fn geometric_half() -> Self {
        Self { law: Law::GeometricHalf, mean: 1.0, variance: 2.0 }
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match &self.law {
            Law::Table(p) => p.get(k).copied().unwrap_or(0.0),
            Law::GeometricHalf => 0.5f64.powi(k as i32 + 1),
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Mean above one, `p0 + p1 < 1`; exponential moments hold for every
    /// law representable here.
    pub fn is_supercritical(&self) -> bool {
        self.mean > 1.0 && self.pmf(0) + self.pmf(1) < 1.0
    }

    /// Total offspring of `parents` independent individuals.
    pub fn sample_sum<R: Rng + ?Sized>(&self, parents: u64, rng: &mut R) -> u64 {
        if parents == 0 {
            return 0;
        }
        match &self.law {
            Law::Table(pmf) => {
                // multinomial split into offspring counts, one binomial per value
                let mut left = parents;
                let mut mass = 1.0;
                let mut total = 0u64;
                for (k, &p) in pmf.iter().enumerate() {
                    if left == 0 {
                        break;
                    }
                    let c = if p >= mass || k + 1 == pmf.len() {
                        left
                    } else if p <= 0.0 {
                        0
                    } else {
                        Binomial::new(left, (p / mass).min(1.0)).unwrap().sample(rng)
                    };
                    total += k as u64 * c;
                    left -= c;
                    mass -= p;
                }
                total
            }
            Law::GeometricHalf if parents < 32 => {
                let g = Geometric::new(0.5).unwrap();
                (0..parents).map(|_| g.sample(rng)).sum()
            }
            Law::GeometricHalf => {
                // negative binomial as a gamma-mixed Poisson
                let rate: f64 = Gamma::new(parents as f64, 1.0).unwrap().sample(rng);
                if rate <= 0.0 {
                    0
                } else {
                    Poisson::new(rate).unwrap().sample(rng) as u64
                }
            }
        }
    }
}

/// Generation sizes `Z_0 = 1, Z_1, ..., Z_r`.
pub fn simulate_gw<R: Rng + ?Sized>(spec: &OffspringSpec, generations: usize, rng: &mut R) -> Result<Vec<u64>> {
    simulate_gw_capped(spec, generations, DEFAULT_POPULATION_CAP, rng)
}

pub fn simulate_gw_capped<R: Rng + ?Sized>(
    spec: &OffspringSpec,
    generations: usize,
    cap: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    let mut z = Vec::with_capacity(generations + 1);
    z.push(1u64);
    for generation in 1..=generations {
        let next = spec.sample_sum(z[generation - 1], rng);
        if next > cap {
            return Err(Error::PopulationCap { cap, generation });
        }
        z.push(next);
    }
    Ok(z)
}

/// The upper bound `3/2 (1 + 1/(φ''(3/2) r/2 + 2))^-k` on `P(Z_r >= k)` for
/// geometric(1/2) offspring, whose generating function `1/(2-s)` gives
/// `φ''(3/2) = 16`.
pub fn critical_geometric_tail_bound(r: usize, k: u64) -> f64 {
    const SECOND_DERIVATIVE: f64 = 16.0;
    1.5 * (1.0 + 1.0 / (SECOND_DERIVATIVE * r as f64 / 2.0 + 2.0)).powf(-(k as f64))
}

/// `tails[r][k]` = empirical `P(Z_r >= k)` for `r <= generations`, `k <= max_k`.
pub fn tail_probabilities(
    spec: &OffspringSpec,
    generations: usize,
    max_k: u64,
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let width = max_k as usize + 1;
    let chunks = trials.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<u64>> {
            let mut rng = stream_rng(seed, c as u64, 0);
            // hist[r][k] = #{Z_r = k}, with the last slot collecting Z_r >= max_k
            let mut hist = vec![0u64; (generations + 1) * width];
            for _ in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let z = simulate_gw(spec, generations, &mut rng)?;
                for (r, &zr) in z.iter().enumerate() {
                    hist[r * width + (zr.min(max_k) as usize)] += 1;
                }
            }
            Ok(hist)
        })
        .try_reduce(
            || vec![0u64; (generations + 1) * width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok((0..=generations)
        .map(|r| {
            let row = &counts[r * width..(r + 1) * width];
            let mut tail = vec![0.0; width];
            let mut acc = 0u64;
            for k in (0..width).rev() {
                acc += row[k];
                tail[k] = acc as f64 / trials as f64;
            }
            tail
        })
        .collect())
}

/// Mean and standard error of `Z_r / μ^r` for `r <= generations`.
pub fn normalized_means(spec: &OffspringSpec, generations: usize, trials: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let chunks = trials.div_ceil(CHUNK);
    let zero = || vec![(0.0f64, 0.0f64); generations + 1];
    let sums = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<(f64, f64)>> {
            let mut rng = stream_rng(seed, c as u64, 1);
            let mut acc = zero();
            for _ in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let z = simulate_gw(spec, generations, &mut rng)?;
                for (r, &zr) in z.iter().enumerate() {
                    let w = zr as f64 / spec.mean.powi(r as i32);
                    acc[r].0 += w;
                    acc[r].1 += w * w;
                }
            }
            Ok(acc)
        })
        .try_reduce(zero, |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| {
                x.0 += y.0;
                x.1 += y.1;
            });
            Ok(a)
        })?;
    let m = trials as f64;
    Ok(sums
        .into_iter()
        .map(|(s, s2)| {
            let mean = s / m;
            let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
            (mean, (var / m).sqrt())
        })
        .collect())
}

fn check_lower_deviation_args(spec: &OffspringSpec, gamma: f64) -> Result<()> {
    if !spec.is_supercritical() {
        return Err(Error::InvalidParameter(format!("offspring law with mean {} is not supercritical", spec.mean)));
    }
    if !(gamma > 1.0 && gamma < spec.mean) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} outside (1, {})", spec.mean)));
    }
    Ok(())
}

/// Empirical `P(Z_r <= γ^r)` over `trials` runs.
pub fn lower_deviation_check<R: Rng + ?Sized>(
    spec: &OffspringSpec,
    gamma: f64,
    r: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    check_lower_deviation_args(spec, gamma)?;
    let level = gamma.powi(r as i32);
    let mut hits = 0usize;
    for _ in 0..trials {
        let z = simulate_gw(spec, r, rng)?;
        hits += (z[r] as f64 <= level) as usize;
    }
    Ok(hits as f64 / trials as f64)
}

/// Empirical `P(Z_r <= γ^r)` for `r = 0..=generations`, parallel over trials.
pub fn lower_deviation_curve(
    spec: &OffspringSpec,
    gamma: f64,
    generations: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_lower_deviation_args(spec, gamma)?;
    let chunks = trials.div_ceil(CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<u64>> {
            let mut rng = stream_rng(seed, c as u64, 2);
            let mut hits = vec![0u64; generations + 1];
            for _ in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let z = simulate_gw(spec, generations, &mut rng)?;
                for (r, &zr) in z.iter().enumerate() {
                    hits[r] += (zr as f64 <= gamma.powi(r as i32)) as u64;
                }
            }
            Ok(hits)
        })
        .try_reduce(
            || vec![0u64; generations + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok(hits.into_iter().map(|h| h as f64 / trials as f64).collect())
}

/// Least-squares fit of `ln p` against `r` over the points with `p > 0`.
pub fn log_decay_fit(rs: &[usize], probabilities: &[f64]) -> Result<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rs
        .iter()
        .zip(probabilities)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&r, &p)| (r as f64, p.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InvalidParameter(format!("only {} positive probabilities to fit", xs.len())));
    }
    linear_fit(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    // pmf of Z_r by repeated composition, truncated at `width`
    fn exact_levels(pmf: &[f64], r: usize, width: usize) -> Vec<f64> {
        let mut dist = vec![0.0; width];
        dist[1] = 1.0;
        for _ in 0..r {
            // next = Σ_j dist[j] · pmf^{*j}
            let mut next = vec![0.0; width];
            let mut power = vec![0.0; width];
            power[0] = 1.0;
            for j in 0..width {
                if dist[j] > 0.0 {
                    next.iter_mut().zip(&power).for_each(|(a, b)| *a += dist[j] * b);
                }
                let mut conv = vec![0.0; width];
                for (a, &pa) in power.iter().enumerate() {
                    if pa == 0.0 {
                        continue;
                    }
                    for (b, &pb) in pmf.iter().enumerate() {
                        if a + b < width {
                            conv[a + b] += pa * pb;
                        }
                    }
                }
                power = conv;
            }
            dist = next;
        }
        dist
    }

    #[test]
    fn parsing_and_moments() {
        let s = OffspringSpec::parse("1:0.95, 2:0.05").unwrap();
        assert!((s.mean() - 1.05).abs() < 1e-12);
        assert!((s.variance() - 0.0475).abs() < 1e-12);
        assert!(s.is_supercritical());
        assert_eq!(s, OffspringSpec::two_point(0.1).unwrap());
        assert!(OffspringSpec::parse("1:0.5").is_err());
        assert!(OffspringSpec::parse("1=0.5").is_err());
        assert!(OffspringSpec::parse("1:-0.5,2:1.5").is_err());
        let g = OffspringSpec::parse("geometric").unwrap();
        assert_eq!((g.mean(), g.variance()), (1.0, 2.0));
        assert!(!g.is_supercritical());
    }

    #[test]
    fn trivial_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let one = OffspringSpec::parse("1:1").unwrap();
        assert_eq!(simulate_gw(&one, 50, &mut rng).unwrap(), vec![1; 51]);
        let none = OffspringSpec::parse("0:1").unwrap();
        assert_eq!(simulate_gw(&none, 3, &mut rng).unwrap(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn population_cap_reports_generation() {
        let two = OffspringSpec::parse("2:1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(simulate_gw_capped(&two, 10, 100, &mut rng), Err(Error::PopulationCap { cap: 100, generation: 7 }));
        assert!(simulate_gw(&two, 26, &mut rng).is_ok());
        assert!(simulate_gw(&two, 27, &mut rng).is_err());
    }

    #[test]
    fn bound_at_first_generation() {
        // φ''(3/2) from the series Σ k(k-1) s^(k-2) 2^-(k+1)
        let phi2: f64 = (2..400).map(|k| (k * (k - 1)) as f64 * 1.5f64.powi(k - 2) * 0.5f64.powi(k + 1)).sum();
        assert!((phi2 - 16.0).abs() < 1e-9);
        let b = critical_geometric_tail_bound(1, 1);
        assert!((b - 1.5 / (1.0 + 1.0 / (phi2 / 2.0 + 2.0))).abs() < 1e-12);
        assert!(b >= 0.5);
        for r in 1..20 {
            for k in 1..200 {
                assert!(critical_geometric_tail_bound(r, k + 1) < critical_geometric_tail_bound(r, k));
            }
        }
    }

    #[test]
    fn geometric_levels_match_composition() {
        let pmf: Vec<f64> = (0..60).map(|k| 0.5f64.powi(k + 1)).collect();
        let exact = exact_levels(&pmf, 5, 60);
        let tails = tail_probabilities(&OffspringSpec::geometric_half(), 5, 20, 200_000, 3).unwrap();
        for k in 0..=20u64 {
            let p: f64 = exact[k as usize..].iter().sum();
            let se = (p * (1.0 - p) / 200_000.0).sqrt();
            assert!((tails[5][k as usize] - p).abs() <= 4.0 * se + 1e-9, "k={k}");
            assert!(tails[5][k as usize] < critical_geometric_tail_bound(5, k.max(1)));
        }
    }

    #[test]
    fn large_populations_keep_the_law() {
        // sums over many parents go through the split samplers
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in [OffspringSpec::geometric_half(), OffspringSpec::parse("0:0.2,1:0.3,3:0.5").unwrap()] {
            let m = 10_000u64;
            let xs: Vec<f64> = (0..4000).map(|_| spec.sample_sum(m, &mut rng) as f64).collect();
            let (mean, se) = crate::stats::mean_and_stderr(&xs);
            assert!((mean - m as f64 * spec.mean()).abs() < 4.0 * se);
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3999.0;
            assert!((var / (m as f64 * spec.variance()) - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn two_point_mean_growth() {
        let spec = OffspringSpec::two_point(DEFAULT_K0).unwrap();
        let means = normalized_means(&spec, 20, 100_000, 9).unwrap();
        for (r, (m, se)) in means.iter().enumerate() {
            assert!((m - 1.0).abs() <= 3.0 * se + 1e-12, "r={r}: {m} ± {se}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert!(simulate_gw(&spec, 30, &mut rng).unwrap().iter().all(|&z| z >= 1));
        }
    }

    #[test]
    fn lower_deviation_arguments() {
        let spec = OffspringSpec::two_point(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(lower_deviation_check(&spec, 1.1, 0, 100, &mut rng).unwrap(), 1.0);
        assert!(lower_deviation_check(&spec, 1.0, 3, 100, &mut rng).is_err());
        assert!(lower_deviation_check(&spec, spec.mean(), 3, 100, &mut rng).is_err());
        assert!(lower_deviation_check(&OffspringSpec::geometric_half(), 1.1, 3, 100, &mut rng).is_err());
        let gamma = (1.0 + spec.mean()) / 2.0;
        let rs: Vec<usize> = (2..=20).step_by(2).collect();
        let curve = lower_deviation_curve(&spec, gamma, 20, 20_000, 4).unwrap();
        let probs: Vec<f64> = rs.iter().map(|&r| curve[r]).collect();
        assert!(log_decay_fit(&rs, &probs).unwrap().slope < 0.0);
        assert!(log_decay_fit(&[1, 2], &[0.5, 0.25]).is_err());
    }
}
