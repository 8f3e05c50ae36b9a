//! Regularity checks on compositions and plane trees. All logarithms are
//! natural.

use serde::{Deserialize, Serialize};

use crate::composition::OddComposition;
use crate::error::{Error, Result};
use crate::tree::{max_ball_volume, RootedPlaneTree};

/// Constants for the composition regularity check:
/// `max < c0 ln n`, `c1 n < sum l^2 < sum l^3 < c2 n`, `d1 n < #ones < d2 n`.
///
/// Only their existence is known, so the defaults are empirical: fitted on
/// 10^4 compositions at `n = 10^5` per genus ratio, widened slightly.
/// They carry no theoretical weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionAConstants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
}

/// (theta, constants) from `tests/fit_constants.rs`, rounded outward.
const FITTED: &[(f64, ConditionAConstants)] = &[
    (0.10, ConditionAConstants { c0: 2.97, c1: 1.59, c2: 6.31, d1: 0.645, d2: 0.792 }),
    (0.25, ConditionAConstants { c0: 7.55, c1: 3.91, c2: 49.2, d1: 0.327, d2: 0.406 }),
    (0.40, ConditionAConstants { c0: 29.2, c1: 15.2, c2: 1064.0, d1: 0.093, d2: 0.119 }),
];

impl ConditionAConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("c0", self.c0), ("c1", self.c1), ("c2", self.c2), ("d1", self.d1), ("d2", self.d2)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("constant {name} = {value} must be positive")));
            }
        }
        Ok(())
    }

    /// Stored defaults for the fitted ratio nearest to `theta`.
    pub fn fitted(theta: f64) -> Self {
        FITTED.iter().min_by(|a, b| (a.0 - theta).abs().total_cmp(&(b.0 - theta).abs())).unwrap().1
    }

    /// Tightest constants under which every sample passes, each bound then
    /// pushed outward by the relative `margin`.
    pub fn fit(samples: &[OddComposition], n: usize, margin: f64) -> Result<Self> {
        if samples.is_empty() || n < 2 {
            return Err(Error::InvalidParameter("fitting needs samples and n >= 2".into()));
        }
        let nf = n as f64;
        let (mut max_part, mut low2, mut high3, mut low1, mut high1) = (0f64, f64::INFINITY, 0f64, f64::INFINITY, 0f64);
        for s in samples {
            max_part = max_part.max(f64::from(s.max_part()));
            low2 = low2.min(s.power_sum(2));
            high3 = high3.max(s.power_sum(3));
            let ones = s.fixed_points() as f64;
            low1 = low1.min(ones);
            high1 = high1.max(ones);
        }
        let up = 1.0 + margin;
        let down = 1.0 - margin;
        let c = Self {
            c0: max_part * up / nf.ln(),
            c1: low2 * down / nf,
            c2: high3 * up / nf,
            d1: low1 * down / nf,
            d2: high1 * up / nf,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionA {
    pub max_part: bool,
    pub moments: bool,
    pub fixed_points: bool,
}

impl ConditionA {
    pub fn holds(&self) -> bool {
        self.max_part && self.moments && self.fixed_points
    }
}

/// Evaluates the three clauses literally, with `n` the edge count.
pub fn check_condition_a(lambda: &OddComposition, n: usize, k: &ConditionAConstants) -> Result<ConditionA> {
    k.validate()?;
    let nf = n as f64;
    let (s2, s3) = (lambda.power_sum(2), lambda.power_sum(3));
    let ones = lambda.fixed_points() as f64;
    Ok(ConditionA {
        max_part: f64::from(lambda.max_part()) < k.c0 * nf.ln(),
        moments: k.c1 * nf < s2 && s2 < s3 && s3 < k.c2 * nf,
        fixed_points: k.d1 * nf < ones && ones < k.d2 * nf,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionB {
    pub diameter: bool,
    pub volume: bool,
}

impl ConditionB {
    pub fn holds(&self) -> bool {
        self.diameter && self.volume
    }
}

/// `diam(t) > sqrt(n) / ln n` and `M_{floor(ln^3 n)} <= ln^8 n`.
pub fn check_condition_b(t: &RootedPlaneTree) -> Result<ConditionB> {
    let n = t.n();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("tree with {n} edges; need n >= 2")));
    }
    let ln = (n as f64).ln();
    let diameter = t.diameter() as f64 > (n as f64).sqrt() / ln;
    let cap = ln.powi(8);
    // a ball never holds more than every vertex
    let volume = cap >= (n + 1) as f64 || max_ball_volume(t, ln.powi(3).floor() as usize) as f64 <= cap;
    Ok(ConditionB { diameter, volume })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOOSE: ConditionAConstants = ConditionAConstants { c0: 1.0, c1: 1.5, c2: 10.0, d1: 0.1, d2: 1.0 };

    #[test]
    fn all_ones_fails_moments() {
        let lambda = OddComposition::ones(101);
        let a = check_condition_a(&lambda, 100, &LOOSE).unwrap();
        assert!(!a.moments);
        // s2 = s3 = n + 1 also breaks the strict chain for any c1
        let k = ConditionAConstants { c1: 0.5, ..LOOSE };
        assert!(!check_condition_a(&lambda, 100, &k).unwrap().moments);
    }

    #[test]
    fn single_part_fails_max() {
        let lambda = OddComposition::new(vec![1001]).unwrap();
        assert!(!check_condition_a(&lambda, 1000, &LOOSE).unwrap().max_part);
    }

    #[test]
    fn rejects_non_positive_constants() {
        let k = ConditionAConstants { d1: 0.0, ..LOOSE };
        assert!(check_condition_a(&OddComposition::ones(3), 2, &k).is_err());
        let k = ConditionAConstants { c0: f64::NAN, ..LOOSE };
        assert!(k.validate().is_err());
    }

    #[test]
    fn fitted_constants_accept_their_samples() {
        let samples: Vec<_> = [vec![1, 1, 3, 1, 5], vec![3, 3, 1, 1, 1, 1, 1], vec![1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]]
            .into_iter()
            .map(|p| OddComposition::new(p).unwrap())
            .collect();
        let k = ConditionAConstants::fit(&samples, 10, 0.01).unwrap();
        // all ones has s2 = s3, which no constants can rescue
        for s in &samples[..2] {
            assert!(check_condition_a(s, 10, &k).unwrap().holds());
        }
        assert!(ConditionAConstants::fit(&[], 10, 0.01).is_err());
    }

    #[test]
    fn condition_b_examples() {
        assert!(check_condition_b(&RootedPlaneTree::path(1)).is_err());
        let path = check_condition_b(&RootedPlaneTree::path(10_000)).unwrap();
        assert!(path.diameter);
        let star = check_condition_b(&RootedPlaneTree::star(10_000)).unwrap();
        assert!(!star.diameter);
        // ln^8 n is about 5e7 here, far above n + 1, so volume passes trivially
        assert!(star.volume);
    }
}
