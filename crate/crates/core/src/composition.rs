use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered tuple of positive odd integers; `parts.len()` is the number of
/// quotient vertices and the parts sum to `n + 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct OddComposition {
    parts: Vec<u32>,
}

impl OddComposition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        let total: u64 = parts.iter().map(|&p| u64::from(p)).sum();
        if parts.is_empty() {
            return Err(Error::Infeasible("empty composition".into()));
        }
        if (parts.len() as u64 + total) % 2 != 0 {
            return Err(Error::ParityMismatch { parts: parts.len(), total });
        }
        if let Some((index, &value)) = parts.iter().enumerate().find(|(_, &p)| p % 2 == 0) {
            return Err(Error::EvenPart { index, value });
        }
        Ok(Self { parts })
    }

    pub fn ones(count: usize) -> Self {
        Self { parts: vec![1; count] }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Edge count of the trees this composition marks.
    pub fn n(&self) -> usize {
        self.parts.iter().map(|&p| p as usize).sum::<usize>() - 1
    }

    pub fn genus(&self) -> usize {
        (self.n() + 1 - self.len()) / 2
    }

    pub fn max_part(&self) -> u32 {
        self.parts.iter().copied().max().unwrap_or(0)
    }

    pub fn power_sum(&self, exponent: u32) -> f64 {
        self.parts.iter().map(|&p| f64::from(p).powi(exponent as i32)).sum()
    }

    pub fn fixed_points(&self) -> usize {
        self.parts.iter().filter(|&&p| p == 1).count()
    }
}

impl TryFrom<Vec<u32>> for OddComposition {
    type Error = Error;
    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<OddComposition> for Vec<u32> {
    fn from(c: OddComposition) -> Self {
        c.parts
    }
}

impl fmt::Debug for OddComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.parts)
    }
}

impl fmt::Display for OddComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<String> = self.parts.iter().map(u32::to_string).collect();
        f.write_str(&words.join(" "))
    }
}

/// Checks that `n` edges can be split into `parts` odd classes, i.e.
/// `1 <= parts <= n + 1` and `parts ≡ n + 1 (mod 2)`.
pub fn check_feasible(n: usize, parts: usize) -> Result<()> {
    if parts == 0 || parts > n + 1 {
        return Err(Error::Infeasible(format!("{parts} parts for n = {n}")));
    }
    if (n + 1 - parts) % 2 != 0 {
        return Err(Error::ParityMismatch { parts, total: n as u64 + 1 });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_parts() {
        let c = OddComposition::new(vec![1, 3, 5]).unwrap();
        assert_eq!(c.n(), 8);
        assert_eq!(c.genus(), 3);
        assert_eq!(c.max_part(), 5);
        assert_eq!(c.fixed_points(), 1);
        assert_eq!(OddComposition::new(vec![2, 1]), Err(Error::ParityMismatch { parts: 2, total: 3 }));
        assert_eq!(OddComposition::new(vec![2, 2]), Err(Error::EvenPart { index: 0, value: 2 }));
        assert!(OddComposition::new(vec![]).is_err());
        assert!(OddComposition::new(vec![0, 1]).is_err());
    }

    #[test]
    fn feasibility() {
        assert!(check_feasible(3, 2).is_ok());
        assert!(check_feasible(3, 3).is_err());
        assert!(check_feasible(3, 0).is_err());
        assert!(check_feasible(3, 6).is_err());
    }

    #[test]
    fn serde_validates() {
        let c: OddComposition = serde_json::from_str("[1,3]").unwrap();
        assert_eq!(c.parts(), &[1, 3]);
        assert!(serde_json::from_str::<OddComposition>("[1,2]").is_err());
    }
}
