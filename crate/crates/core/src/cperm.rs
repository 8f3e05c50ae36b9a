//! Cycle-signed permutations with odd cycles, and trees decorated by them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marked::MarkedTree;
use crate::tree::RootedPlaneTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// A permutation of `0..order` whose cycles all have odd length, each
/// cycle carrying a sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CPermutation {
    cycles: Vec<Vec<u32>>,
    signs: Vec<Sign>,
    order: usize,
}

impl CPermutation {
    pub fn new(cycles: Vec<Vec<u32>>, signs: Vec<Sign>) -> Result<Self> {
        if cycles.len() != signs.len() {
            return Err(Error::InvalidPermutation(format!(
                "{} cycles but {} signs",
                cycles.len(),
                signs.len()
            )));
        }
        let order: usize = cycles.iter().map(Vec::len).sum();
        let mut seen = vec![false; order];
        for cycle in &cycles {
            if cycle.len() % 2 == 0 {
                return Err(Error::InvalidPermutation(format!("cycle {cycle:?} has even length")));
            }
            for &x in cycle {
                let x = x as usize;
                if x >= order || seen[x] {
                    return Err(Error::InvalidPermutation(format!("cycles do not partition 0..{order}")));
                }
                seen[x] = true;
            }
        }
        Ok(Self { cycles, signs, order })
    }

    /// Builds from the image table `x -> perm[x]`.
    pub fn from_images(perm: &[u32], signs_by_cycle: impl FnMut(usize) -> Sign) -> Result<Self> {
        let cycles = cycles_of(perm)?;
        let signs = (0..cycles.len()).map(signs_by_cycle).collect();
        Self::new(cycles, signs)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cycles(&self) -> &[Vec<u32>] {
        &self.cycles
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    pub fn genus(&self) -> usize {
        genus_of_cpermutation(self)
    }

    pub fn images(&self) -> Vec<u32> {
        let mut out = vec![0; self.order];
        for c in &self.cycles {
            for (i, &x) in c.iter().enumerate() {
                out[x as usize] = c[(i + 1) % c.len()];
            }
        }
        out
    }

    /// Cycle index of every element.
    pub fn cycle_labels(&self) -> Vec<u32> {
        let mut out = vec![0; self.order];
        for (i, c) in self.cycles.iter().enumerate() {
            for &x in c {
                out[x as usize] = i as u32;
            }
        }
        out
    }
}

/// `(order - #cycles) / 2`. Construction already rejects even cycles, so
/// the difference is always even.
pub fn genus_of_cpermutation(p: &CPermutation) -> usize {
    (p.order - p.cycles.len()) / 2
}

/// Cycle decomposition of an image table; rejects non-bijections.
pub fn cycles_of(perm: &[u32]) -> Result<Vec<Vec<u32>>> {
    let mut seen = vec![false; perm.len()];
    let mut cycles = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            cycle.push(x as u32);
            x = perm[x] as usize;
            if x >= perm.len() {
                return Err(Error::InvalidPermutation(format!("image {x} out of range")));
            }
        }
        if x != start {
            return Err(Error::InvalidPermutation("not a bijection".into()));
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

/// A plane tree with `n` edges together with a C-permutation of its `n + 1`
/// canonically numbered vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CDecoratedTree {
    pub tree: RootedPlaneTree,
    pub perm: CPermutation,
}

impl CDecoratedTree {
    pub fn new(tree: RootedPlaneTree, perm: CPermutation) -> Result<Self> {
        if perm.order() != tree.vertex_count() {
            return Err(Error::InvalidPermutation(format!(
                "order {} for a tree on {} vertices",
                perm.order(),
                tree.vertex_count()
            )));
        }
        Ok(Self { tree, perm })
    }

    pub fn genus(&self) -> usize {
        self.perm.genus()
    }

    /// The marked tree whose marks are cycle indices; gluing it gives the
    /// underlying graph of the decorated tree.
    pub fn as_marked_tree(&self) -> MarkedTree {
        MarkedTree::from_labels(self.tree.clone(), self.perm.cycle_labels())
            .expect("cycle labels are a valid odd marking")
    }
}
