use std::fmt;

use crate::composition::OddComposition;
use crate::error::{Error, Result};
use crate::tree::RootedPlaneTree;

/// A plane tree whose vertices carry marks `0..N`, mark `i` used exactly
/// `lambda[i]` times.
#[derive(Clone, PartialEq, Eq)]
pub struct MarkedTree {
    tree: RootedPlaneTree,
    marks: Vec<u32>,
    lambda: OddComposition,
}

impl MarkedTree {
    pub fn new(tree: RootedPlaneTree, marks: Vec<u32>, lambda: OddComposition) -> Result<Self> {
        if marks.len() != tree.vertex_count() {
            return Err(Error::MarkingMismatch(format!(
                "{} marks for {} vertices",
                marks.len(),
                tree.vertex_count()
            )));
        }
        let mut counts = vec![0u32; lambda.len()];
        for &m in &marks {
            let slot = counts
                .get_mut(m as usize)
                .ok_or_else(|| Error::MarkingMismatch(format!("mark {m} out of range")))?;
            *slot += 1;
        }
        if counts != lambda.parts() {
            return Err(Error::MarkingMismatch(format!(
                "mark histogram {counts:?} differs from {lambda:?}"
            )));
        }
        Ok(Self { tree, marks, lambda })
    }

    /// Derives the composition from the mark histogram.
    pub fn from_labels(tree: RootedPlaneTree, marks: Vec<u32>) -> Result<Self> {
        let classes = marks.iter().map(|&m| m as usize + 1).max().unwrap_or(0);
        let mut counts = vec![0u32; classes];
        for &m in &marks {
            counts[m as usize] += 1;
        }
        let lambda = OddComposition::new(counts)?;
        Self::new(tree, marks, lambda)
    }

    pub fn tree(&self) -> &RootedPlaneTree {
        &self.tree
    }

    pub fn marks(&self) -> &[u32] {
        &self.marks
    }

    pub fn mark(&self, v: usize) -> usize {
        self.marks[v] as usize
    }

    pub fn lambda(&self) -> &OddComposition {
        &self.lambda
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn mark_count(&self) -> usize {
        self.lambda.len()
    }

    /// Vertices of each mark class, ascending.
    pub fn classes(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> =
            self.lambda.parts().iter().map(|&p| Vec::with_capacity(p as usize)).collect();
        for (v, &m) in self.marks.iter().enumerate() {
            out[m as usize].push(v as u32);
        }
        out
    }

    pub fn into_parts(self) -> (RootedPlaneTree, Vec<u32>, OddComposition) {
        (self.tree, self.marks, self.lambda)
    }

    /// Two lines: the contour word, then the 1-based marks in vertex order.
    pub fn to_text(&self) -> String {
        let marks: Vec<String> = self.marks.iter().map(|m| (m + 1).to_string()).collect();
        format!("{}\n{}\n", self.tree.to_contour(), marks.join(" "))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let contour = lines.next().ok_or(Error::Parse { line: 1, reason: "missing contour".into() })?;
        let tree = RootedPlaneTree::from_contour(contour)?;
        let mark_line = lines.next().ok_or(Error::Parse { line: 2, reason: "missing marks".into() })?;
        let marks = mark_line
            .split_whitespace()
            .map(|w| match w.parse::<u32>() {
                Ok(m) if m >= 1 => Ok(m - 1),
                _ => Err(Error::Parse { line: 2, reason: format!("bad mark {w:?}") }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_labels(tree, marks)
    }
}

impl fmt::Debug for MarkedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MarkedTree({}, {:?})", self.tree, self.marks)
    }
}
