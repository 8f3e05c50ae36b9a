//! Rooted plane trees in canonical depth-first numbering.
//!
//! Vertex `0` is the root and ids follow first-visit order of the contour
//! walk, so a tree is fully determined by its contour word. The text form
//! wraps every vertex in a pair of parentheses: a single vertex is `()`,
//! the cherry is `(()())`.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

pub const NO_PARENT: u32 = u32::MAX;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RootedPlaneTree {
    // children of v are kids[offsets[v]..offsets[v + 1]], in plane order
    offsets: Vec<u32>,
    kids: Vec<u32>,
}

impl RootedPlaneTree {
    /// The tree with no edges.
    pub fn single_vertex() -> Self {
        Self { offsets: vec![0, 0], kids: Vec::new() }
    }

    /// Builds a tree from a Dyck word over its edges: `true` steps away
    /// from the root into a new child, `false` steps back.
    pub fn from_dyck_steps(steps: &[bool]) -> Result<Self> {
        if steps.len() % 2 != 0 {
            return Err(Error::InvalidTree("odd-length Dyck word".into()));
        }
        let n = steps.len() / 2;
        let mut parent = Vec::with_capacity(n + 1);
        parent.push(NO_PARENT);
        let mut stack: Vec<u32> = vec![0];
        for (i, &up) in steps.iter().enumerate() {
            if up {
                let id = parent.len() as u32;
                parent.push(*stack.last().unwrap());
                stack.push(id);
            } else {
                if stack.len() == 1 {
                    return Err(Error::Contour { position: i, reason: "step below the root" });
                }
                stack.pop();
            }
        }
        if stack.len() != 1 {
            return Err(Error::Contour { position: steps.len(), reason: "unclosed subtree" });
        }
        Ok(Self::from_preorder_parents(&parent))
    }

    // parents of a preorder numbering; children come out in plane order
    fn from_preorder_parents(parent: &[u32]) -> Self {
        let count = parent.len();
        let mut offsets = vec![0u32; count + 1];
        for &p in &parent[1..] {
            offsets[p as usize + 1] += 1;
        }
        for v in 0..count {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut kids = vec![0u32; count - 1];
        for (v, &p) in parent.iter().enumerate().skip(1) {
            kids[fill[p as usize] as usize] = v as u32;
            fill[p as usize] += 1;
        }
        Self { offsets, kids }
    }

    /// Parses the parenthesised contour form, e.g. `(()())`.
    pub fn from_contour(word: &str) -> Result<Self> {
        let bytes = word.trim().as_bytes();
        if bytes.len() < 2 || bytes[0] != b'(' || bytes[bytes.len() - 1] != b')' {
            return Err(Error::Contour { position: 0, reason: "contour must be wrapped in parentheses" });
        }
        let mut steps = Vec::with_capacity(bytes.len() - 2);
        for (i, &b) in bytes[1..bytes.len() - 1].iter().enumerate() {
            match b {
                b'(' => steps.push(true),
                b')' => steps.push(false),
                _ => return Err(Error::Contour { position: i + 1, reason: "unexpected character" }),
            }
        }
        Self::from_dyck_steps(&steps).map_err(|e| match e {
            Error::Contour { position, reason } => Error::Contour { position: position + 1, reason },
            other => other,
        })
    }

    /// Builds a tree from arbitrary ids. Returns the tree together with the
    /// relabelling `old id -> canonical id`.
    pub fn from_child_lists(children: &[Vec<usize>], root: usize) -> Result<(Self, Vec<usize>)> {
        let relabel = canonical_numbering(children, root)?;
        let count = children.len();
        let mut parent = vec![NO_PARENT; count];
        for (old, kids) in children.iter().enumerate() {
            for &k in kids {
                parent[relabel[k]] = relabel[old] as u32;
            }
        }
        Ok((Self::from_preorder_parents(&parent), relabel))
    }

    pub fn path(n: usize) -> Self {
        Self::from_dyck_steps(&[vec![true; n], vec![false; n]].concat()).unwrap()
    }

    pub fn star(n: usize) -> Self {
        let steps: Vec<bool> = (0..2 * n).map(|i| i % 2 == 0).collect();
        Self::from_dyck_steps(&steps).unwrap()
    }

    /// Number of edges.
    pub fn n(&self) -> usize {
        self.kids.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.kids.len() + 1
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn children(&self, v: usize) -> &[u32] {
        &self.kids[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.children(v).len() + usize::from(v != 0)
    }

    pub fn child_lists(&self) -> Vec<Vec<usize>> {
        (0..self.vertex_count())
            .map(|v| self.children(v).iter().map(|&c| c as usize).collect())
            .collect()
    }

    /// Dyck word over the edges (without the root's wrapping pair).
    pub fn dyck_steps(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(2 * self.n());
        let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
        while let Some((v, i)) = stack.pop() {
            let kids = self.children(v as usize);
            if i < kids.len() {
                stack.push((v, i + 1));
                stack.push((kids[i], 0));
                out.push(true);
            } else if v != 0 {
                out.push(false);
            }
        }
        out
    }

    pub fn to_contour(&self) -> String {
        let mut s = String::with_capacity(2 * self.vertex_count());
        s.push('(');
        for up in self.dyck_steps() {
            s.push(if up { '(' } else { ')' });
        }
        s.push(')');
        s
    }

    pub fn index(&self) -> TreeIndex {
        let count = self.vertex_count();
        let mut parent = vec![NO_PARENT; count];
        let mut depth = vec![0u32; count];
        // preorder numbering: parents precede children
        for v in 0..count {
            for &c in self.children(v) {
                parent[c as usize] = v as u32;
                depth[c as usize] = depth[v] + 1;
            }
        }
        TreeIndex { parent, depth }
    }

    /// Neighbours in exploration order: children in plane order, then the parent.
    pub fn neighbors<'a>(&'a self, index: &'a TreeIndex, v: usize) -> impl Iterator<Item = usize> + 'a {
        let p = index.parent[v];
        self.children(v)
            .iter()
            .map(|&c| c as usize)
            .chain((p != NO_PARENT).then_some(p as usize))
    }

    /// Tree distances from `source` to every vertex.
    pub fn distances_from(&self, index: &TreeIndex, source: usize) -> Vec<u32> {
        self.multi_source_distances(index, &[source], u32::MAX)
    }

    /// Distances from the nearest of `sources`, explored up to `limit`
    /// (vertices further away keep `u32::MAX`).
    pub fn multi_source_distances(&self, index: &TreeIndex, sources: &[usize], limit: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v];
            if d >= limit {
                continue;
            }
            for w in self.neighbors(index, v) {
                if dist[w] == u32::MAX {
                    dist[w] = d + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn diameter(&self) -> usize {
        let index = self.index();
        let far = |src: usize| -> (usize, u32) {
            let d = self.distances_from(&index, src);
            let (v, &dv) = d.iter().enumerate().max_by_key(|&(i, &x)| (x, std::cmp::Reverse(i))).unwrap();
            (v, dv)
        };
        let (a, _) = far(0);
        far(a).1 as usize
    }
}

impl fmt::Debug for RootedPlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedPlaneTree({})", self.to_contour())
    }
}

impl fmt::Display for RootedPlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_contour())
    }
}

/// Derived parent and depth tables for a tree.
#[derive(Debug, Clone)]
pub struct TreeIndex {
    pub parent: Vec<u32>,
    pub depth: Vec<u32>,
}

impl TreeIndex {
    /// Deepest common ancestor of `u` and `v`.
    pub fn meet(&self, mut u: usize, mut v: usize) -> usize {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u] as usize;
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v] as usize;
        }
        while u != v {
            u = self.parent[u] as usize;
            v = self.parent[v] as usize;
        }
        u
    }

    pub fn distance(&self, u: usize, v: usize) -> u32 {
        let w = self.meet(u, v);
        self.depth[u] + self.depth[v] - 2 * self.depth[w]
    }

    /// Vertices from `v` up to the root, both included.
    pub fn root_path(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while self.parent[v] != NO_PARENT {
            v = self.parent[v] as usize;
            out.push(v);
        }
        out
    }
}

/// Relabels an arbitrary rooted ordered tree by depth-first first-visit order.
/// Returns `old id -> new id`. Fails unless the child lists describe a single
/// tree spanning every id.
pub fn canonical_numbering(children: &[Vec<usize>], root: usize) -> Result<Vec<usize>> {
    let count = children.len();
    if root >= count {
        return Err(Error::InvalidTree(format!("root {root} out of range")));
    }
    let mut relabel = vec![usize::MAX; count];
    let mut next = 0;
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        if relabel[v] != usize::MAX {
            return Err(Error::InvalidTree(format!("vertex {v} reached twice")));
        }
        relabel[v] = next;
        next += 1;
        for &c in children[v].iter().rev() {
            if c >= count {
                return Err(Error::InvalidTree(format!("child {c} out of range")));
            }
            stack.push(c);
        }
    }
    if next != count {
        return Err(Error::InvalidTree(format!("{} of {count} vertices reachable from the root", next)));
    }
    let edges: usize = children.iter().map(Vec::len).sum();
    if edges + 1 != count {
        return Err(Error::InvalidTree(format!("{edges} edges on {count} vertices")));
    }
    Ok(relabel)
}

/// Largest ball volume `max_v |B_r(v)|` in the tree metric, computed exactly.
pub fn max_ball_volume(tree: &RootedPlaneTree, r: usize) -> usize {
    let count = tree.vertex_count();
    if r == 0 {
        return 1;
    }
    let r = r.min(tree.diameter());
    let width = r + 1;
    // down[v*width + k]: descendants of v (v included) within distance k
    let mut down = vec![1u32; count * width];
    for v in (0..count).rev() {
        for &c in tree.children(v) {
            let c = c as usize;
            for k in 1..width {
                down[v * width + k] += down[c * width + k - 1];
            }
        }
    }
    let mut full = vec![0u32; count * width];
    full[..width].copy_from_slice(&down[..width]);
    for v in 0..count {
        for &c in tree.children(v) {
            let c = c as usize;
            full[c * width] = 1;
            for k in 1..width {
                let below = if k >= 2 { down[c * width + k - 2] } else { 0 };
                full[c * width + k] = down[c * width + k] + full[v * width + k - 1] - below;
            }
        }
    }
    (0..count).map(|v| full[v * width + r] as usize).max().unwrap()
}
