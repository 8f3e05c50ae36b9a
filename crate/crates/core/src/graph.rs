//! Rooted multigraphs produced by gluing.
//!
//! Text form (1-based ids):
//!
//! ```text
//! v n g root
//! a b
//! ...
//! ```
//!
//! with one `a b` line per edge; a loop is written `a a`. Several graphs in
//! one file are separated by blank lines.

use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Debug)]
pub struct QuotientGraph {
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
    root: usize,
    genus: usize,
    simple: OnceLock<Adjacency>,
}

/// Loop-free adjacency with parallel edges merged, in CSR layout.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Adjacency {
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

impl Clone for QuotientGraph {
    fn clone(&self) -> Self {
        Self {
            vertex_count: self.vertex_count,
            edges: self.edges.clone(),
            root: self.root,
            genus: self.genus,
            simple: OnceLock::new(),
        }
    }
}

impl PartialEq for QuotientGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count
            && self.root == other.root
            && self.genus == other.genus
            && self.edges == other.edges
    }
}

impl Eq for QuotientGraph {}

impl QuotientGraph {
    /// Validates connectivity and `v - n = 1 - 2g`, deriving `g`.
    pub fn new(vertex_count: usize, edges: Vec<(u32, u32)>, root: usize) -> Result<Self> {
        if vertex_count == 0 || root >= vertex_count {
            return Err(Error::InvalidGraph(format!("root {root} with {vertex_count} vertices")));
        }
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a as usize >= vertex_count || b as usize >= vertex_count) {
            return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
        }
        let excess = edges.len() as i64 + 1 - vertex_count as i64;
        if excess < 0 || excess % 2 != 0 {
            return Err(Error::InvalidGraph(format!(
                "{vertex_count} vertices and {} edges violate v - n = 1 - 2g",
                edges.len()
            )));
        }
        let g = Self { vertex_count, edges, root, genus: excess as usize / 2, simple: OnceLock::new() };
        let reached = g.bfs_from(root).iter().filter(|&&d| d != u32::MAX).count();
        if reached != vertex_count {
            return Err(Error::InvalidGraph(format!("only {reached} of {vertex_count} vertices connected")));
        }
        Ok(g)
    }

    pub(crate) fn new_unchecked(vertex_count: usize, edges: Vec<(u32, u32)>, root: usize, genus: usize) -> Self {
        Self { vertex_count, edges, root, genus, simple: OnceLock::new() }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn adjacency(&self) -> &Adjacency {
        self.simple.get_or_init(|| {
            let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(2 * self.edges.len());
            for &(a, b) in &self.edges {
                if a != b {
                    pairs.push((a, b));
                    pairs.push((b, a));
                }
            }
            pairs.sort_unstable();
            pairs.dedup();
            let mut offsets = vec![0u32; self.vertex_count + 1];
            for &(a, _) in &pairs {
                offsets[a as usize + 1] += 1;
            }
            for v in 0..self.vertex_count {
                offsets[v + 1] += offsets[v];
            }
            Adjacency { offsets, targets: pairs.into_iter().map(|(_, b)| b).collect() }
        })
    }

    /// Degree counting loops twice.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertex_count];
        for &(a, b) in &self.edges {
            d[a as usize] += 1;
            d[b as usize] += 1;
        }
        d
    }

    pub(crate) fn bfs_from(&self, source: usize) -> Vec<u32> {
        let adj = self.adjacency();
        let mut dist = vec![u32::MAX; self.vertex_count];
        let mut queue = Vec::with_capacity(self.vertex_count);
        dist[source] = 0;
        queue.push(source as u32);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head] as usize;
            head += 1;
            let next = dist[v] + 1;
            for &w in adj.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = next;
                    queue.push(w);
                }
            }
        }
        dist
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} {}\n", self.vertex_count, self.edges.len(), self.genus, self.root + 1);
        for &(a, b) in &self.edges {
            s.push_str(&format!("{} {}\n", a + 1, b + 1));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut graphs = parse_graphs(text)?;
        match graphs.len() {
            1 => Ok(graphs.pop().unwrap()),
            k => Err(Error::Parse { line: 1, reason: format!("expected one graph, found {k}") }),
        }
    }
}

fn parse_numbers(line: &str, lineno: usize, expected: usize) -> Result<Vec<usize>> {
    let nums = line
        .split_whitespace()
        .map(|w| w.parse::<usize>().map_err(|_| Error::Parse { line: lineno, reason: format!("bad integer {w:?}") }))
        .collect::<Result<Vec<_>>>()?;
    if nums.len() != expected {
        return Err(Error::Parse { line: lineno, reason: format!("expected {expected} fields, got {}", nums.len()) });
    }
    Ok(nums)
}

/// Parses every graph in a blank-line separated file.
pub fn parse_graphs(text: &str) -> Result<Vec<QuotientGraph>> {
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    loop {
        while lines.peek().is_some_and(|(_, l)| l.trim().is_empty()) {
            lines.next();
        }
        let Some((i, header)) = lines.next() else { break };
        let h = parse_numbers(header, i + 1, 4)?;
        let (v, n, g, root) = (h[0], h[1], h[2], h[3]);
        if root == 0 {
            return Err(Error::Parse { line: i + 1, reason: "ids are 1-based".into() });
        }
        let mut edges = Vec::with_capacity(n);
        for _ in 0..n {
            let (j, line) = lines.next().ok_or(Error::Parse { line: i + 1, reason: "truncated edge list".into() })?;
            let e = parse_numbers(line, j + 1, 2)?;
            if e[0] == 0 || e[1] == 0 {
                return Err(Error::Parse { line: j + 1, reason: "ids are 1-based".into() });
            }
            edges.push(((e[0] - 1) as u32, (e[1] - 1) as u32));
        }
        let graph = QuotientGraph::new(v, edges, root - 1)?;
        if graph.genus() != g {
            return Err(Error::Parse { line: i + 1, reason: format!("header genus {g}, edges imply {}", graph.genus()) });
        }
        out.push(graph);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_and_connectivity_checked() {
        let g = QuotientGraph::new(1, vec![(0, 0), (0, 0)], 0).unwrap();
        assert_eq!(g.genus(), 1);
        assert!(QuotientGraph::new(2, vec![(0, 1), (0, 1)], 0).is_err());
        assert!(QuotientGraph::new(3, vec![(0, 1), (0, 1), (0, 0)], 0).is_err());
        assert!(QuotientGraph::new(2, vec![(0, 2)], 0).is_err());
    }

    #[test]
    fn adjacency_drops_loops_and_merges_parallel_edges() {
        let g = QuotientGraph::new(2, vec![(0, 0), (0, 1), (1, 0)], 1).unwrap();
        assert_eq!(g.adjacency().neighbors(0), &[1]);
        assert_eq!(g.adjacency().neighbors(1), &[0]);
        assert_eq!(g.degrees(), vec![4, 2]);
    }

    #[test]
    fn text_round_trip() {
        let g = QuotientGraph::new(2, vec![(0, 0), (0, 1), (1, 1)], 1).unwrap();
        let text = g.to_text();
        assert_eq!(text, "2 3 1 2\n1 1\n1 2\n2 2\n");
        assert_eq!(QuotientGraph::from_text(&text).unwrap(), g);
        let two = format!("{text}\n{text}");
        assert_eq!(parse_graphs(&two).unwrap().len(), 2);
        assert!(QuotientGraph::from_text("2 3 0 2\n1 1\n1 2\n2 2\n").is_err());
        assert!(QuotientGraph::from_text("2 3 1 2\n1 1\n1 2\n").is_err());
        assert!(QuotientGraph::from_text("1 0 0 0\n").is_err());
    }
}
