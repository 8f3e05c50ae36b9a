//! Gluing marked trees into quotient multigraphs and measuring them.

mod conditions;
mod metrics;

pub use conditions::{
    check_condition_a, check_condition_b, ConditionA, ConditionAConstants, ConditionB,
};
pub use metrics::{
    diameter, diameter_all_sources, diameter_with_cap, double_sweep_lower_bound, injectivity_radius,
    metric_report, typical_distance, Diameter, InjectivityRadius, MetricReport, DEFAULT_DIAMETER_CAP,
};
pub use crate::tree::max_ball_volume;

use crate::error::{Error, Result};
use crate::graph::QuotientGraph;
use crate::marked::MarkedTree;

/// Merges every mark class of `mt` into one vertex. Each tree edge becomes
/// one edge between the marks of its endpoints, so loops and parallel edges
/// survive; the root is the mark of the tree root.
pub fn glue(mt: &MarkedTree) -> QuotientGraph {
    let tree = mt.tree();
    let mut edges = Vec::with_capacity(tree.n());
    for v in 0..tree.vertex_count() {
        for &c in tree.children(v) {
            let (a, b) = (mt.marks()[v], mt.marks()[c as usize]);
            edges.push((a.min(b), a.max(b)));
        }
    }
    let v = mt.mark_count();
    QuotientGraph::new_unchecked(v, edges, mt.mark(0), mt.lambda().genus())
}

/// Shortest-path distances from `source`; unreachable vertices get `u32::MAX`.
/// Loops are ignored and parallel edges count once.
pub fn bfs_distances(gq: &QuotientGraph, source: usize) -> Result<Vec<u32>> {
    if source >= gq.vertex_count() {
        return Err(Error::UnknownVertex { vertex: source, vertex_count: gq.vertex_count() });
    }
    Ok(gq.bfs_from(source))
}
