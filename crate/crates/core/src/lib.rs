//! Random unicellular maps of high genus: exact samplers for their
//! underlying graphs, metric measurements, the exploration processes used
//! to study them, Galton–Watson comparisons and small-case oracles.

pub mod composition;
pub mod cperm;
pub mod error;
pub mod experiment;
pub mod explore;
pub mod graph;
pub mod gw;
pub mod marked;
pub mod oracle;
pub mod quotient;
pub mod sample;
pub mod stats;
pub mod tree;
pub mod verify;

pub use composition::OddComposition;
pub use cperm::{CDecoratedTree, CPermutation, Sign};
pub use error::{Error, Result};
pub use graph::QuotientGraph;
pub use marked::MarkedTree;
pub use tree::RootedPlaneTree;
