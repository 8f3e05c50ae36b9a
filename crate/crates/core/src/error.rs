use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid contour word at byte {position}: {reason}")]
    Contour { position: usize, reason: &'static str },

    #[error("composition part count {parts} has the wrong parity for total {total}")]
    ParityMismatch { parts: usize, total: u64 },

    #[error("composition part {index} is {value}, expected a positive odd integer")]
    EvenPart { index: usize, value: u32 },

    #[error("marking does not match composition: {0}")]
    MarkingMismatch(String),

    #[error("invalid C-permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid quotient graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {vertex} is not in a graph with {vertex_count} vertices")]
    UnknownVertex { vertex: usize, vertex_count: usize },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("target mean {mean} exceeds the configured cap {cap}")]
    MeanTooLarge { mean: f64, cap: f64 },

    #[error("degenerate offspring law (beta = 0): {0}")]
    Degenerate(&'static str),

    #[error("rejection sampler gave up after {attempts} attempts")]
    AttemptCapExceeded { attempts: u64 },

    #[error("population cap {cap} exceeded at generation {generation}")]
    PopulationCap { cap: u64, generation: usize },

    #[error("{what} = {value} is above the enumeration cap {cap}")]
    AboveCap { what: &'static str, value: usize, cap: usize },

    #[error("Euler identity failed for n = {n}, g = {g}: {vertices} vertices (master seed {seed}, trial {trial}); marked tree: {dump}")]
    EulerViolation { n: usize, g: usize, vertices: usize, seed: u64, trial: usize, dump: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
