use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tensor product needs {requested} entries, capacity is {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e} ({context})")]
    Positivity { context: String, eigenvalue: f64 },

    #[error("normalization violated: deviation {deviation:e} ({context})")]
    Normalization { context: String, deviation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("channel is singular: Schmidt coefficient a_{index} is zero")]
    SingularChannel { index: usize },

    #[error("outcome {alpha} has rank {rank}; decompose it into rank-one elements first")]
    DecompositionRequired { alpha: usize, rank: usize },

    #[error("ancilla dimension {ancilla} is too small: need d_a >= {needed} for {elements} outcomes")]
    AncillaCapacity {
        ancilla: usize,
        needed: usize,
        elements: usize,
    },

    #[error("internal consistency: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
