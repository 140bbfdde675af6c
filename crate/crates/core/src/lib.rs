//! Weighted hypergraph recovery from samples and masked-modeling oracles,
//! entity alignment between hypergraphs, and a knowledge-graph relation
//! evaluation pipeline.

pub mod alignment;
pub mod bounds;
pub mod error;
pub mod generators;
pub mod hypergraph;
pub mod kg;
pub mod masking;
pub mod oracle;
pub mod recovery;
pub mod rng;
pub mod sweep;

pub use error::{Error, Result};
pub use hypergraph::{
    dissimilarity, sketch_diff, Hyperedge, NodeId, NodeRelabeling, SimpleGraph, WeightedHypergraph,
};
