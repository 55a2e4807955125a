//! Centrality-driven graph convolutional networks for scale-free graphs.
//!
//! The pipeline has four stages: centrality scoring and hub selection,
//! hub-label propagation to sign vertex-pair similarity, adjacency
//! transformation driven by those signs, and a hub-attention GCN trained
//! with manual reverse-mode gradients. Evaluation covers vertex
//! classification, link prediction, and clustering.

pub mod centrality;
pub mod config;
pub mod engine;
pub mod error;
pub mod eval;
pub mod graph;
pub mod labelprop;
pub mod pipeline;
pub mod transform;

pub use error::{Error, Result};
