//! Gaussian node embeddings for attributed graphs.
//!
//! Every node is embedded as a diagonal Gaussian produced by a shared feed-forward encoder
//! from its attribute vector. Training ranks nodes by truncated hop distance: for each
//! anchor, nearer hops must have lower KL energy than farther ones. Because the embedding is
//! a function of attributes only, nodes unseen during training can be embedded directly.

pub mod encoder;
pub mod energy;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ranking;
pub mod seed;
pub mod train;

pub use encoder::EncoderParameters;
pub use energy::{Embeddings, GaussianEmbedding, GaussianRef};
pub use error::{Error, Result};
pub use eval::{EvaluationReport, ScoredPairSet};
pub use graph::{AttributedGraph, Attributes, DataSplit, HopNeighborhoods, Labels};
pub use ranking::{AnchoredSample, Sampler, Triplet};
pub use train::{AdamState, TrainConfig, TrainingTrace};
