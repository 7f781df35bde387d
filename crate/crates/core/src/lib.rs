//! Two-phase argument mining over annotated forum comments.
//!
//! Phase I fine-tunes a bidirectional transformer encoder to classify
//! proposition spans into five types. Phase II predicts directed support
//! links between propositions: per-proposition sentence embeddings are
//! pooled from the encoder's layerwise sentence-token states, passed
//! through one transformer encoder layer for cross-proposition context,
//! projected into separate Conclusion and Premise spaces, and scored by
//! normalized dot product over all ordered pairs. The resulting argument
//! graphs are general directed graphs, not trees.

pub mod cache;
pub mod config;
pub mod corpus;
pub mod encoder;
pub mod error;
pub mod link;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod store;
pub mod typeclf;

pub use error::{Error, Result};
