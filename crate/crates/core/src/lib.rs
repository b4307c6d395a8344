//! Clustering of Arabic aggregated vertical search results.
//!
//! The pipeline normalizes result text, embeds it, compresses embeddings with
//! a stacked autoencoder, clusters the codes with K-means, ranks each cluster's
//! members by cosine similarity to its centroid and scores the partition with
//! Silhouette, Davies-Bouldin and Dunn indices.

pub mod cluster;
pub mod embed;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod project;
pub mod sae;
pub mod seed;
pub mod validate;

pub use error::{Error, ErrorKind, Result};
