//! Graphs as k×k covariance matrices.
//!
//! A graph is embedded by k steps of power iteration of its adjacency
//! matrix from the all-ones vector; the covariance matrix of the resulting
//! n×k row set is a permutation-invariant, positive semidefinite
//! descriptor. Similarity between graphs is the Bhattacharyya similarity
//! between descriptors, which is a valid kernel. The crate also ships the
//! usual competing measures (subgraph-frequency histograms, top-k
//! eigenvalues, random-walk similarity), brute-force oracles that certify
//! the fast paths, and an evaluation harness.

pub mod baselines;
pub mod embedding;
pub mod graph;
pub mod kernel;
pub mod oracle;
pub mod pipeline;

pub use embedding::{covariance_descriptor, embed_graph, power_embed, CovarianceDescriptor, EmbeddingMatrix};
pub use graph::{
    apply_permutation, compute_stats, extract_ego_network, generate_matched_random, parse_edge_list,
    Graph, GraphError, GraphStats, Permutation,
};
pub use kernel::{
    bhattacharyya_distance, bhattacharyya_similarity, build_gram, similarity_between_graphs,
    GramMatrix, KernelError, Ridge,
};
