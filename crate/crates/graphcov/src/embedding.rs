//! Truncated power iteration of the adjacency matrix and the k×k
//! covariance descriptor built from it.
//!
//! Column t of the embedding holds n·Aᵗe/‖Aᵗe‖₁, computed recursively with
//! sparse matrix-vector products; no dense n×n matrix is ever formed.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::Graph;

pub const MAX_DEPTH: usize = 32;
pub const DEFAULT_DEPTH: usize = 5;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("iteration depth {0} out of range (must be 1..={MAX_DEPTH})")]
    DepthOutOfRange(usize),
    #[error("graph has no edges")]
    NoEdges,
    #[error("power iterate collapsed to zero L1 norm at step {0}")]
    ZeroIterate(usize),
}

/// The n×k matrix M of normalized power-iteration vectors, stored by column.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    cols: Vec<Vec<f64>>,
    n: usize,
}

impl EmbeddingMatrix {
    pub fn depth(&self) -> usize {
        self.cols.len()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Column t (0-based) is the normalized Aᵗ⁺¹e.
    pub fn column(&self, t: usize) -> &[f64] {
        &self.cols[t]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.cols.iter().map(|c| c.iter().sum()).collect()
    }
}

/// Symmetric PSD k×k covariance descriptor of a graph, row-major.
#[derive(Debug, Clone)]
pub struct CovarianceDescriptor {
    k: usize,
    values: Vec<f64>,
}

impl CovarianceDescriptor {
    pub fn from_values(k: usize, values: Vec<f64>) -> CovarianceDescriptor {
        assert_eq!(values.len(), k * k);
        CovarianceDescriptor { k, values }
    }

    pub fn depth(&self) -> usize {
        self.k
    }

    /// Entry [i][j] (0-based) is the covariance of normalized A^{i+1}e and A^{j+1}e.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn trace(&self) -> f64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &CovarianceDescriptor) -> f64 {
        assert_eq!(self.k, other.k);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Plain-text serialization: k on the first line, then k rows of k
    /// values with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.k);
        for i in 0..self.k {
            let row: Vec<String> = (0..self.k).map(|j| format!("{:.16e}", self.get(i, j))).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

/// Runs k steps of power iteration from e, renormalizing every step so
/// each column sums to n exactly (up to rounding).
pub fn power_embed(g: &Graph, k: usize) -> Result<EmbeddingMatrix, EmbedError> {
    if k < 1 || k > MAX_DEPTH {
        return Err(EmbedError::DepthOutOfRange(k));
    }
    if g.edge_count() < 1 {
        return Err(EmbedError::NoEdges);
    }
    let n = g.node_count();
    let nf = n as f64;
    let mut x = vec![1.0f64; n];
    let mut cols = Vec::with_capacity(k);
    for t in 1..=k {
        let mut y = vec![0.0f64; n];
        for u in 0..n {
            let mut acc = 0.0;
            for &v in g.neighbors(u) {
                acc += x[v as usize];
            }
            y[u] = acc;
        }
        let s: f64 = y.iter().sum();
        if s <= 0.0 {
            return Err(EmbedError::ZeroIterate(t));
        }
        // (v * n) / s keeps regular graphs at exactly 1.0 per entry.
        for v in &mut y {
            *v = (*v * nf) / s;
        }
        x = y.clone();
        cols.push(y);
    }
    Ok(EmbeddingMatrix { cols, n })
}

/// C = (1/n) Σᵢ (Mᵢ − 1)(Mᵢ − 1)ᵀ over the rows of M; the mean vector is
/// the ones vector (each column sums to n by construction). Only the upper
/// triangle is computed, then mirrored, so symmetry is exact.
pub fn covariance_descriptor(m: &EmbeddingMatrix) -> CovarianceDescriptor {
    let k = m.depth();
    let nf = m.node_count() as f64;
    let mut values = vec![0.0f64; k * k];
    for a in 0..k {
        for b in a..k {
            let ca = m.column(a);
            let cb = m.column(b);
            let mut acc = 0.0;
            for i in 0..m.node_count() {
                acc += (ca[i] - 1.0) * (cb[i] - 1.0);
            }
            let v = acc / nf;
            values[a * k + b] = v;
            values[b * k + a] = v;
        }
    }
    CovarianceDescriptor { k, values }
}

/// Full descriptor pipeline for one graph.
pub fn embed_graph(g: &Graph, k: usize) -> Result<CovarianceDescriptor, EmbedError> {
    Ok(covariance_descriptor(&power_embed(g, k)?))
}
