//! Bhattacharyya similarity between covariance descriptors, Gram-matrix
//! construction over a graph collection, and the export formats consumed
//! by external SVM tools.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::embedding::{embed_graph, CovarianceDescriptor, EmbedError};
use crate::graph::Graph;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("descriptor depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("ridge must be nonnegative, got {0}")]
    NegativeRidge(f64),
    #[error("singular descriptor; increase ridge or decrease k")]
    SingularDescriptor,
    #[error("embedding failed for graph \"{name}\": {source}")]
    EmbeddingFailed {
        name: String,
        #[source]
        source: EmbedError,
    },
    #[error("gram matrix needs at least 2 graphs, got {0}")]
    TooFewGraphs(usize),
    #[error("precomputed-kernel export requires labels")]
    MissingLabels,
    #[error("malformed gram csv at line {0}")]
    MalformedCsv(usize),
}

/// Ridge policy for Eq.-style regularization of the two descriptors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ridge {
    /// 1e-8 · max(trace(Ca), trace(Cb), 1); keeps the similarity defined
    /// for singular descriptors (e.g. regular graphs) with negligible bias.
    Auto,
    Fixed(f64),
}

impl Ridge {
    pub fn resolve(&self, ca: &CovarianceDescriptor, cb: &CovarianceDescriptor) -> f64 {
        match *self {
            Ridge::Auto => 1e-8 * ca.trace().max(cb.trace()).max(1.0),
            Ridge::Fixed(r) => r,
        }
    }
}

fn to_matrix(c: &CovarianceDescriptor, ridge: f64) -> DMatrix<f64> {
    let k = c.depth();
    DMatrix::from_fn(k, k, |i, j| c.get(i, j) + if i == j { ridge } else { 0.0 })
}

/// Log-determinant via Cholesky; None when the matrix is not positive definite.
fn log_det(m: &DMatrix<f64>) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    Some(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Bhattacharyya distance ½·log(det Σ / √(det Ca'·det Cb')) with
/// Σ = (Ca'+Cb')/2, where the primes are the ridged matrices.
pub fn bhattacharyya_distance(
    ca: &CovarianceDescriptor,
    cb: &CovarianceDescriptor,
    ridge: f64,
) -> Result<f64, KernelError> {
    if ca.depth() != cb.depth() {
        return Err(KernelError::DepthMismatch(ca.depth(), cb.depth()));
    }
    if ridge < 0.0 {
        return Err(KernelError::NegativeRidge(ridge));
    }
    let ma = to_matrix(ca, ridge);
    let mb = to_matrix(cb, ridge);
    let sigma = (&ma + &mb) * 0.5;
    let (lda, ldb, lds) = match (log_det(&ma), log_det(&mb), log_det(&sigma)) {
        (Some(a), Some(b), Some(s)) => (a, b, s),
        _ => return Err(KernelError::SingularDescriptor),
    };
    // det Σ >= sqrt(det Ca' det Cb') for PD matrices; clamp rounding dust.
    Ok((0.5 * (lds - 0.5 * (lda + ldb))).max(0.0))
}

/// Sim = exp(−Dist), in (0, 1].
pub fn bhattacharyya_similarity(
    ca: &CovarianceDescriptor,
    cb: &CovarianceDescriptor,
    ridge: f64,
) -> Result<f64, KernelError> {
    Ok((-bhattacharyya_distance(ca, cb, ridge)?).exp())
}

/// Embeds both graphs at the same depth and compares the descriptors.
pub fn similarity_between_graphs(
    a: &Graph,
    b: &Graph,
    k: usize,
    ridge: Ridge,
) -> Result<f64, KernelError> {
    let ca = embed_graph(a, k).map_err(|source| KernelError::EmbeddingFailed {
        name: "first".into(),
        source,
    })?;
    let cb = embed_graph(b, k).map_err(|source| KernelError::EmbeddingFailed {
        name: "second".into(),
        source,
    })?;
    let r = ridge.resolve(&ca, &cb);
    bhattacharyya_similarity(&ca, &cb, r)
}

/// N×N pairwise similarity matrix with names and optional class labels.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    n: usize,
    values: Vec<f64>,
    names: Vec<String>,
    labels: Option<Vec<String>>,
}

impl GramMatrix {
    pub fn from_fn(
        names: Vec<String>,
        labels: Option<Vec<String>>,
        mut f: impl FnMut(usize, usize) -> Result<f64, KernelError>,
    ) -> Result<GramMatrix, KernelError> {
        let n = names.len();
        if n < 2 {
            return Err(KernelError::TooFewGraphs(n));
        }
        if let Some(l) = &labels {
            assert_eq!(l.len(), n);
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j)?;
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Ok(GramMatrix { n, values, names, labels })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j));
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Kernel-induced squared distance d²(i,j) = K(i,i) + K(j,j) − 2K(i,j).
    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        self.get(i, i) + self.get(j, j) - 2.0 * self.get(i, j)
    }

    /// Dense CSV: header row of names, then one row of values per graph.
    pub fn to_dense_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.names.join(","));
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:.16e}", self.get(i, j))).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn parse_dense_csv(text: &str) -> Result<GramMatrix, KernelError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(KernelError::MalformedCsv(1))?;
        let names: Vec<String> = header.split(',').map(str::to_string).collect();
        let n = names.len();
        if n < 2 {
            return Err(KernelError::TooFewGraphs(n));
        }
        let mut values = Vec::with_capacity(n * n);
        for (i, line) in lines.enumerate() {
            for tok in line.split(',') {
                let v: f64 = tok.parse().map_err(|_| KernelError::MalformedCsv(i + 2))?;
                values.push(v);
            }
        }
        if values.len() != n * n {
            return Err(KernelError::MalformedCsv(n + 1));
        }
        Ok(GramMatrix { n, values, names, labels: None })
    }

    /// Precomputed-kernel text convention: one line per graph,
    /// `<label> 0:<row index starting at 1> 1:<K(i,1)> 2:<K(i,2)> ...`.
    /// Non-numeric labels are mapped to 1..L by first appearance.
    pub fn to_precomputed_kernel(&self) -> Result<String, KernelError> {
        let labels = self.labels.as_ref().ok_or(KernelError::MissingLabels)?;
        let numeric: Vec<String> = if labels.iter().all(|l| l.parse::<i64>().is_ok()) {
            labels.clone()
        } else {
            let mut order: Vec<&String> = Vec::new();
            for l in labels {
                if !order.contains(&l) {
                    order.push(l);
                }
            }
            labels
                .iter()
                .map(|l| (order.iter().position(|o| *o == l).unwrap() + 1).to_string())
                .collect()
        };
        let mut out = String::new();
        for i in 0..self.n {
            let _ = write!(out, "{} 0:{}", numeric[i], i + 1);
            for j in 0..self.n {
                let _ = write!(out, " {}:{:.16e}", j + 1, self.get(i, j));
            }
            let _ = writeln!(out);
        }
        Ok(out)
    }
}

/// Embeds every graph once, then fills all N(N−1)/2 pairs. The diagonal is
/// set to exactly 1.
pub fn build_gram(
    graphs: &[Graph],
    names: &[String],
    labels: Option<&[String]>,
    k: usize,
    ridge: Ridge,
) -> Result<GramMatrix, KernelError> {
    if graphs.len() < 2 {
        return Err(KernelError::TooFewGraphs(graphs.len()));
    }
    assert_eq!(graphs.len(), names.len());
    let descriptors: Vec<CovarianceDescriptor> = graphs
        .iter()
        .zip(names)
        .map(|(g, name)| {
            embed_graph(g, k).map_err(|source| KernelError::EmbeddingFailed {
                name: name.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    GramMatrix::from_fn(names.to_vec(), labels.map(<[String]>::to_vec), |i, j| {
        if i == j {
            return Ok(1.0);
        }
        let r = ridge.resolve(&descriptors[i], &descriptors[j]);
        bhattacharyya_similarity(&descriptors[i], &descriptors[j], r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed_graph;
    use crate::graph::{generate_matched_random, Graph};
    use proptest::prelude::*;

    fn diag(k: usize, v: f64) -> CovarianceDescriptor {
        let mut vals = vec![0.0; k * k];
        for i in 0..k {
            vals[i * k + i] = v;
        }
        CovarianceDescriptor::from_values(k, vals)
    }

    #[test]
    fn self_similarity_is_one() {
        let g = generate_matched_random(20, 50, 1).unwrap();
        let c = embed_graph(&g, 5).unwrap();
        let r = Ridge::Auto.resolve(&c, &c);
        assert_eq!(bhattacharyya_similarity(&c, &c, r).unwrap(), 1.0);
    }

    #[test]
    fn scalar_case_matches_hand_arithmetic() {
        // diag(1) vs diag(4): sigma = 2.5, dist = 0.5*ln(2.5/2)
        let d = bhattacharyya_distance(&diag(1, 1.0), &diag(1, 4.0), 0.0).unwrap();
        assert!((d - 0.5 * (2.5f64 / 2.0).ln()).abs() < 1e-15);
        let s = bhattacharyya_similarity(&diag(1, 1.0), &diag(1, 4.0), 0.0).unwrap();
        assert!((s - (-0.111571775657105f64).exp()).abs() < 1e-12);
        assert!((s - 0.894428).abs() < 1e-6);
    }

    #[test]
    fn mismatched_depth_rejected() {
        assert!(matches!(
            bhattacharyya_similarity(&diag(2, 1.0), &diag(3, 1.0), 0.0),
            Err(KernelError::DepthMismatch(2, 3))
        ));
    }

    #[test]
    fn singular_without_ridge_is_an_error() {
        let zero = CovarianceDescriptor::from_values(2, vec![0.0; 4]);
        assert!(matches!(
            bhattacharyya_similarity(&zero, &zero, 0.0),
            Err(KernelError::SingularDescriptor)
        ));
        // auto ridge makes the zero pair well-defined with Sim = 1
        let r = Ridge::Auto.resolve(&zero, &zero);
        assert_eq!(bhattacharyya_similarity(&zero, &zero, r).unwrap(), 1.0);
    }

    #[test]
    fn graph_level_similarity() {
        let g = generate_matched_random(25, 80, 3).unwrap();
        assert!((similarity_between_graphs(&g, &g, 5, Ridge::Auto).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permuted_graph_similarity_is_one() {
        use crate::graph::{apply_permutation, Permutation};
        use rand::SeedableRng;
        let g = generate_matched_random(40, 150, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let p = Permutation::random(40, &mut rng);
        let h = apply_permutation(&g, &p).unwrap();
        let s = similarity_between_graphs(&g, &h, 5, Ridge::Auto).unwrap();
        assert!((s - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn ridge_monotone_toward_one() {
        let g1 = generate_matched_random(30, 60, 1).unwrap();
        let g2 = generate_matched_random(30, 200, 2).unwrap();
        let c1 = embed_graph(&g1, 4).unwrap();
        let c2 = embed_graph(&g2, 4).unwrap();
        let small = bhattacharyya_similarity(&c1, &c2, 1e-8).unwrap();
        let big = bhattacharyya_similarity(&c1, &c2, 1e6).unwrap();
        assert!(big > small);
        assert!(big > 0.999999);
    }

    #[test]
    fn gram_of_duplicate_graphs() {
        let g = generate_matched_random(15, 40, 1).unwrap();
        let gm = build_gram(
            &[g.clone(), g],
            &["a".into(), "b".into()],
            None,
            4,
            Ridge::Auto,
        )
        .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((gm.get(i, j) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gram_of_regular_pair_needs_ridge() {
        // K3 and K4 both map to zero descriptors; auto ridge keeps Sim = 1.
        let k3 = Graph::from_indexed_edges(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let k4 = Graph::from_indexed_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let gm = build_gram(&[k3, k4], &["k3".into(), "k4".into()], None, 3, Ridge::Auto).unwrap();
        assert!((gm.get(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_psd_on_mixed_corpus() {
        let mut graphs = Vec::new();
        let mut names = Vec::new();
        for seed in 0..50u64 {
            let n = 10 + (seed % 20) as usize;
            let m = (n * (n - 1) / 4).max(1);
            graphs.push(generate_matched_random(n, m + (seed % 7) as usize, seed).unwrap());
            names.push(format!("g{seed}"));
        }
        let gm = build_gram(&graphs, &names, None, 5, Ridge::Auto).unwrap();
        assert!(gm.min_eigenvalue() >= -1e-8 * gm.size() as f64);
    }

    #[test]
    fn dense_csv_roundtrip() {
        let g1 = generate_matched_random(12, 30, 1).unwrap();
        let g2 = generate_matched_random(14, 40, 2).unwrap();
        let g3 = generate_matched_random(16, 50, 3).unwrap();
        let gm = build_gram(
            &[g1, g2, g3],
            &["a".into(), "b".into(), "c".into()],
            None,
            4,
            Ridge::Auto,
        )
        .unwrap();
        let parsed = GramMatrix::parse_dense_csv(&gm.to_dense_csv()).unwrap();
        assert_eq!(parsed.names(), gm.names());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(parsed.get(i, j), gm.get(i, j));
            }
        }
    }

    #[test]
    fn precomputed_kernel_format() {
        let g1 = generate_matched_random(12, 30, 1).unwrap();
        let g2 = generate_matched_random(14, 40, 2).unwrap();
        let g3 = generate_matched_random(16, 50, 3).unwrap();
        let labels = vec!["social".to_string(), "random".to_string(), "social".to_string()];
        let gm = build_gram(
            &[g1, g2, g3],
            &["a".into(), "b".into(), "c".into()],
            Some(&labels),
            4,
            Ridge::Auto,
        )
        .unwrap();
        let text = gm.to_precomputed_kernel().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        for (i, line) in lines.iter().enumerate() {
            let fields: Vec<&str> = line.split(' ').collect();
            assert_eq!(fields.len(), 5); // label + index + 3 kernel values
            assert_eq!(fields[1], format!("0:{}", i + 1));
        }
        assert!(lines[0].starts_with("1 "));
        assert!(lines[1].starts_with("2 "));
        assert!(lines[2].starts_with("1 "));
    }

    #[test]
    fn precomputed_kernel_without_labels_fails() {
        let g1 = generate_matched_random(12, 30, 1).unwrap();
        let g2 = generate_matched_random(14, 40, 2).unwrap();
        let gm = build_gram(&[g1, g2], &["a".into(), "b".into()], None, 4, Ridge::Auto).unwrap();
        assert!(matches!(gm.to_precomputed_kernel(), Err(KernelError::MissingLabels)));
    }

    #[test]
    fn fixture_2x2_identity_like() {
        let gm = GramMatrix::from_fn(vec!["a".into(), "b".into()], None, |i, j| {
            Ok(if i == j { 1.0 } else { 0.0 })
        })
        .unwrap();
        assert_eq!(
            gm.to_dense_csv(),
            "a,b\n1.0000000000000000e0,0.0000000000000000e0\n0.0000000000000000e0,1.0000000000000000e0\n"
        );
    }

    proptest! {
        #[test]
        fn prop_similarity_symmetric_and_bounded(sa in 1u64..40, sb in 41u64..80) {
            let g1 = generate_matched_random(20, 20 + (sa % 100) as usize, sa).unwrap();
            let g2 = generate_matched_random(22, 25 + (sb % 100) as usize, sb).unwrap();
            let c1 = embed_graph(&g1, 4).unwrap();
            let c2 = embed_graph(&g2, 4).unwrap();
            let r = Ridge::Auto.resolve(&c1, &c2);
            let ab = bhattacharyya_similarity(&c1, &c2, r).unwrap();
            let ba = bhattacharyya_similarity(&c2, &c1, r).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(ab > 0.0 && ab <= 1.0);
        }
    }
}
