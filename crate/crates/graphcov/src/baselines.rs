//! Competing similarity measures: induced-subgraph frequency histograms
//! (κ = 3, 4, 5), top-k adjacency eigenvalues, and the random-walk
//! similarity from the Sylvester fixed point.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Graph;

pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("subgraph size {0} unsupported (must be 3, 4, or 5)")]
    UnsupportedKappa(usize),
    #[error("graph has {n} nodes, fewer than subgraph size {kappa}")]
    GraphTooSmall { n: usize, kappa: usize },
    #[error("histogram size mismatch: {0} vs {1}")]
    KappaMismatch(usize, usize),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("random-walk decay {0} outside (0, 1)")]
    BadDecay(f64),
    #[error("random-walk iteration did not converge in {0} steps: decay too large for spectral radii")]
    NonConvergence(usize),
}

/// Maps every labeled κ-node graph (as an upper-triangular adjacency
/// bit-string) to its isomorphism class. Classes are canonical forms in
/// ascending lexicographic order; there are 4 / 11 / 34 of them for
/// κ = 3 / 4 / 5.
#[derive(Debug, Clone)]
pub struct CanonicalTable {
    kappa: usize,
    class_of: Vec<u16>,
    canonical_forms: Vec<u32>,
}

/// Bit position of pair (i, j), i < j, such that integer comparison of
/// masks equals lexicographic comparison of the pair sequence
/// (0,1),(0,2),...,(κ-2,κ-1).
fn pair_bit(kappa: usize, i: usize, j: usize) -> u32 {
    debug_assert!(i < j && j < kappa);
    let npairs = kappa * (kappa - 1) / 2;
    let index = i * kappa - i * (i + 1) / 2 + (j - i - 1);
    (npairs - 1 - index) as u32
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out
}

pub fn build_canonical_table(kappa: usize) -> Result<CanonicalTable, BaselineError> {
    if !(3..=5).contains(&kappa) {
        return Err(BaselineError::UnsupportedKappa(kappa));
    }
    let npairs = kappa * (kappa - 1) / 2;
    let perms = permutations(kappa);
    let masks = 1usize << npairs;

    let canon = |mask: u32| -> u32 {
        let mut best = u32::MAX;
        for p in &perms {
            let mut pm = 0u32;
            for i in 0..kappa {
                for j in (i + 1)..kappa {
                    if mask & (1 << pair_bit(kappa, i, j)) != 0 {
                        let (a, b) = (p[i].min(p[j]), p[i].max(p[j]));
                        pm |= 1 << pair_bit(kappa, a, b);
                    }
                }
            }
            best = best.min(pm);
        }
        best
    };

    let canonical: Vec<u32> = (0..masks).map(|m| canon(m as u32)).collect();
    let mut forms: Vec<u32> = canonical.clone();
    forms.sort_unstable();
    forms.dedup();
    let class_of = canonical
        .iter()
        .map(|c| forms.binary_search(c).unwrap() as u16)
        .collect();
    Ok(CanonicalTable {
        kappa,
        class_of,
        canonical_forms: forms,
    })
}

impl CanonicalTable {
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn class_count(&self) -> usize {
        self.canonical_forms.len()
    }

    pub fn class_of_mask(&self, mask: u32) -> usize {
        self.class_of[mask as usize] as usize
    }

    /// Class of the subgraph induced by `nodes` (distinct indices of `g`).
    pub fn classify_subset(&self, g: &Graph, nodes: &[usize]) -> usize {
        debug_assert_eq!(nodes.len(), self.kappa);
        let mut mask = 0u32;
        for i in 0..self.kappa {
            for j in (i + 1)..self.kappa {
                if g.has_edge(nodes[i], nodes[j]) {
                    mask |= 1 << pair_bit(self.kappa, i, j);
                }
            }
        }
        self.class_of_mask(mask)
    }
}

/// Normalized frequency vector over isomorphism classes of κ-node
/// induced subgraphs.
#[derive(Debug, Clone)]
pub struct SubgraphHistogram {
    kappa: usize,
    counts: Vec<u64>,
    frequencies: Vec<f64>,
}

impl SubgraphHistogram {
    pub fn from_counts(kappa: usize, counts: Vec<u64>, total: u64) -> SubgraphHistogram {
        let frequencies = counts.iter().map(|&c| c as f64 / total as f64).collect();
        SubgraphHistogram { kappa, counts, frequencies }
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn linf_distance(&self, other: &SubgraphHistogram) -> f64 {
        self.frequencies
            .iter()
            .zip(&other.frequencies)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Exact κ=3 census over all C(n,3) triples, via triangle counts and
/// degree identities (classes: empty, one-edge, path, triangle).
pub fn subgraph_histogram_exact(g: &Graph) -> Result<SubgraphHistogram, BaselineError> {
    let n = g.node_count();
    if n < 3 {
        return Err(BaselineError::GraphTooSmall { n, kappa: 3 });
    }
    let m = g.edge_count() as u64;
    let stats = crate::graph::compute_stats(g);
    let triangles = stats.triangle_count;
    // triples with exactly two edges: wedges not closed into triangles
    let wedges: u64 = (0..n)
        .map(|v| {
            let d = g.degree(v) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    let two_edge = wedges - 3 * triangles;
    // (edge, third node) incidences: triangle counted 3x, two-edge 2x, one-edge 1x
    let one_edge = m * (n as u64 - 2) - 3 * triangles - 2 * two_edge;
    let total = (n as u64) * (n as u64 - 1) * (n as u64 - 2) / 6;
    let empty = total - triangles - two_edge - one_edge;
    Ok(SubgraphHistogram::from_counts(
        3,
        vec![empty, one_edge, two_edge, triangles],
        total,
    ))
}

/// Monte-Carlo census for κ ∈ {4, 5}: each sample draws κ distinct nodes
/// uniformly, classifies the induced subgraph, and the histogram is
/// normalized by the sample count. Deterministic per seed.
pub fn subgraph_histogram_sampled(
    g: &Graph,
    table: &CanonicalTable,
    samples: usize,
    seed: u64,
) -> Result<SubgraphHistogram, BaselineError> {
    let n = g.node_count();
    let kappa = table.kappa();
    if n < kappa {
        return Err(BaselineError::GraphTooSmall { n, kappa });
    }
    if samples < 1 {
        return Err(BaselineError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; table.class_count()];
    let mut nodes = vec![0usize; kappa];
    for _ in 0..samples {
        // κ distinct nodes by rejection; κ ≤ 5 so collisions are cheap
        let mut filled = 0;
        while filled < kappa {
            let v = rng.gen_range(0..n);
            if !nodes[..filled].contains(&v) {
                nodes[filled] = v;
                filled += 1;
            }
        }
        counts[table.classify_subset(g, &nodes)] += 1;
    }
    Ok(SubgraphHistogram::from_counts(kappa, counts, samples as u64))
}

/// Plain dot product of the normalized frequency vectors.
pub fn histogram_similarity(
    h1: &SubgraphHistogram,
    h2: &SubgraphHistogram,
) -> Result<f64, BaselineError> {
    if h1.kappa() != h2.kappa() {
        return Err(BaselineError::KappaMismatch(h1.kappa(), h2.kappa()));
    }
    Ok(h1
        .frequencies()
        .iter()
        .zip(h2.frequencies())
        .map(|(a, b)| a * b)
        .sum())
}

/// k algebraically largest adjacency eigenvalues, descending, zero-padded
/// when n < k. Dense symmetric eigensolver.
pub fn top_eigenvalues(g: &Graph, k: usize) -> Vec<f64> {
    let n = g.node_count();
    let a = DMatrix::from_fn(n, n, |i, j| if g.has_edge(i, j) { 1.0 } else { 0.0 });
    let mut eigs: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.total_cmp(a));
    eigs.resize(k.max(eigs.len()), 0.0);
    eigs.truncate(k);
    eigs
}

/// Cosine similarity of eigenvalue vectors; 0 when either norm vanishes.
pub fn eigs_similarity(v1: &[f64], v2: &[f64]) -> f64 {
    assert_eq!(v1.len(), v2.len());
    let dot: f64 = v1.iter().zip(v2).map(|(a, b)| a * b).sum();
    let n1: f64 = v1.iter().map(|a| a * a).sum::<f64>().sqrt();
    let n2: f64 = v2.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        0.0
    } else {
        dot / (n1 * n2)
    }
}

/// Power-iteration estimate of the spectral radius of the adjacency matrix.
pub fn spectral_radius_estimate(g: &Graph, iters: usize) -> f64 {
    let n = g.node_count();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..iters {
        let mut y = vec![0.0; n];
        for u in 0..n {
            for &v in g.neighbors(u) {
                y[u] += x[v as usize];
            }
        }
        let norm: f64 = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        for v in &mut y {
            *v /= norm;
        }
        x = y;
    }
    lambda
}

/// Convergence-safe default decay: min(0.1, 0.5/(λ̂₁(A)·λ̂₁(B))).
pub fn default_rw_decay(a: &Graph, b: &Graph) -> f64 {
    let la = spectral_radius_estimate(a, 30).max(1e-9);
    let lb = spectral_radius_estimate(b, 30).max(1e-9);
    (0.5 / (la * lb)).min(0.1)
}

/// Random-walk similarity: fixed-point iteration of
/// M ← decay·AᵀMB + eeᵀ from M⁰ = eeᵀ, returning eᵀMe/(n₁n₂).
pub fn random_walk_similarity(
    a: &Graph,
    b: &Graph,
    decay: f64,
    tol: f64,
    max_iters: usize,
) -> Result<f64, BaselineError> {
    if !(0.0..1.0).contains(&decay) || decay <= 0.0 {
        return Err(BaselineError::BadDecay(decay));
    }
    let (n1, n2) = (a.node_count(), b.node_count());
    let mut m = DMatrix::from_element(n1, n2, 1.0);
    for _ in 0..max_iters {
        // Y = A M (A symmetric), then Z = Y B, via neighbor lists
        let mut y: DMatrix<f64> = DMatrix::zeros(n1, n2);
        for u in 0..n1 {
            for &v in a.neighbors(u) {
                for c in 0..n2 {
                    y[(u, c)] += m[(v as usize, c)];
                }
            }
        }
        let mut next = DMatrix::from_element(n1, n2, 1.0);
        for l in 0..n2 {
            for &q in b.neighbors(l) {
                for r in 0..n1 {
                    next[(r, l)] += decay * y[(r, q as usize)];
                }
            }
        }
        let diff = (&next - &m).amax();
        m = next;
        if diff < tol {
            let total: f64 = m.iter().sum();
            return Ok(total / (n1 as f64 * n2 as f64));
        }
    }
    Err(BaselineError::NonConvergence(max_iters))
}
