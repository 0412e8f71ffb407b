//! Sparse undirected graph model, edge-list ingestion, permutations,
//! statistics, and the seeded generators used by the synthetic tasks.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: malformed edge \"{text}\" (expected two whitespace-separated ids)")]
    MalformedLine { line: usize, text: String },
    #[error("graph has no edges")]
    NoEdges,
    #[error("permutation size {perm} does not match graph size {graph}")]
    PermutationSizeMismatch { perm: usize, graph: usize },
    #[error("not a permutation: index {0} appears more than once or is out of range")]
    NotAPermutation(u32),
    #[error("unknown node id \"{0}\"")]
    UnknownNode(String),
    #[error("edge count {m} out of range for {n} nodes (must satisfy 1 <= m <= n(n-1)/2)")]
    EdgeCountOutOfRange { n: usize, m: usize },
}

/// Immutable simple undirected graph with sorted neighbor lists.
///
/// Node ids from the input are kept in `ids`; dense indices are assigned
/// in order of first appearance so ingestion is deterministic.
#[derive(Debug, Clone)]
pub struct Graph {
    neighbors: Vec<Vec<u32>>,
    edge_count: usize,
    ids: Vec<String>,
}

/// Ingestion result: the graph plus counts of silently repaired input.
#[derive(Debug, Clone)]
pub struct ParsedEdgeList {
    pub graph: Graph,
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

impl Graph {
    /// Builds a graph from node ids and undirected edges given as dense
    /// index pairs. Self-loops are dropped and duplicates merged; the
    /// counts of both are returned alongside.
    pub fn from_edges(
        ids: Vec<String>,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<ParsedEdgeList, GraphError> {
        let n = ids.len();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut self_loops = 0usize;
        for (u, v) in edges {
            debug_assert!((u as usize) < n && (v as usize) < n);
            if u == v {
                self_loops += 1;
                continue;
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        let duplicates = before - pairs.len();
        if pairs.is_empty() {
            return Err(GraphError::NoEdges);
        }

        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &pairs {
            neighbors[u as usize].push(v);
            neighbors[v as usize].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(ParsedEdgeList {
            graph: Graph {
                neighbors,
                edge_count: pairs.len(),
                ids,
            },
            self_loops_dropped: self_loops,
            duplicates_merged: duplicates,
        })
    }

    /// Convenience constructor for graphs whose ids are just "0".."n-1".
    pub fn from_indexed_edges(
        n: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Graph, GraphError> {
        let ids = (0..n).map(|i| i.to_string()).collect();
        Ok(Graph::from_edges(ids, edges)?.graph)
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn node_id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Iterator over undirected edges as (u, v) with u < v, in dense order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(u, list)| {
            let u = u as u32;
            list.iter().copied().filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v as usize);
                }
            }
        }
        count == n
    }

    pub fn is_regular(&self) -> bool {
        let d = self.degree(0);
        (1..self.node_count()).all(|v| self.degree(v) == d)
    }

    /// SNAP-style edge-list serialization: one "u v" line per edge, using
    /// the original node ids, in dense index order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{} {}", self.ids[u as usize], self.ids[v as usize]);
        }
        out
    }
}

/// Parses SNAP-convention edge-list text: lines "u v", '#' comments ignored.
pub fn parse_edge_list(text: &str) -> Result<ParsedEdgeList, GraphError> {
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (a, b, rest) = (it.next(), it.next(), it.next());
        let (a, b) = match (a, b, rest) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(GraphError::MalformedLine {
                    line: lineno + 1,
                    text: trimmed.to_string(),
                })
            }
        };
        let mut intern = |tok: &str| -> u32 {
            if let Some(&i) = index.get(tok) {
                i
            } else {
                let i = ids.len() as u32;
                ids.push(tok.to_string());
                index.insert(tok.to_string(), i);
                i
            }
        };
        let u = intern(a);
        let v = intern(b);
        edges.push((u, v));
    }
    Graph::from_edges(ids, edges)
}

/// Bijection on [0, n); `map[i]` is the new index of old node `i`.
#[derive(Debug, Clone)]
pub struct Permutation {
    map: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Permutation {
        Permutation {
            map: (0..n as u32).collect(),
        }
    }

    pub fn from_vec(map: Vec<u32>) -> Result<Permutation, GraphError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            if (i as usize) >= n || seen[i as usize] {
                return Err(GraphError::NotAPermutation(i));
            }
            seen[i as usize] = true;
        }
        Ok(Permutation { map })
    }

    /// Uniformly random permutation (Fisher-Yates) from the given RNG.
    pub fn random(n: usize, rng: &mut impl Rng) -> Permutation {
        let mut map: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            map.swap(i, j);
        }
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i] as usize
    }
}

/// Relabels `g` under `p`: node i becomes node p(i).
pub fn apply_permutation(g: &Graph, p: &Permutation) -> Result<Graph, GraphError> {
    let n = g.node_count();
    if p.len() != n {
        return Err(GraphError::PermutationSizeMismatch {
            perm: p.len(),
            graph: n,
        });
    }
    let mut neighbors = vec![Vec::new(); n];
    let mut ids = vec![String::new(); n];
    for u in 0..n {
        let pu = p.apply(u);
        ids[pu] = g.node_id(u).to_string();
        let mut list: Vec<u32> = g.neighbors(u).iter().map(|&v| p.apply(v as usize) as u32).collect();
        list.sort_unstable();
        neighbors[pu] = list;
    }
    Ok(Graph {
        neighbors,
        edge_count: g.edge_count(),
        ids,
    })
}

/// Summary statistics; triangle count is exact (sorted-list intersections).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub degree_mean: f64,
    /// Population variance of the degree sequence (1/n convention).
    pub degree_variance: f64,
    /// Mean local clustering coefficient; nodes of degree < 2 contribute 0.
    pub clustering_coefficient: f64,
    pub triangle_count: u64,
}

pub fn compute_stats(g: &Graph) -> GraphStats {
    let n = g.node_count();
    let m = g.edge_count();

    let mut deg_sum: u64 = 0;
    let mut deg_sq_sum: u64 = 0;
    for v in 0..n {
        let d = g.degree(v) as u64;
        deg_sum += d;
        deg_sq_sum += d * d;
    }
    let nf = n as f64;
    let degree_mean = deg_sum as f64 / nf;
    let degree_variance = deg_sq_sum as f64 / nf - degree_mean * degree_mean;

    // Per-node triangle counts: each triangle {u,v,w} with u<v<w is found
    // once from edge (u,v) with common neighbor w>v.
    let mut tri_at = vec![0u64; n];
    let mut triangles: u64 = 0;
    for u in 0..n {
        for &v in g.neighbors(u) {
            let v = v as usize;
            if v <= u {
                continue;
            }
            for w in sorted_intersection_above(g.neighbors(u), g.neighbors(v), v as u32) {
                triangles += 1;
                tri_at[u] += 1;
                tri_at[v] += 1;
                tri_at[w as usize] += 1;
            }
        }
    }

    // Sorting the local coefficients before summing makes the sum
    // independent of node order, so stats are exactly permutation-invariant.
    let mut local: Vec<f64> = (0..n)
        .map(|v| {
            let d = g.degree(v) as f64;
            if d < 2.0 {
                0.0
            } else {
                2.0 * tri_at[v] as f64 / (d * (d - 1.0))
            }
        })
        .collect();
    local.sort_by(f64::total_cmp);
    let clustering_coefficient = local.iter().sum::<f64>() / nf;

    GraphStats {
        n,
        m,
        degree_mean,
        degree_variance,
        clustering_coefficient,
        triangle_count: triangles,
    }
}

fn sorted_intersection_above<'a>(a: &'a [u32], b: &'a [u32], min: u32) -> impl Iterator<Item = u32> + 'a {
    let mut i = a.partition_point(|&x| x <= min);
    let mut j = b.partition_point(|&x| x <= min);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let v = a[i];
                    i += 1;
                    j += 1;
                    return Some(v);
                }
            }
        }
        None
    })
}

/// Erdős–Rényi-style G(n, m): repeatedly adds a uniformly random absent
/// edge between distinct nodes until exactly `m` edges exist.
pub fn generate_matched_random(n: usize, m: usize, seed: u64) -> Result<Graph, GraphError> {
    if n < 2 || m < 1 || m > n * (n - 1) / 2 {
        return Err(GraphError::EdgeCountOutOfRange { n, m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: HashSet<(u32, u32)> = HashSet::with_capacity(m);
    while edges.len() < m {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u == v {
            continue;
        }
        edges.insert((u.min(v), u.max(v)));
    }
    let mut sorted: Vec<(u32, u32)> = edges.into_iter().collect();
    sorted.sort_unstable();
    Graph::from_indexed_edges(n, sorted)
}

/// Outcome of ego extraction: either the induced subgraph or a signal
/// that the center's degree did not clear the threshold.
#[derive(Debug)]
pub enum EgoExtract {
    Ego(Graph),
    BelowThreshold { degree: usize },
}

/// Induced subgraph on `{center} ∪ neighbors(center)`, kept only when
/// degree(center) > min_degree. The center node is included.
pub fn extract_ego_network(g: &Graph, center: &str, min_degree: usize) -> Result<EgoExtract, GraphError> {
    let c = g
        .index_of(center)
        .ok_or_else(|| GraphError::UnknownNode(center.to_string()))?;
    if g.degree(c) <= min_degree {
        return Ok(EgoExtract::BelowThreshold { degree: g.degree(c) });
    }
    let mut nodes: Vec<u32> = g.neighbors(c).to_vec();
    nodes.push(c as u32);
    nodes.sort_unstable();
    let local: HashMap<u32, u32> = nodes.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let ids: Vec<String> = nodes.iter().map(|&v| g.node_id(v as usize).to_string()).collect();
    let mut edges = Vec::new();
    for &u in &nodes {
        for &v in g.neighbors(u as usize) {
            if u < v {
                if let Some(&lv) = local.get(&v) {
                    edges.push((local[&u], lv));
                }
            }
        }
    }
    Ok(EgoExtract::Ego(Graph::from_edges(ids, edges)?.graph))
}
