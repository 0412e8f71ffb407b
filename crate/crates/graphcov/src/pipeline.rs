//! Dataset assembly, the synthetic social-vs-random task, and the
//! cross-validation harness with a 1-NN kernel classifier.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::baselines::{self, BaselineError};
use crate::graph::{self, Graph, GraphError, GraphStats};
use crate::kernel::{build_gram, GramMatrix, KernelError, Ridge};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_REPETITIONS: usize = 10;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("manifest error for \"{entry}\": {reason}")]
    Manifest { entry: String, reason: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("graph \"{name}\": {source}")]
    Graph {
        name: String,
        #[source]
        source: GraphError,
    },
    #[error("corpus size {0} invalid (need an even count >= 2)")]
    BadCorpusSize(usize),
    #[error("class \"{label}\" has {count} members, fewer than {folds} folds")]
    ClassSmallerThanFolds {
        label: String,
        count: usize,
        folds: usize,
    },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("classification needs at least 2 distinct labels")]
    SingleClass,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

/// A graph collection with parallel name and class-label lists.
#[derive(Debug, Clone)]
pub struct LabeledGraphSet {
    pub graphs: Vec<Graph>,
    pub labels: Vec<String>,
    pub names: Vec<String>,
}

impl LabeledGraphSet {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn stats(&self) -> Vec<GraphStats> {
        self.graphs.iter().map(graph::compute_stats).collect()
    }
}

/// Loads a manifest directory: edge-list files plus a `labels.csv` of
/// lines "filename,label". Entry order follows the labels file.
pub fn build_corpus(dir: &Path) -> Result<LabeledGraphSet, PipelineError> {
    let labels_path = dir.join("labels.csv");
    let text = std::fs::read_to_string(&labels_path).map_err(|source| PipelineError::Io {
        path: labels_path.clone(),
        source,
    })?;
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    let mut names = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (file, label) = line.split_once(',').ok_or_else(|| PipelineError::Manifest {
            entry: line.to_string(),
            reason: "expected \"filename,label\"".into(),
        })?;
        let path = dir.join(file.trim());
        let body = std::fs::read_to_string(&path).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?;
        let parsed = graph::parse_edge_list(&body).map_err(|source| PipelineError::Graph {
            name: file.trim().to_string(),
            source,
        })?;
        graphs.push(parsed.graph);
        labels.push(label.trim().to_string());
        names.push(file.trim().to_string());
    }
    if graphs.is_empty() {
        return Err(PipelineError::Manifest {
            entry: labels_path.display().to_string(),
            reason: "no entries".into(),
        });
    }
    Ok(LabeledGraphSet { graphs, labels, names })
}

/// Triangle-rich synthetic ego-style graph: preferential attachment with
/// triadic-closure edges (new nodes wire into a neighbor's neighborhood).
pub fn generate_social_graph(n: usize, attach: usize, rng: &mut impl Rng) -> Graph {
    assert!(n >= 5);
    let seed_clique = 4usize.min(n);
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut endpoints: Vec<u32> = Vec::new(); // degree-weighted sampling pool
    let add_edge = |adj: &mut Vec<Vec<u32>>,
                        edges: &mut Vec<(u32, u32)>,
                        endpoints: &mut Vec<u32>,
                        u: u32,
                        v: u32|
     -> bool {
        if u == v || adj[u as usize].contains(&v) {
            return false;
        }
        adj[u as usize].push(v);
        adj[v as usize].push(u);
        edges.push((u, v));
        endpoints.push(u);
        endpoints.push(v);
        true
    };
    for i in 0..seed_clique as u32 {
        for j in (i + 1)..seed_clique as u32 {
            add_edge(&mut adj, &mut edges, &mut endpoints, i, j);
        }
    }
    for v in seed_clique as u32..n as u32 {
        // anchor chosen degree-weighted, then close triangles inside the
        // anchor's neighborhood
        let anchor = endpoints[rng.gen_range(0..endpoints.len())];
        add_edge(&mut adj, &mut edges, &mut endpoints, v, anchor);
        let mut placed = 1;
        let mut attempts = 0;
        while placed < attach && attempts < attach * 8 {
            attempts += 1;
            let closure = rng.gen_bool(0.8);
            let target = if closure && !adj[anchor as usize].is_empty() {
                adj[anchor as usize][rng.gen_range(0..adj[anchor as usize].len())]
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            if add_edge(&mut adj, &mut edges, &mut endpoints, v, target) {
                placed += 1;
            }
        }
    }
    Graph::from_indexed_edges(n, edges).expect("generator produced at least one edge")
}

/// Builds the synthetic SOCIAL task: half triangle-rich graphs, half
/// Erdős–Rényi graphs matched per pair on (n, m). Labels are
/// "social" / "random".
pub fn generate_social_vs_random(n_graphs: usize, seed: u64) -> Result<LabeledGraphSet, PipelineError> {
    if n_graphs < 2 || n_graphs % 2 != 0 {
        return Err(PipelineError::BadCorpusSize(n_graphs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = Vec::with_capacity(n_graphs);
    let mut labels = Vec::with_capacity(n_graphs);
    let mut names = Vec::with_capacity(n_graphs);
    let pairs = n_graphs / 2;
    for i in 0..pairs {
        let n = rng.gen_range(50..=90);
        let attach = rng.gen_range(6..=10);
        let social = generate_social_graph(n, attach, &mut rng);
        let matched = graph::generate_matched_random(
            social.node_count(),
            social.edge_count(),
            rng.gen::<u64>(),
        )
        .map_err(|source| PipelineError::Graph {
            name: format!("random_{i:03}"),
            source,
        })?;
        graphs.push(social);
        labels.push("social".to_string());
        names.push(format!("social_{i:03}"));
        graphs.push(matched);
        labels.push("random".to_string());
        names.push(format!("random_{i:03}"));
    }
    Ok(LabeledGraphSet { graphs, labels, names })
}

/// Per-method evaluation summary over repeated stratified cross-validation.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub method: String,
    /// Accuracy of every individual fold, reps × folds entries.
    pub fold_accuracies: Vec<f64>,
    /// Overall accuracy of each repetition.
    pub rep_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Sample std of the repetition accuracies over √reps.
    pub std_error: f64,
    pub gram_seconds: f64,
    pub eval_seconds: f64,
}

/// Stratified fold assignment: per label, shuffled indices are dealt
/// round-robin, so per-fold class counts differ by at most one.
fn stratified_folds(
    labels: &[String],
    folds: usize,
    rng: &mut impl Rng,
) -> Result<Vec<usize>, PipelineError> {
    let mut by_label: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        match by_label.iter_mut().find(|(name, _)| name == l) {
            Some((_, v)) => v.push(i),
            None => by_label.push((l.clone(), vec![i])),
        }
    }
    let mut assignment = vec![0usize; labels.len()];
    for (label, mut members) in by_label {
        if members.len() < folds {
            return Err(PipelineError::ClassSmallerThanFolds {
                label,
                count: members.len(),
                folds,
            });
        }
        for i in (1..members.len()).rev() {
            let j = rng.gen_range(0..=i);
            members.swap(i, j);
        }
        for (pos, idx) in members.into_iter().enumerate() {
            assignment[idx] = pos % folds;
        }
    }
    Ok(assignment)
}

/// Repeated stratified k-fold evaluation of a labeled Gram matrix with a
/// 1-nearest-neighbor classifier in the kernel-induced distance.
pub fn cross_validate(
    gram: &GramMatrix,
    folds: usize,
    repetitions: usize,
    seed: u64,
    method: &str,
) -> Result<EvaluationReport, PipelineError> {
    let labels = gram.labels().ok_or(KernelError::MissingLabels)?;
    if folds < 2 {
        return Err(PipelineError::TooFewFolds(folds));
    }
    let distinct: std::collections::HashSet<&String> = labels.iter().collect();
    if distinct.len() < 2 {
        return Err(PipelineError::SingleClass);
    }
    let n = gram.size();
    let start = Instant::now();
    let mut fold_accuracies = Vec::with_capacity(folds * repetitions);
    let mut rep_accuracies = Vec::with_capacity(repetitions);
    for rep in 0..repetitions {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep as u64));
        let assignment = stratified_folds(labels, folds, &mut rng)?;
        let mut rep_correct = 0usize;
        for fold in 0..folds {
            let mut correct = 0usize;
            let mut total = 0usize;
            for i in 0..n {
                if assignment[i] != fold {
                    continue;
                }
                let mut best: Option<(f64, usize)> = None;
                for j in 0..n {
                    if assignment[j] == fold {
                        continue;
                    }
                    let d = gram.squared_distance(i, j);
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, j));
                    }
                }
                let predicted = &labels[best.expect("nonempty training set").1];
                total += 1;
                if predicted == &labels[i] {
                    correct += 1;
                }
            }
            fold_accuracies.push(correct as f64 / total as f64);
            rep_correct += correct;
        }
        rep_accuracies.push(rep_correct as f64 / n as f64);
    }
    let eval_seconds = start.elapsed().as_secs_f64();
    let mean = rep_accuracies.iter().sum::<f64>() / repetitions as f64;
    let std_error = if repetitions > 1 {
        let var = rep_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>()
            / (repetitions as f64 - 1.0);
        var.sqrt() / (repetitions as f64).sqrt()
    } else {
        0.0
    };
    Ok(EvaluationReport {
        method: method.to_string(),
        fold_accuracies,
        rep_accuracies,
        mean_accuracy: mean,
        std_error,
        gram_seconds: 0.0,
        eval_seconds,
    })
}

/// A similarity method that can produce a Gram matrix over a corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Covariance-descriptor Bhattacharyya kernel at the given depth.
    Proposed { k: usize },
    /// Induced-subgraph frequency inner product; κ=3 is exact, 4/5 sampled.
    SubFreq { kappa: usize, samples: usize },
    /// Cosine similarity of the top-k adjacency eigenvalues.
    Eigs { k: usize },
    /// Random-walk similarity with the convergence-safe default decay.
    RandomWalk,
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Proposed { k } => format!("proposed-k{k}"),
            Method::SubFreq { kappa, .. } => format!("subfreq{kappa}"),
            Method::Eigs { k } => format!("eigs{k}"),
            Method::RandomWalk => "rw".to_string(),
        }
    }

    /// Parses the CLI method names: proposed, subfreq3/4/5, eigs5/10, rw.
    pub fn parse(name: &str, k: usize, samples: usize) -> Option<Method> {
        match name {
            "proposed" => Some(Method::Proposed { k }),
            "subfreq3" => Some(Method::SubFreq { kappa: 3, samples }),
            "subfreq4" => Some(Method::SubFreq { kappa: 4, samples }),
            "subfreq5" => Some(Method::SubFreq { kappa: 5, samples }),
            "eigs5" => Some(Method::Eigs { k: 5 }),
            "eigs10" => Some(Method::Eigs { k: 10 }),
            "rw" => Some(Method::RandomWalk),
            _ => None,
        }
    }
}

/// Builds the Gram matrix of `method` over the corpus. Per-graph features
/// are computed once; sampling seeds derive from `seed` and the graph index.
pub fn build_method_gram(
    set: &LabeledGraphSet,
    method: Method,
    ridge: Ridge,
    seed: u64,
) -> Result<GramMatrix, PipelineError> {
    let names = set.names.clone();
    let labels = Some(set.labels.clone());
    match method {
        Method::Proposed { k } => {
            Ok(build_gram(&set.graphs, &set.names, Some(&set.labels), k, ridge)?)
        }
        Method::SubFreq { kappa, samples } => {
            let hists = if kappa == 3 {
                set.graphs
                    .iter()
                    .map(baselines::subgraph_histogram_exact)
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                let table = baselines::build_canonical_table(kappa)?;
                set.graphs
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        baselines::subgraph_histogram_sampled(
                            g,
                            &table,
                            samples,
                            seed.wrapping_add(i as u64),
                        )
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            let gm = GramMatrix::from_fn(names, labels, |i, j| {
                Ok(baselines::histogram_similarity(&hists[i], &hists[j])
                    .expect("uniform kappa within corpus"))
            })?;
            Ok(gm)
        }
        Method::Eigs { k } => {
            let specs: Vec<Vec<f64>> = set.graphs.iter().map(|g| baselines::top_eigenvalues(g, k)).collect();
            Ok(GramMatrix::from_fn(names, labels, |i, j| {
                Ok(baselines::eigs_similarity(&specs[i], &specs[j]))
            })?)
        }
        Method::RandomWalk => {
            let mut cache: HashMap<(usize, usize), f64> = HashMap::new();
            for i in 0..set.len() {
                for j in i..set.len() {
                    let d = baselines::default_rw_decay(&set.graphs[i], &set.graphs[j]);
                    let v = baselines::random_walk_similarity(
                        &set.graphs[i],
                        &set.graphs[j],
                        d,
                        1e-10,
                        10_000,
                    )?;
                    cache.insert((i, j), v);
                }
            }
            Ok(GramMatrix::from_fn(names, labels, |i, j| {
                Ok(cache[&(i.min(j), i.max(j))])
            })?)
        }
    }
}

/// Evaluates every method on the identical fold partitions (shared seed).
pub fn run_method_comparison(
    set: &LabeledGraphSet,
    methods: &[Method],
    folds: usize,
    repetitions: usize,
    seed: u64,
    ridge: Ridge,
) -> Result<Vec<EvaluationReport>, PipelineError> {
    let mut reports = Vec::with_capacity(methods.len());
    for &method in methods {
        let t0 = Instant::now();
        let gram = build_method_gram(set, method, ridge, seed)?;
        let gram_seconds = t0.elapsed().as_secs_f64();
        let mut report = cross_validate(&gram, folds, repetitions, seed, &method.name())?;
        report.gram_seconds = gram_seconds;
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::compute_stats;
    use crate::kernel::GramMatrix;

    #[test]
    fn corpus_from_manifest() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "0 1\n1 2\n").unwrap();
        std::fs::write(dir.path().join("b.txt"), "0 1\n0 2\n1 2\n").unwrap();
        std::fs::write(dir.path().join("labels.csv"), "a.txt,path\nb.txt,tri\n").unwrap();
        let set = build_corpus(dir.path()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.labels, vec!["path", "tri"]);
        assert_eq!(set.graphs[1].edge_count(), 3);
    }

    #[test]
    fn corpus_missing_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("labels.csv"), "missing.txt,x\n").unwrap();
        assert!(matches!(build_corpus(dir.path()), Err(PipelineError::Io { .. })));
    }

    #[test]
    fn social_corpus_structure() {
        let set = generate_social_vs_random(20, 1).unwrap();
        assert_eq!(set.len(), 20);
        let social: Vec<usize> = (0..20).filter(|&i| set.labels[i] == "social").collect();
        assert_eq!(social.len(), 10);
        // each consecutive pair matched on (n, m)
        for i in (0..20).step_by(2) {
            assert_eq!(set.graphs[i].node_count(), set.graphs[i + 1].node_count());
            assert_eq!(set.graphs[i].edge_count(), set.graphs[i + 1].edge_count());
        }
        assert!(generate_social_vs_random(7, 0).is_err());
    }

    #[test]
    fn social_half_has_higher_clustering() {
        let set = generate_social_vs_random(30, 2).unwrap();
        let mut social = Vec::new();
        let mut random = Vec::new();
        for (g, l) in set.graphs.iter().zip(&set.labels) {
            let cc = compute_stats(g).clustering_coefficient;
            if l == "social" {
                social.push(cc);
            } else {
                random.push(cc);
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&social) > mean(&random) + 0.15,
            "clustering contrast too small: {} vs {}",
            mean(&social),
            mean(&random)
        );
    }

    #[test]
    fn deterministic_generation() {
        let a = generate_social_vs_random(10, 42).unwrap();
        let b = generate_social_vs_random(10, 42).unwrap();
        for (x, y) in a.graphs.iter().zip(&b.graphs) {
            assert_eq!(x.to_edge_list(), y.to_edge_list());
        }
    }

    fn block_gram(n_per_class: usize, cross: f64) -> GramMatrix {
        let n = 2 * n_per_class;
        let labels: Vec<String> = (0..n)
            .map(|i| if i < n_per_class { "a".into() } else { "b".into() })
            .collect();
        let names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
        GramMatrix::from_fn(names, Some(labels), |i, j| {
            let same = (i < n_per_class) == (j < n_per_class);
            Ok(if i == j {
                1.0
            } else if same {
                0.9
            } else {
                cross
            })
        })
        .unwrap()
    }

    #[test]
    fn block_diagonal_gram_classifies_perfectly() {
        let gram = block_gram(20, 0.05);
        let report = cross_validate(&gram, 10, 5, 7, "block").unwrap();
        assert_eq!(report.mean_accuracy, 1.0);
        assert_eq!(report.std_error, 0.0);
    }

    #[test]
    fn shuffled_labels_near_chance() {
        // within-class and cross-class similarities identical -> geometry
        // carries no signal; accuracy should hover around 0.5
        let n = 60;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let labels: Vec<String> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { "a".into() } else { "b".into() })
            .collect();
        // force both classes populated enough for 5 folds
        let mut labels = labels;
        for i in 0..10 {
            labels[i] = "a".into();
            labels[n - 1 - i] = "b".into();
        }
        let names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
        let mut vals = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let v = if i == j { 1.0 } else { 0.5 + 0.01 * ((i * 31 + j * 17) % 13) as f64 / 13.0 };
                vals[i * n + j] = v;
                vals[j * n + i] = v;
            }
        }
        let gram = GramMatrix::from_fn(names, Some(labels), |i, j| Ok(vals[i * n + j])).unwrap();
        let report = cross_validate(&gram, 5, 10, 11, "noise").unwrap();
        assert!(
            (report.mean_accuracy - 0.5).abs() < 0.2,
            "expected chance level, got {}",
            report.mean_accuracy
        );
    }

    #[test]
    fn cv_error_paths() {
        let gram = block_gram(3, 0.0);
        assert!(matches!(
            cross_validate(&gram, 10, 2, 0, "x"),
            Err(PipelineError::ClassSmallerThanFolds { .. })
        ));
        assert!(matches!(
            cross_validate(&gram, 1, 2, 0, "x"),
            Err(PipelineError::TooFewFolds(1))
        ));
    }

    #[test]
    fn stratification_is_balanced() {
        let labels: Vec<String> = (0..50)
            .map(|i| if i % 5 == 0 { "rare".into() } else { "common".into() })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let assignment = stratified_folds(&labels, 5, &mut rng).unwrap();
        for fold in 0..5 {
            let rare = labels
                .iter()
                .zip(&assignment)
                .filter(|(l, &f)| *l == "rare" && f == fold)
                .count();
            assert_eq!(rare, 2); // 10 rare items over 5 folds
        }
    }

    #[test]
    fn se_formula_hand_computed() {
        // three reps with accuracies 0.5, 0.75, 1.0:
        // mean 0.75, sample std 0.25, SE = 0.25/sqrt(3)
        let accs = [0.5f64, 0.75, 1.0];
        let mean = accs.iter().sum::<f64>() / 3.0;
        let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 2.0;
        let se = var.sqrt() / 3f64.sqrt();
        assert!((mean - 0.75).abs() < 1e-15);
        assert!((se - 0.25 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn comparison_runs_and_orders_methods() {
        let set = generate_social_vs_random(24, 5).unwrap();
        let reports = run_method_comparison(
            &set,
            &[Method::Proposed { k: 4 }, Method::SubFreq { kappa: 3, samples: 0 }],
            4,
            2,
            9,
            Ridge::Auto,
        )
        .unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].method, "proposed-k4");
        assert_eq!(reports[1].method, "subfreq3");
        for r in &reports {
            assert!(r.mean_accuracy >= 0.0 && r.mean_accuracy <= 1.0);
            assert_eq!(r.fold_accuracies.len(), 8);
        }
    }

    #[test]
    fn evaluation_deterministic_for_fixed_seed() {
        let set = generate_social_vs_random(16, 8).unwrap();
        let gram = build_method_gram(&set, Method::Proposed { k: 4 }, Ridge::Auto, 1).unwrap();
        let a = cross_validate(&gram, 4, 3, 5, "m").unwrap();
        let b = cross_validate(&gram, 4, 3, 5, "m").unwrap();
        assert_eq!(a.fold_accuracies, b.fold_accuracies);
        assert_eq!(a.mean_accuracy, b.mean_accuracy);
    }
}
