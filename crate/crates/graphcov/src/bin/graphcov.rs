//! Command-line front end: embedding, kernel export, baselines, synthetic
//! dataset generation, cross-validated classification, and the oracle
//! selftest.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use graphcov::baselines;
use graphcov::embedding::{embed_graph, DEFAULT_DEPTH};
use graphcov::graph::{
    self, extract_ego_network, generate_matched_random, parse_edge_list, EgoExtract, Permutation,
};
use graphcov::kernel::{build_gram, GramMatrix, Ridge};
use graphcov::oracle;
use graphcov::pipeline::{
    self, build_corpus, cross_validate, generate_social_vs_random, run_method_comparison,
    EvaluationReport, Method,
};

#[derive(Parser)]
#[command(name = "graphcov", about = "Covariance-descriptor graph kernel toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GramFormat {
    DenseCsv,
    PrecomputedKernel,
}

#[derive(Args)]
struct KernelOpts {
    /// Power-iteration depth.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    k: usize,
    /// Ridge regularization: "auto" (trace-scaled) or a nonnegative number.
    #[arg(long, default_value = "auto")]
    ridge: String,
}

impl KernelOpts {
    fn ridge(&self) -> Result<Ridge> {
        if self.ridge == "auto" {
            Ok(Ridge::Auto)
        } else {
            let v: f64 = self.ridge.parse().context("ridge must be \"auto\" or a number")?;
            if v < 0.0 {
                bail!("ridge must be nonnegative");
            }
            Ok(Ridge::Fixed(v))
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the covariance descriptor of one edge-list graph.
    Embed {
        #[command(flatten)]
        opts: KernelOpts,
        /// Edge-list file (SNAP convention: "u v" lines, '#' comments).
        file: PathBuf,
    },
    /// Build the Bhattacharyya Gram matrix over a manifest directory.
    Kernel {
        #[command(flatten)]
        opts: KernelOpts,
        #[arg(long, value_enum, default_value_t = GramFormat::DenseCsv)]
        format: GramFormat,
        /// Directory containing edge-list files and labels.csv.
        manifest: PathBuf,
    },
    /// Build a baseline Gram matrix over a manifest directory.
    Baseline {
        /// One of: subfreq3, subfreq4, subfreq5, eigs5, eigs10, rw.
        #[arg(long)]
        method: String,
        #[arg(long, value_enum, default_value_t = GramFormat::DenseCsv)]
        format: GramFormat,
        #[arg(long, default_value_t = baselines::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        manifest: PathBuf,
    },
    /// Extract the ego network of a node from an edge-list graph.
    EgoExtract {
        #[arg(long)]
        center: String,
        #[arg(long, default_value_t = 50)]
        min_degree: usize,
        file: PathBuf,
    },
    /// Generate a seeded Erdős–Rényi graph with exact edge count.
    GenRandom {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate the synthetic social-vs-random corpus as a manifest directory.
    GenSocial {
        /// Total number of graphs (even; half social, half matched random).
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for edge lists and labels.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated 1-NN classification with the proposed kernel.
    Classify {
        #[command(flatten)]
        opts: KernelOpts,
        #[arg(long, default_value_t = pipeline::DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = pipeline::DEFAULT_REPETITIONS)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit machine-readable CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
        manifest: PathBuf,
    },
    /// Compare several similarity methods on identical fold partitions.
    Compare {
        #[command(flatten)]
        opts: KernelOpts,
        /// Comma-separated method list, e.g. "proposed,subfreq3,eigs5".
        #[arg(long, default_value = "proposed,subfreq3,eigs5")]
        methods: String,
        #[arg(long, default_value_t = pipeline::DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = pipeline::DEFAULT_REPETITIONS)]
        reps: usize,
        #[arg(long, default_value_t = baselines::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: bool,
        manifest: PathBuf,
    },
    /// Run the brute-force oracle suite and print a pass/fail table.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Embed { opts, file } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let parsed = parse_edge_list(&text)?;
            warn_ingest(&file, parsed.self_loops_dropped, parsed.duplicates_merged);
            let c = embed_graph(&parsed.graph, opts.k)?;
            print!("{}", c.to_text());
        }
        Command::Kernel { opts, format, manifest } => {
            let set = build_corpus(&manifest)?;
            let gram = build_gram(&set.graphs, &set.names, Some(&set.labels), opts.k, opts.ridge()?)?;
            print_gram(&gram, format)?;
        }
        Command::Baseline {
            method,
            format,
            samples,
            seed,
            manifest,
        } => {
            let m = Method::parse(&method, DEFAULT_DEPTH, samples)
                .with_context(|| format!("unknown method \"{method}\""))?;
            let set = build_corpus(&manifest)?;
            let gram = pipeline::build_method_gram(&set, m, Ridge::Auto, seed)?;
            print_gram(&gram, format)?;
        }
        Command::EgoExtract { center, min_degree, file } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let parsed = parse_edge_list(&text)?;
            warn_ingest(&file, parsed.self_loops_dropped, parsed.duplicates_merged);
            match extract_ego_network(&parsed.graph, &center, min_degree)? {
                EgoExtract::Ego(ego) => print!("{}", ego.to_edge_list()),
                EgoExtract::BelowThreshold { degree } => {
                    println!("# below threshold: degree {degree} <= {min_degree}");
                }
            }
        }
        Command::GenRandom { nodes, edges, seed } => {
            let g = generate_matched_random(nodes, edges, seed)?;
            print!("{}", g.to_edge_list());
        }
        Command::GenSocial { count, seed, out } => {
            let set = generate_social_vs_random(count, seed)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut labels = String::new();
            for i in 0..set.len() {
                let file = format!("{}.txt", set.names[i]);
                std::fs::write(out.join(&file), set.graphs[i].to_edge_list())?;
                labels.push_str(&format!("{},{}\n", file, set.labels[i]));
            }
            std::fs::write(out.join("labels.csv"), labels)?;
            let stats = set.stats();
            let mean = |f: &dyn Fn(&graph::GraphStats) -> f64, label: &str| {
                let vals: Vec<f64> = stats
                    .iter()
                    .zip(&set.labels)
                    .filter(|(_, l)| l == &label)
                    .map(|(s, _)| f(s))
                    .collect();
                vals.iter().sum::<f64>() / vals.len() as f64
            };
            println!("wrote {} graphs to {}", set.len(), out.display());
            for label in ["social", "random"] {
                println!(
                    "{label}: mean n {:.2}, mean m {:.2}, mean clustering {:.4}",
                    mean(&|s| s.n as f64, label),
                    mean(&|s| s.m as f64, label),
                    mean(&|s| s.clustering_coefficient, label),
                );
            }
        }
        Command::Classify {
            opts,
            folds,
            reps,
            seed,
            csv,
            manifest,
        } => {
            let set = build_corpus(&manifest)?;
            let gram = build_gram(&set.graphs, &set.names, Some(&set.labels), opts.k, opts.ridge()?)?;
            let report = cross_validate(&gram, folds, reps, seed, &format!("proposed-k{}", opts.k))?;
            print_reports(&[report], folds, reps, csv);
        }
        Command::Compare {
            opts,
            methods,
            folds,
            reps,
            samples,
            seed,
            csv,
            manifest,
        } => {
            let parsed: Vec<Method> = methods
                .split(',')
                .map(|name| {
                    Method::parse(name.trim(), opts.k, samples)
                        .with_context(|| format!("unknown method \"{name}\""))
                })
                .collect::<Result<_>>()?;
            if parsed.is_empty() {
                bail!("no methods given");
            }
            let set = build_corpus(&manifest)?;
            let reports = run_method_comparison(&set, &parsed, folds, reps, seed, opts.ridge()?)?;
            print_reports(&reports, folds, reps, csv);
        }
        Command::Selftest { seed } => {
            if !run_selftest(seed) {
                std::process::exit(1);
            }
        }
    }
    Ok(())
}

fn warn_ingest(file: &std::path::Path, self_loops: usize, duplicates: usize) {
    if self_loops > 0 || duplicates > 0 {
        eprintln!(
            "warning: {}: dropped {self_loops} self-loops, merged {duplicates} duplicate edges",
            file.display()
        );
    }
}

fn print_gram(gram: &GramMatrix, format: GramFormat) -> Result<()> {
    match format {
        GramFormat::DenseCsv => print!("{}", gram.to_dense_csv()),
        GramFormat::PrecomputedKernel => print!("{}", gram.to_precomputed_kernel()?),
    }
    Ok(())
}

/// Accuracy columns go to stdout (stable under a fixed seed); wall-clock
/// timings vary run to run and therefore go to stderr.
fn print_reports(reports: &[EvaluationReport], folds: usize, reps: usize, csv: bool) {
    if csv {
        println!("method,mean_accuracy,std_error,folds,reps");
        for r in reports {
            println!(
                "{},{:.6},{:.6},{},{}",
                r.method, r.mean_accuracy, r.std_error, folds, reps
            );
        }
    } else {
        println!(
            "{:<16} {:>10} {:>10} {:>6} {:>6}",
            "method", "mean_acc", "std_err", "folds", "reps"
        );
        for r in reports {
            println!(
                "{:<16} {:>10.4} {:>10.4} {:>6} {:>6}",
                r.method, r.mean_accuracy, r.std_error, folds, reps
            );
        }
    }
    for r in reports {
        eprintln!(
            "timing: {} gram {:.3} s, eval {:.3} s",
            r.method, r.gram_seconds, r.eval_seconds
        );
    }
}

fn run_selftest(seed: u64) -> bool {
    use rand::SeedableRng;
    let mut all_pass = true;
    let mut check = |name: &str, pass: bool| {
        println!("{:<52} {}", name, if pass { "pass" } else { "FAIL" });
        all_pass &= pass;
    };

    let sizes: Vec<usize> = [3usize, 4, 5]
        .iter()
        .map(|&k| baselines::build_canonical_table(k).unwrap().class_count())
        .collect();
    check("canonical tables have 4/11/34 classes", sizes == vec![4, 11, 34]);

    let mut lemmas_ok = true;
    for i in 0..200u64 {
        let s = seed.wrapping_add(i);
        let n = 4 + (s % 9) as usize;
        let max = n * (n - 1) / 2;
        let m = 1 + (s as usize * 13) % max;
        let g = generate_matched_random(n, m, s).unwrap();
        lemmas_ok &= oracle::verify_lemmas(&g).unwrap().all_hold();
    }
    check("walk-sum identities exact on 200 random graphs", lemmas_ok);

    let mut spectral_ok = true;
    for i in 0..50u64 {
        let s = seed.wrapping_add(1000 + i);
        let n = 10 + (s % 41) as usize;
        let m = (n * (n - 1) / 4).max(2);
        let g = generate_matched_random(n, m, s).unwrap();
        if g.is_regular() {
            continue;
        }
        let fast = embed_graph(&g, 6).unwrap();
        let slow = oracle::closed_form_descriptor(&oracle::dense_spectral(&g).unwrap(), 6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let (a, b) = (fast.get(i, j), slow.get(i, j));
                spectral_ok &= (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0);
            }
        }
    }
    check("power iteration matches spectral closed form", spectral_ok);

    let mut invariance_ok = true;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
    for i in 0..50u64 {
        let s = seed.wrapping_add(2000 + i);
        let n = 10 + (s % 60) as usize;
        let m = (n * (n - 1) / 5).max(2);
        let g = generate_matched_random(n, m, s).unwrap();
        let p = Permutation::random(n, &mut rng);
        let h = graph::apply_permutation(&g, &p).unwrap();
        let d = embed_graph(&g, 5).unwrap().max_abs_diff(&embed_graph(&h, 5).unwrap());
        invariance_ok &= d <= 1e-9;
    }
    check("descriptor invariant under relabeling", invariance_ok);

    let t4 = baselines::build_canonical_table(4).unwrap();
    let mut census_ok = true;
    for i in 0..5u64 {
        let g = generate_matched_random(10, 22, seed.wrapping_add(3000 + i)).unwrap();
        let sampled = baselines::subgraph_histogram_sampled(&g, &t4, 200_000, seed.wrapping_add(i)).unwrap();
        let exact = oracle::exact_subgraph_census(&g, &t4).unwrap();
        census_ok &= sampled.linf_distance(&exact) <= 0.01;
    }
    check("sampled 4-node census matches exhaustive census", census_ok);

    let mut graphs = Vec::new();
    let mut names = Vec::new();
    for i in 0..30u64 {
        let s = seed.wrapping_add(4000 + i);
        let n = 10 + (s % 25) as usize;
        let m = (n * (n - 1) / 4).max(2);
        graphs.push(generate_matched_random(n, m, s).unwrap());
        names.push(format!("g{i}"));
    }
    let gram = build_gram(&graphs, &names, None, 5, Ridge::Auto).unwrap();
    check(
        "gram matrix positive semidefinite",
        gram.min_eigenvalue() >= -1e-8 * gram.size() as f64,
    );

    println!("{}", if all_pass { "selftest: all checks passed" } else { "selftest: FAILURES" });
    all_pass
}
