//! `duke`: weighted k-center subset selection from the command line.
//!
//! Reports go to `--out` or standard output; diagnostics go to standard
//! error as a single `error kind=... message=...` line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use duke::report::fmt_indices;
use duke::verify::replay;
use duke::{
    build_knn_graph, default_lambda, gamma_bounds, gamma_grid, gamma_search_with, generate,
    greedy_kcenter, load_embeddings, load_probabilities, load_weights, make_partition,
    margin_select, margin_weights, parallel_weighted_kcenter, random_select, run_bench, run_verify,
    submodular_greedy, weighted_kcenter, weighted_kcenter_pq, write_csv, Algorithm, BenchConfig,
    DistanceMetric, EmbeddingSet, Error, Execution, Format, InstanceKind, LoadOptions,
    Neighborhood, Oracle, PartitionStrategy, Report, Scoring, SelectionConfig, SubsetSolution,
    SyntheticSpec, VerifyConfig, WeightScheme, WeightVector, DEFAULT_LAMBDA_S, DEFAULT_SUBSET_CAP,
    ROW_SUM_TOLERANCE,
};

#[derive(Parser)]
#[command(name = "duke", version, about = "Weighted k-center subset selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a subset with one of the selectors or baselines.
    Select(SelectArgs),
    /// Solve a small instance exactly.
    Oracle(OracleArgs),
    /// Check the approximation guarantees on random small instances.
    Verify(VerifyArgs),
    /// Time the selector across a ladder of instance sizes.
    Bench(BenchArgs),
    /// Write a synthetic instance as CSV.
    Gen(GenArgs),
    /// Export the k-nearest-neighbor graph of an embedding file.
    Graph(GraphArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Embedding file, one point per row.
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Row length of raw-float32 embedding files.
    #[arg(long)]
    dim: Option<usize>,
    /// Skip the first line of CSV inputs.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value = "cosine")]
    metric: DistanceMetric,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct WeightSource {
    /// Class probabilities, one row per point; weights are margins.
    #[arg(long)]
    probs: Option<PathBuf>,
    /// Precomputed weights, one per line.
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    source: WeightSource,
    /// Class count of raw-float32 probability files.
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "duke")]
    method: Algorithm,
    /// Weight trade-off; defaults to 0.1 / k.
    #[arg(long)]
    lambda: Option<f64>,
    /// Fixed ball radius; otherwise a geometric grid is searched.
    #[arg(long, conflicts_with = "gamma_grid")]
    gamma: Option<f64>,
    /// Number of grid points for the radius search.
    #[arg(long)]
    gamma_grid: Option<usize>,
    #[arg(long, default_value_t = 1)]
    machines: usize,
    #[arg(long, default_value = "round-robin")]
    partition: PartitionStrategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Neighbors per point for graph-based methods.
    #[arg(long, default_value_t = 10)]
    k_nn: usize,
    /// Redundancy penalty of the submodular baseline.
    #[arg(long, default_value_t = DEFAULT_LAMBDA_S)]
    lambda_s: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    source: WeightSource,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    lambda: Option<f64>,
    /// Largest number of subsets to enumerate.
    #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
    cap: u128,
    /// Also solve the unweighted k-center problem.
    #[arg(long)]
    kcenter: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 14)]
    n_max: usize,
    #[arg(long, default_value_t = 6)]
    k_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "euclidean,cosine")]
    metrics: Vec<DistanceMetric>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,1")]
    lambdas: Vec<f64>,
    /// Re-check the violating instances stored in an earlier report.
    #[arg(long)]
    replay: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "25000,50000,100000,200000"
    )]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "cosine")]
    metric: DistanceMetric,
    /// Ball radius as a fraction of the greedy radius on the smallest size.
    #[arg(long, default_value_t = 0.05)]
    gamma_fraction: f64,
    /// Skip the 2k timing.
    #[arg(long)]
    no_double_k: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "clusters")]
    kind: InstanceKind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 4)]
    clusters: usize,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// uniform, per-cluster, centroid-distance or constant:<w>.
    #[arg(long, default_value = "uniform")]
    weight_scheme: WeightScheme,
    /// Embedding CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Weight CSV to write; defaults to `<out stem>.weights.csv`.
    #[arg(long)]
    weights_out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 10)]
    k_nn: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(msg) => Failure::Usage(msg),
            other => Failure::Data(other),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("usage error");
            let msg = first.trim_start_matches("error: ").trim();
            eprintln!("error kind=Usage message={msg:?}");
            return ExitCode::from(1);
        }
    };
    let outcome = match cli.command {
        Command::Select(a) => cmd_select(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Graph(a) => cmd_graph(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error kind=Usage message={msg:?}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("error kind=InvariantViolation message={msg:?}");
            ExitCode::from(3)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| {
            Failure::Data(Error::Io {
                path: path.display().to_string(),
                source,
            })
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn load_options(data: &DataArgs, dim: Option<usize>) -> LoadOptions {
    LoadOptions {
        format: data.format,
        dim,
        header: data.header,
    }
}

fn load_inputs(
    data: &DataArgs,
    source: &WeightSource,
    classes: Option<usize>,
) -> CliResult<(EmbeddingSet<f64>, WeightVector<f64>)> {
    let set: EmbeddingSet<f64> = load_embeddings(&data.embeddings, &load_options(data, data.dim))?;
    let weights = match (&source.probs, &source.weights) {
        (Some(path), _) => {
            let probs = load_probabilities(path, &load_options(data, classes), ROW_SUM_TOLERANCE)?;
            margin_weights(&probs)?
        }
        (None, Some(path)) => load_weights(path, &load_options(data, Some(1)))?,
        (None, None) => {
            return Err(Failure::Usage(
                "one of --probs or --weights is required".into(),
            ))
        }
    };
    weights.check_len(set.len())?;
    Ok((set, weights))
}

fn echo_data(report: &mut Report, data: &DataArgs, source: &WeightSource, classes: Option<usize>) {
    let c = report.section("config");
    c.put("embeddings", data.embeddings.display());
    match (&source.probs, &source.weights) {
        (Some(p), _) => c.put("probs", p.display()),
        (None, Some(w)) => c.put("weights", w.display()),
        (None, None) => c,
    };
    c.put("format", data.format)
        .put("dim", data.dim.map_or("none".into(), |d| d.to_string()))
        .put("classes", classes.map_or("none".into(), |d| d.to_string()))
        .put("header", data.header)
        .put("metric", data.metric);
}

fn cmd_select(a: SelectArgs) -> CliResult<()> {
    let started = Instant::now();
    let (set, weights) = load_inputs(&a.data, &a.source, a.classes)?;
    let load_ms = ms_since(started);
    let metric = a.data.metric;
    let lambda = a.lambda.unwrap_or_else(|| default_lambda(a.k));
    let grid_size = a.gamma_grid.unwrap_or(8);

    let mut report = Report::new();
    echo_data(&mut report, &a.data, &a.source, a.classes);
    report
        .section("config")
        .put("command", "select")
        .put("method", a.method)
        .put("k", a.k)
        .num("lambda", lambda);
    {
        let c = report.section("config");
        match a.gamma {
            Some(g) => c.num("gamma", g),
            None => c.put("gamma", "search").put("gamma_grid", grid_size),
        };
        c.put("machines", a.machines)
            .put("partition", a.partition)
            .put("seed", a.seed)
            .put("k_nn", a.k_nn)
            .num("lambda_s", a.lambda_s);
    }
    report
        .section("data")
        .put("n", set.len())
        .put("dim", set.dim());

    let started = Instant::now();
    let scoring = Scoring {
        set: &set,
        metric,
        weights: &weights,
        lambda,
    };
    let config_at = |gamma: f64| SelectionConfig::new(a.k, lambda, gamma, metric);
    // runs a gamma-driven selector at the fixed radius or over the grid
    let with_gamma = |select: &mut dyn FnMut(f64) -> duke::Result<SubsetSolution<f64>>,
                      report: &mut Report|
     -> CliResult<SubsetSolution<f64>> {
        if let Some(g) = a.gamma {
            return Ok(select(g)?);
        }
        let (lo, hi) = gamma_bounds(&set, metric, &weights, a.k)?;
        let grid = gamma_grid(lo, hi, grid_size)?;
        let search = gamma_search_with(&grid, |g| select(g))?;
        report.add_trace(&search.trace);
        Ok(search.best)
    };

    let solution = match a.method {
        Algorithm::Duke => with_gamma(
            &mut |g| weighted_kcenter(&set, &weights, &config_at(g)),
            &mut report,
        )?,
        Algorithm::DukePq => with_gamma(
            &mut |g| weighted_kcenter_pq(&set, &weights, &config_at(g), Neighborhood::ExactBall),
            &mut report,
        )?,
        Algorithm::DukePqKnn => {
            let graph = build_knn_graph(&set, a.k_nn, metric)?;
            with_gamma(
                &mut |g| {
                    weighted_kcenter_pq(
                        &set,
                        &weights,
                        &config_at(g),
                        Neighborhood::KnnGraph(&graph),
                    )
                },
                &mut report,
            )?
        }
        Algorithm::Parallel => {
            let plan = make_partition(set.len(), a.machines, a.seed, a.partition)?;
            with_gamma(
                &mut |g| {
                    parallel_weighted_kcenter(
                        &set,
                        &weights,
                        &config_at(g),
                        &plan,
                        Execution::Threaded,
                    )
                },
                &mut report,
            )?
        }
        Algorithm::GreedyKCenter => {
            greedy_kcenter(&set, metric, a.k, 0)?.rescored(&set, metric, &weights, lambda)?
        }
        Algorithm::Random => random_select(&scoring, a.k, a.seed)?,
        Algorithm::Margin => margin_select(&scoring, a.k)?,
        Algorithm::Submodular => {
            let graph = build_knn_graph(&set, a.k_nn, metric)?;
            submodular_greedy(&scoring, &graph, a.lambda_s, a.k)?
        }
        Algorithm::Oracle => {
            let best = Oracle::default().weighted(&set, metric, &weights, a.k, lambda)?;
            let solution = scoring.solution(best.best_subset.clone(), Algorithm::Oracle)?;
            report.add_oracle(&best);
            solution
        }
    };
    let select_ms = ms_since(started);
    report.add_solution(&solution);
    report
        .section("timing")
        .num("load_ms", load_ms)
        .num("select_ms", select_ms);
    emit(&report.to_string(), a.out.as_deref())
}

fn cmd_oracle(a: OracleArgs) -> CliResult<()> {
    let started = Instant::now();
    let (set, weights) = load_inputs(&a.data, &a.source, a.classes)?;
    let load_ms = ms_since(started);
    let lambda = a.lambda.unwrap_or_else(|| default_lambda(a.k));
    let mut report = Report::new();
    echo_data(&mut report, &a.data, &a.source, a.classes);
    report
        .section("config")
        .put("command", "oracle")
        .put("k", a.k)
        .num("lambda", lambda)
        .put("cap", a.cap)
        .put("kcenter", a.kcenter);
    report
        .section("data")
        .put("n", set.len())
        .put("dim", set.dim());

    let started = Instant::now();
    let oracle = Oracle::with_cap(a.cap);
    let best = oracle.weighted(&set, a.data.metric, &weights, a.k, lambda)?;
    report.add_oracle(&best);
    report
        .section("oracle")
        .num("optimal_gamma", best.radius_term);
    if a.kcenter {
        let kc = oracle.kcenter(&set, a.data.metric, a.k)?;
        report
            .section("kcenter")
            .put("best_subset", fmt_indices(&kc.best_subset))
            .num("radius", kc.radius_term)
            .num("subset_weight", weights.total(&kc.best_subset));
    }
    report
        .section("timing")
        .num("load_ms", load_ms)
        .num("solve_ms", ms_since(started));
    emit(&report.to_string(), a.out.as_deref())
}

fn cmd_verify(a: VerifyArgs) -> CliResult<()> {
    let cfg = VerifyConfig {
        trials: a.trials,
        n_max: a.n_max,
        k_max: a.k_max,
        seed: a.seed,
        lambdas: a.lambdas,
        metrics: a.metrics,
        ..Default::default()
    };
    let started = Instant::now();
    let mut report = Report::new();
    let passed = match &a.replay {
        None => {
            let summary = run_verify(&cfg)?;
            summary.write_report(&mut report);
            summary.passed()
        }
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| {
                Failure::Data(Error::Io {
                    path: path.display().to_string(),
                    source,
                })
            })?;
            let stored = Report::parse(&text)?;
            let mut ok = true;
            let mut replayed = 0;
            for section in stored
                .sections
                .iter()
                .filter(|s| s.name.starts_with("violation "))
            {
                let summary = replay(section, &cfg)?;
                ok &= summary.passed();
                replayed += 1;
                let name = section.name.trim_start_matches("violation ");
                for s in summary.suites.iter().filter(|s| s.name == name) {
                    report
                        .section(&format!("replay {name}"))
                        .put("violations", s.violations)
                        .put("status", if s.passed() { "pass" } else { "fail" });
                }
            }
            report.section("verify").put("replayed", replayed);
            ok
        }
    };
    report.section("timing").num("verify_ms", ms_since(started));
    emit(&report.to_string(), a.out.as_deref())?;
    if passed {
        Ok(())
    } else {
        let failing: Vec<&str> = report
            .sections
            .iter()
            .filter(|s| s.get("status") == Some("fail"))
            .map(|s| s.name.as_str())
            .collect();
        Err(Failure::Invariant(format!(
            "failing: {}",
            failing.join(", ")
        )))
    }
}

fn cmd_bench(a: BenchArgs) -> CliResult<()> {
    let cfg = BenchConfig {
        sizes: a.sizes,
        dim: a.dim,
        k: a.k,
        reps: a.reps,
        seed: a.seed,
        metric: a.metric,
        gamma_fraction: a.gamma_fraction,
        double_k: !a.no_double_k,
    };
    let started = Instant::now();
    let result = run_bench::<f32>(&cfg)?;
    let mut report = Report::new();
    result.write_report(&mut report);
    report.section("timing").num("total_ms", ms_since(started));
    emit(&report.to_string(), a.out.as_deref())
}

fn cmd_gen(a: GenArgs) -> CliResult<()> {
    let spec = SyntheticSpec {
        kind: a.kind,
        n: a.n,
        dim: a.dim,
        clusters: a.clusters,
        spread: a.spread,
        seed: a.seed,
        weights: a.weight_scheme,
    };
    let (set, weights) = generate::<f64>(&spec)?;
    let weights_out = a.weights_out.unwrap_or_else(|| {
        let stem = a
            .out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        a.out.with_file_name(format!("{stem}.weights.csv"))
    });
    write_csv(&a.out, (0..set.len()).map(|i| set.row(i).to_vec()))?;
    write_csv(&weights_out, weights.values().iter().map(|&w| vec![w]))?;
    let mut report = Report::new();
    report
        .section("gen")
        .put("kind", a.kind)
        .put("n", set.len())
        .put("dim", set.dim())
        .put("seed", a.seed)
        .put("embeddings", a.out.display())
        .put("weights", weights_out.display());
    emit(&report.to_string(), None)
}

fn cmd_graph(a: GraphArgs) -> CliResult<()> {
    let set: EmbeddingSet<f64> =
        load_embeddings(&a.data.embeddings, &load_options(&a.data, a.data.dim))?;
    let graph = build_knn_graph(&set, a.k_nn, a.data.metric)?;
    emit(&graph.export(), a.out.as_deref())
}
