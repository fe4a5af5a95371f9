//! Weighted k-center subset selection.
//!
//! Picks `k` points from an embedding set so that every point is close to a
//! selected one while the selected points carry little total weight. Weights
//! are usually classifier margins, so light points are the uncertain ones.
//!
//! The core is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! bottom of this file name the common instantiations.

pub mod baselines;
pub mod bench;
pub mod dataset;
pub mod error;
pub mod instances;
pub mod nngraph;
pub mod oracle;
pub mod parallel;
pub mod report;
pub mod scalar;
pub mod verify;
pub mod wkcenter;

pub use baselines::{
    lowest_margin, margin_select, random_select, sample_indices, submodular_greedy,
    submodular_greedy_run, submodular_value, EdgeSimilarity, GreedyRun, Scoring, DEFAULT_LAMBDA_S,
};
pub use bench::{run_bench, BenchConfig, BenchResult, BenchRow};
pub use dataset::{
    load_embeddings, load_probabilities, load_weights, margin_weights, pairwise_distance,
    write_csv, DistanceMetric, EmbeddingSet, Format, LoadOptions, ProbabilityMatrix, WeightVector,
    ROW_SUM_TOLERANCE,
};
pub use error::{Error, Result};
pub use instances::{
    gen_clusters, gen_figure1, generate, InstanceKind, SyntheticSpec, WeightScheme,
};
pub use nngraph::{build_knn_graph, radius_query, NeighborGraph};
pub use oracle::{
    binomial, brute_force_kcenter, brute_force_weighted, optimal_gamma, Oracle, OracleResult,
    DEFAULT_SUBSET_CAP,
};
pub use parallel::{
    make_partition, parallel_weighted_kcenter, Execution, PartitionPlan, PartitionStrategy,
};
pub use report::{fmt_sig, Report};
pub use scalar::Scalar;
pub use verify::{check_instance, run_verify, Instance, SuiteStats, VerifyConfig, VerifySummary};
pub use wkcenter::{
    default_lambda, gamma_bounds, gamma_grid, gamma_search, gamma_search_with, greedy_kcenter,
    kcenter_cost, weighted_kcenter, weighted_kcenter_pq, weighted_objective, Algorithm,
    GammaSearch, Neighborhood, ObjectiveParts, SelectionConfig, SubsetSolution, GAMMA_FLOOR,
};

pub type EmbeddingSetF64 = EmbeddingSet<f64>;
pub type EmbeddingSetF32 = EmbeddingSet<f32>;
pub type WeightVectorF64 = WeightVector<f64>;
pub type WeightVectorF32 = WeightVector<f32>;
pub type SubsetSolutionF64 = SubsetSolution<f64>;
pub type SubsetSolutionF32 = SubsetSolution<f32>;
pub type NeighborGraphF64 = NeighborGraph<f64>;
pub type SelectionConfigF64 = SelectionConfig<f64>;
