//! Comparison selectors: uniform random, lowest margin, and a greedy
//! maximizer of a graph-based diversity objective.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DistanceMetric, EmbeddingSet, WeightVector};
use crate::error::{Error, Result};
use crate::nngraph::NeighborGraph;
use crate::scalar::Scalar;
use crate::wkcenter::{check_budget, Algorithm, SubsetSolution};

/// Default redundancy penalty of the submodular baseline.
pub const DEFAULT_LAMBDA_S: f64 = 0.9;

/// Everything needed to score a subset with the weighted objective.
#[derive(Debug, Clone, Copy)]
pub struct Scoring<'a, T> {
    pub set: &'a EmbeddingSet<T>,
    pub metric: DistanceMetric,
    pub weights: &'a WeightVector<T>,
    pub lambda: T,
}

impl<T: Scalar> Scoring<'_, T> {
    pub fn solution(&self, indices: Vec<usize>, algorithm: Algorithm) -> Result<SubsetSolution<T>> {
        SubsetSolution::evaluate(
            self.set,
            self.metric,
            self.weights,
            self.lambda,
            indices,
            algorithm,
            None,
        )
    }
}

/// `k` distinct indices drawn uniformly without replacement.
pub fn sample_indices(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    check_budget(k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, n, k).into_vec())
}

pub fn random_select<T: Scalar>(
    scoring: &Scoring<'_, T>,
    k: usize,
    seed: u64,
) -> Result<SubsetSolution<T>> {
    let indices = sample_indices(scoring.set.len(), k, seed)?;
    scoring.solution(indices, Algorithm::Random)
}

/// The `k` lowest-weight indices in ascending `(weight, index)` order.
pub fn lowest_margin(weights: &WeightVector<impl Scalar>, k: usize) -> Result<Vec<usize>> {
    check_budget(k, weights.len())?;
    Ok(weights.ascending_order().into_iter().take(k).collect())
}

pub fn margin_select<T: Scalar>(scoring: &Scoring<'_, T>, k: usize) -> Result<SubsetSolution<T>> {
    let indices = lowest_margin(scoring.weights, k)?;
    scoring.solution(indices, Algorithm::Margin)
}

/// Similarities on the undirected edges of a neighbor graph.
#[derive(Debug, Clone, Default)]
pub struct EdgeSimilarity<T> {
    edges: HashMap<(usize, usize), T>,
}

impl<T: Scalar> EdgeSimilarity<T> {
    pub fn new() -> Self {
        Self {
            edges: HashMap::new(),
        }
    }

    /// Applies `f` to the stored distance of every graph edge.
    pub fn from_graph(graph: &NeighborGraph<T>, f: impl Fn(T) -> T) -> Self {
        let edges = graph
            .undirected_edges()
            .into_iter()
            .map(|(i, j, d)| ((i, j), f(d)))
            .collect();
        Self { edges }
    }

    /// `1 - d/2` for cosine distance, `1 / (1 + d)` otherwise.
    pub fn for_metric(graph: &NeighborGraph<T>, metric: DistanceMetric) -> Self {
        match metric {
            DistanceMetric::Cosine => Self::from_graph(graph, |d| T::one() - d / T::lit(2.0)),
            _ => Self::from_graph(graph, |d| T::one() / (T::one() + d)),
        }
    }

    pub fn insert(&mut self, i: usize, j: usize, s: T) {
        self.edges.insert((i.min(j), i.max(j)), s);
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    fn adjacency(&self, n: usize) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); n];
        let mut edges: Vec<_> = self.edges.iter().map(|(&(i, j), &s)| (i, j, s)).collect();
        edges.sort_by_key(|&(i, j, _)| (i, j));
        for (i, j, s) in edges {
            if i != j && j < n {
                adj[i].push((j, s));
                adj[j].push((i, s));
            }
        }
        adj
    }
}

/// `sum_{i in S} utility(i) - lambda_s * sum_{edges {i,j} within S} s(i,j)`.
pub fn submodular_value<T: Scalar>(
    utilities: &[T],
    similarity: &EdgeSimilarity<T>,
    lambda_s: T,
    subset: &[usize],
) -> T {
    let gain: T = subset.iter().map(|&i| utilities[i]).sum();
    let mut penalty = T::zero();
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            if let Some(s) = similarity.get(i, j) {
                penalty = penalty + s;
            }
        }
    }
    gain - lambda_s * penalty
}

#[derive(Debug, Clone)]
pub struct GreedyRun<T> {
    pub indices: Vec<usize>,
    /// Marginal gain realized at each step.
    pub gains: Vec<T>,
}

/// Greedy maximization of [`submodular_value`] under `|S| = k`. Each step adds
/// the point with the largest marginal gain; ties go to the lowest index.
pub fn submodular_greedy_run<T: Scalar>(
    n: usize,
    utilities: &[T],
    similarity: &EdgeSimilarity<T>,
    lambda_s: T,
    k: usize,
) -> Result<GreedyRun<T>> {
    check_budget(k, n)?;
    if utilities.len() != n {
        return Err(Error::LengthMismatch {
            what: "utilities".into(),
            expected: n,
            found: utilities.len(),
        });
    }
    if !(lambda_s >= T::zero() && lambda_s.is_finite()) {
        return Err(Error::InvalidConfig(
            "lambda_s must be finite and >= 0".into(),
        ));
    }
    let adj = similarity.adjacency(n);
    let mut gain: Vec<T> = utilities.to_vec();
    let mut selected = vec![false; n];
    let mut run = GreedyRun {
        indices: Vec::with_capacity(k),
        gains: Vec::with_capacity(k),
    };
    while run.indices.len() < k {
        let mut best: Option<usize> = None;
        for v in (0..n).filter(|&v| !selected[v]) {
            if best.is_none_or(|b| gain[v] > gain[b]) {
                best = Some(v);
            }
        }
        let v = best.expect("k <= n");
        selected[v] = true;
        run.indices.push(v);
        run.gains.push(gain[v]);
        for &(u, s) in &adj[v] {
            gain[u] = gain[u] - lambda_s * s;
        }
    }
    Ok(run)
}

/// Submodular baseline with utility `1 - w(i)` and metric-derived edge
/// similarities over `graph`.
pub fn submodular_greedy<T: Scalar>(
    scoring: &Scoring<'_, T>,
    graph: &NeighborGraph<T>,
    lambda_s: T,
    k: usize,
) -> Result<SubsetSolution<T>> {
    let n = scoring.set.len();
    if graph.len() != n {
        return Err(Error::GraphMismatch {
            graph: graph.len(),
            set: n,
        });
    }
    scoring.weights.check_len(n)?;
    let utilities: Vec<T> = scoring
        .weights
        .values()
        .iter()
        .map(|&w| T::one() - w)
        .collect();
    let similarity = EdgeSimilarity::for_metric(graph, scoring.metric);
    let run = submodular_greedy_run(n, &utilities, &similarity, lambda_s, k)?;
    scoring.solution(run.indices, Algorithm::Submodular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nngraph::build_knn_graph;

    fn toy() -> (EmbeddingSet<f64>, WeightVector<f64>) {
        let set = EmbeddingSet::from_rows(&[vec![0.0], vec![4.0], vec![9.0]]).unwrap();
        let w = WeightVector::new(vec![0.9, 0.1, 0.5]).unwrap();
        (set, w)
    }

    #[test]
    fn margin_examples() {
        let (set, w) = toy();
        let sc = Scoring {
            set: &set,
            metric: DistanceMetric::Euclidean,
            weights: &w,
            lambda: 1.0,
        };
        assert_eq!(margin_select(&sc, 1).unwrap().indices, vec![1]);
        let two = margin_select(&sc, 2).unwrap();
        assert_eq!(two.indices, vec![1, 2]);
        assert_eq!(two.weight_term, 0.1 + 0.5);
        assert_eq!(two.radius_term, 4.0);
        let flat = WeightVector::uniform(3, 0.5).unwrap();
        assert_eq!(lowest_margin(&flat, 2).unwrap(), vec![0, 1]);
        assert!(matches!(
            margin_select(&sc, 4),
            Err(Error::BudgetExceedsGroundSet { k: 4, n: 3 })
        ));
    }

    #[test]
    fn random_examples() {
        let mut all = sample_indices(6, 6, 1).unwrap();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
        assert_eq!(
            sample_indices(100, 7, 42).unwrap(),
            sample_indices(100, 7, 42).unwrap()
        );
        let s = sample_indices(100, 30, 3).unwrap();
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), 30);
        assert!(sample_indices(3, 4, 0).is_err());
    }

    #[test]
    fn random_is_uniform_for_single_draws() {
        let mut counts = [0usize; 10];
        let trials = 10_000;
        for seed in 0..trials {
            counts[sample_indices(10, 1, seed).unwrap()[0]] += 1;
        }
        for c in counts {
            let f = c as f64 / trials as f64;
            assert!((f - 0.1).abs() <= 0.01, "frequency {f}");
        }
    }

    #[test]
    fn zero_penalty_takes_top_utilities() {
        let util = [0.3, 0.9, 0.1, 0.9, 0.5];
        let mut sim = EdgeSimilarity::new();
        sim.insert(1, 3, 1.0);
        let run = submodular_greedy_run(5, &util, &sim, 0.0, 3).unwrap();
        assert_eq!(run.indices, vec![1, 3, 4]);
    }

    #[test]
    fn redundancy_penalty_avoids_duplicates() {
        // 0 and 1 are identical high-utility points
        let util = [0.95, 0.95, 0.6];
        let mut sim = EdgeSimilarity::new();
        sim.insert(0, 1, 1.0);
        let run = submodular_greedy_run(3, &util, &sim, 10.0, 2).unwrap();
        assert_eq!(run.indices, vec![0, 2]);
        assert_eq!(run.gains, vec![0.95, 0.6]);
        assert_eq!(submodular_value(&util, &sim, 10.0, &[0, 1]), 1.9 - 10.0);
    }

    #[test]
    fn graph_backed_baseline() {
        let set = EmbeddingSet::from_rows(&[
            vec![1.0, 0.0],
            vec![1.0, 0.01],
            vec![0.0, 1.0],
            vec![-1.0, 0.2],
        ])
        .unwrap();
        let w = WeightVector::new(vec![0.1, 0.1, 0.3, 0.2]).unwrap();
        let graph = build_knn_graph(&set, 2, DistanceMetric::Cosine).unwrap();
        let sc = Scoring {
            set: &set,
            metric: DistanceMetric::Cosine,
            weights: &w,
            lambda: 0.5,
        };
        let s = submodular_greedy(&sc, &graph, 0.9, 2).unwrap();
        assert_eq!(s.algorithm, Algorithm::Submodular);
        // 0 and 1 are nearly parallel, so 1 is penalized after 0 is taken
        assert_eq!(s.indices, vec![0, 3]);
    }
}
