//! Graph construction and ball queries against a naive all-pairs scan.

use duke::{build_knn_graph, radius_query, DistanceMetric, EmbeddingSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmbeddingSet<f64> {
    let flat: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    EmbeddingSet::from_flat(flat, dim).unwrap()
}

#[test]
fn knn_matches_naive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (trial, &n) in [2usize, 7, 40, 150, 500].iter().enumerate() {
        let set = random_set(&mut rng, n, 1 + trial);
        for metric in [
            DistanceMetric::Euclidean,
            DistanceMetric::Cosine,
            DistanceMetric::Manhattan,
        ] {
            let k_nn = 10;
            let graph = build_knn_graph(&set, k_nn, metric).unwrap();
            for i in 0..n {
                let mut all: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (set.distance(i, j, metric), j))
                    .collect();
                all.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let expected: Vec<(usize, f64)> = all
                    .iter()
                    .take(k_nn.min(n - 1))
                    .map(|&(d, j)| (j, d))
                    .collect();
                assert_eq!(
                    graph.neighbors(i),
                    expected.as_slice(),
                    "n={n} node={i} {metric}"
                );
            }
        }
    }
}

#[test]
fn radius_query_matches_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let n = rng.random_range(1..120);
        let set = random_set(&mut rng, n, 3);
        let center = rng.random_range(0..n);
        let radius = rng.random_range(0.0..2.0);
        let exclude: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.2)).collect();
        let got = radius_query(&set, DistanceMetric::Euclidean, center, radius, &exclude).unwrap();
        let want: Vec<usize> = (0..n)
            .filter(|i| !exclude.contains(i))
            .filter(|&i| set.distance(center, i, DistanceMetric::Euclidean) <= radius)
            .collect();
        assert_eq!(got, want);
    }
}
