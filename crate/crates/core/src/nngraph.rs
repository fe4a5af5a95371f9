//! Exact k-nearest-neighbor graph and metric ball queries.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dataset::{DistanceMetric, EmbeddingSet};
use crate::error::{Error, Result};
use crate::report::fmt_sig;
use crate::scalar::{cmp_finite, Scalar};

/// Directed kNN adjacency. Each list is sorted by `(distance, index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph<T> {
    k_nn: usize,
    adjacency: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> NeighborGraph<T> {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn k_nn(&self) -> usize {
        self.k_nn
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, T)] {
        &self.adjacency[node]
    }

    /// Undirected edge list `(i, j, distance)` with `i < j`, each edge once.
    pub fn undirected_edges(&self) -> Vec<(usize, usize, T)> {
        let mut edges: Vec<(usize, usize, T)> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nbrs)| nbrs.iter().map(move |&(j, d)| (i.min(j), i.max(j), d)))
            .collect();
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        edges
    }

    /// `node: (nbr,dist) (nbr,dist) ...`, one line per node.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (node, nbrs) in self.adjacency.iter().enumerate() {
            let _ = write!(out, "{node}:");
            for &(j, d) in nbrs {
                let _ = write!(out, " ({j},{})", fmt_sig(d.as_f64()));
            }
            out.push('\n');
        }
        out
    }
}

fn nearest_row<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    i: usize,
    keep: usize,
) -> Vec<(usize, T)> {
    let mut row: Vec<(usize, T)> = (0..set.len())
        .filter(|&j| j != i)
        .map(|j| (j, set.distance(i, j, metric)))
        .collect();
    let by_dist = |a: &(usize, T), b: &(usize, T)| cmp_finite(a.1, b.1).then(a.0.cmp(&b.0));
    if keep < row.len() {
        row.select_nth_unstable_by(keep, by_dist);
        row.truncate(keep);
    }
    row.sort_by(by_dist);
    row
}

/// Builds the exact kNN graph by all-pairs scan; each node gets
/// `min(k_nn, n - 1)` neighbors.
pub fn build_knn_graph<T: Scalar>(
    set: &EmbeddingSet<T>,
    k_nn: usize,
    metric: DistanceMetric,
) -> Result<NeighborGraph<T>> {
    if k_nn == 0 {
        return Err(Error::InvalidConfig("k_nn must be at least 1".into()));
    }
    set.check_metric(metric)?;
    let keep = k_nn.min(set.len() - 1);
    let adjacency = (0..set.len())
        .into_par_iter()
        .map(|i| nearest_row(set, metric, i, keep))
        .collect();
    Ok(NeighborGraph { k_nn, adjacency })
}

/// All points within `radius` of `center` (inclusive) that are not excluded,
/// in ascending index order.
pub fn radius_query<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    center: usize,
    radius: T,
    exclude: &[usize],
) -> Result<Vec<usize>> {
    set.check_index(center)?;
    set.check_metric(metric)?;
    if radius < T::zero() || !radius.is_finite() {
        return Err(Error::InvalidConfig(
            "radius must be finite and nonnegative".into(),
        ));
    }
    let mut excluded = vec![false; set.len()];
    for &e in exclude {
        set.check_index(e)?;
        excluded[e] = true;
    }
    Ok((0..set.len())
        .filter(|&i| !excluded[i] && set.distance(center, i, metric) <= radius)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> EmbeddingSet<f64> {
        EmbeddingSet::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    const E: DistanceMetric = DistanceMetric::Euclidean;

    #[test]
    fn collinear_nearest() {
        let g = build_knn_graph(&line(&[0.0, 1.0, 5.0]), 1, E).unwrap();
        assert_eq!(g.neighbors(0), &[(1, 1.0)]);
        assert_eq!(g.neighbors(1), &[(0, 1.0)]);
        assert_eq!(g.neighbors(2), &[(1, 4.0)]);
    }

    #[test]
    fn clamps_to_n_minus_one() {
        let g = build_knn_graph(&line(&[0.0, 1.0]), 10, E).unwrap();
        assert_eq!(g.neighbors(0).len(), 1);
        assert_eq!(g.neighbors(1).len(), 1);
    }

    #[test]
    fn far_point_neighbors() {
        // distances from 10: to 3 -> 7, to 2 -> 8, to 1 -> 9, to 0 -> 10
        let g = build_knn_graph(&line(&[0.0, 1.0, 2.0, 3.0, 10.0]), 2, E).unwrap();
        assert_eq!(g.neighbors(4), &[(3, 7.0), (2, 8.0)]);
    }

    #[test]
    fn distance_ties_break_by_index() {
        let g = build_knn_graph(&line(&[0.0, -1.0, 1.0]), 1, E).unwrap();
        assert_eq!(g.neighbors(0), &[(1, 1.0)]);
    }

    #[test]
    fn zero_k_and_zero_vector_rejected() {
        assert!(build_knn_graph(&line(&[0.0, 1.0]), 0, E).is_err());
        assert!(matches!(
            build_knn_graph(&line(&[1.0, 0.0]), 1, DistanceMetric::Cosine),
            Err(Error::ZeroVectorCosine { index: 1 })
        ));
    }

    #[test]
    fn ball_queries() {
        let set = line(&[0.0, 1.0, 2.0, 3.0, 10.0]);
        assert_eq!(radius_query(&set, E, 1, 1.5, &[]).unwrap(), vec![0, 1, 2]);
        assert_eq!(radius_query(&set, E, 1, 0.0, &[]).unwrap(), vec![1]);
        assert_eq!(radius_query(&set, E, 4, 6.0, &[]).unwrap(), vec![4]);
        assert_eq!(radius_query(&set, E, 1, 1.5, &[1, 2]).unwrap(), vec![0]);
        assert!(radius_query(&set, E, 1, -1.0, &[]).is_err());
    }

    #[test]
    fn export_format() {
        let g = build_knn_graph(&line(&[0.0, 1.0, 5.0]), 1, E).unwrap();
        assert_eq!(g.export(), "0: (1,1)\n1: (0,1)\n2: (1,4)\n");
        assert_eq!(g.undirected_edges(), vec![(0, 1, 1.0), (1, 2, 4.0)]);
    }
}
