use super::{Algorithm, SelectionConfig, SubsetSolution};
use crate::dataset::{DistanceMetric, EmbeddingSet, WeightVector};
use crate::error::{Error, Result};
use crate::nngraph::NeighborGraph;
use crate::scalar::Scalar;

/// Which points leave the queue once a center is chosen.
#[derive(Debug, Clone, Copy)]
pub enum Neighborhood<'a, T> {
    /// Every point within `3 * gamma` of the new center.
    ExactBall,
    /// The center's kNN adjacency list.
    KnnGraph(&'a NeighborGraph<T>),
}

/// Min-weight queue over a fixed population.
///
/// Nothing is inserted after construction, so the queue is the
/// `(weight, index)` order sorted once plus a cursor that only moves forward.
/// Removal is lazy: dead entries are skipped when the cursor reaches them.
struct WeightQueue<'a, T> {
    ranked: Vec<usize>,
    cursor: usize,
    set: &'a EmbeddingSet<T>,
    metric: DistanceMetric,
    exclusion: T,
    neighborhood: Neighborhood<'a, T>,
    centers: Vec<usize>,
    selected: Vec<bool>,
    /// Graph mode: dropped by a center's adjacency list.
    removed: Vec<bool>,
    /// Ball mode: distance to the centers in `centers[..seen[i]]`.
    near: Vec<T>,
    seen: Vec<usize>,
}

impl<'a, T: Scalar> WeightQueue<'a, T> {
    fn new(
        set: &'a EmbeddingSet<T>,
        weights: &WeightVector<T>,
        config: &SelectionConfig<T>,
        neighborhood: Neighborhood<'a, T>,
    ) -> Self {
        let n = set.len();
        Self {
            ranked: weights.ascending_order(),
            cursor: 0,
            set,
            metric: config.metric,
            exclusion: T::lit(3.0) * config.gamma,
            neighborhood,
            centers: Vec::with_capacity(config.k),
            selected: vec![false; n],
            removed: vec![false; n],
            near: vec![T::infinity(); n],
            seen: vec![0; n],
        }
    }

    /// True while `i` has not been dropped by any center's neighborhood.
    fn live(&mut self, i: usize) -> bool {
        if self.selected[i] || self.removed[i] {
            return false;
        }
        if let Neighborhood::ExactBall = self.neighborhood {
            while self.seen[i] < self.centers.len() {
                let c = self.centers[self.seen[i]];
                self.seen[i] += 1;
                self.near[i] = self.near[i].min(self.set.distance(i, c, self.metric));
                if self.near[i] <= self.exclusion {
                    self.removed[i] = true;
                    return false;
                }
            }
        }
        true
    }

    fn pop(&mut self) -> Option<usize> {
        while self.cursor < self.ranked.len() {
            let i = self.ranked[self.cursor];
            self.cursor += 1;
            if self.live(i) {
                return Some(i);
            }
        }
        None
    }

    fn select(&mut self, center: usize) {
        self.selected[center] = true;
        self.centers.push(center);
        if let Neighborhood::KnnGraph(graph) = self.neighborhood {
            for &(j, _) in graph.neighbors(center) {
                self.removed[j] = true;
            }
        }
    }

    /// Lightest unselected point within `radius` of `from`.
    fn lightest_within(&self, from: usize, radius: T) -> Option<usize> {
        self.ranked
            .iter()
            .copied()
            .filter(|&j| !self.selected[j])
            .find(|&j| self.set.distance(from, j, self.metric) <= radius)
    }

    fn lightest_unselected(&self) -> Option<usize> {
        self.ranked.iter().copied().find(|&j| !self.selected[j])
    }
}

/// Priority-queue formulation of [`super::weighted_kcenter`].
///
/// Points wait in a min-weight queue. Each pop yields the lightest point not
/// yet covered; the lightest unselected point within `gamma` of it joins the
/// selection and its neighborhood leaves the queue. When the queue drains
/// early the remaining budget is filled with the lightest unselected points.
///
/// With [`Neighborhood::ExactBall`] the output is index-identical to the
/// reference selector. The `gamma` lookup walks the weight order and stops at
/// the first hit, so with small balls a round touches few points.
pub fn weighted_kcenter_pq<T: Scalar>(
    set: &EmbeddingSet<T>,
    weights: &WeightVector<T>,
    config: &SelectionConfig<T>,
    neighborhood: Neighborhood<'_, T>,
) -> Result<SubsetSolution<T>> {
    let n = set.len();
    config.validate(n)?;
    weights.check_len(n)?;
    set.check_metric(config.metric)?;
    if let Neighborhood::KnnGraph(graph) = neighborhood {
        if graph.len() != n {
            return Err(Error::GraphMismatch {
                graph: graph.len(),
                set: n,
            });
        }
    }

    let mut queue = WeightQueue::new(set, weights, config, neighborhood);
    let first = queue.pop().expect("nonempty ground set");
    queue.select(first);

    while queue.centers.len() < config.k {
        let Some(candidate) = queue.pop() else { break };
        let pick = queue
            .lightest_within(candidate, config.gamma)
            .expect("candidate lies in its own gamma-ball");
        queue.select(pick);
    }
    while queue.centers.len() < config.k {
        let next = queue
            .lightest_unselected()
            .expect("k <= n leaves enough points");
        queue.select(next);
    }

    let algorithm = match neighborhood {
        Neighborhood::ExactBall => Algorithm::DukePq,
        Neighborhood::KnnGraph(_) => Algorithm::DukePqKnn,
    };
    SubsetSolution::evaluate(
        set,
        config.metric,
        weights,
        config.lambda,
        queue.centers,
        algorithm,
        Some(config.gamma),
    )
}
