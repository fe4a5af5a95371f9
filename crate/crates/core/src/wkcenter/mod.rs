//! Weighted k-center selection.
//!
//! The objective of a center set `S` is
//!
//! ```text
//! radius(S) + lambda * sum_{i in S} w(i),   radius(S) = max_i min_{j in S} d(i, j)
//! ```
//!
//! [`weighted_kcenter`] is the reference selector driven by a ball radius
//! `gamma`; [`weighted_kcenter_pq`] is the priority-queue formulation of the
//! same procedure. [`greedy_kcenter`] is the classic farthest-point heuristic
//! and [`gamma_search`] picks `gamma` by evaluating the objective on a grid.

mod gamma;
mod pq;

pub use gamma::{
    default_lambda, gamma_bounds, gamma_grid, gamma_search, gamma_search_with, GammaSearch,
    GAMMA_FLOOR,
};
pub use pq::{weighted_kcenter_pq, Neighborhood};

use std::fmt;
use std::str::FromStr;

use crate::dataset::{DistanceMetric, EmbeddingSet, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    GreedyKCenter,
    Duke,
    DukePq,
    DukePqKnn,
    Parallel,
    Random,
    Margin,
    Submodular,
    Oracle,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::GreedyKCenter => "greedy-kcenter",
            Algorithm::Duke => "duke",
            Algorithm::DukePq => "duke-pq",
            Algorithm::DukePqKnn => "duke-pq-knn",
            Algorithm::Parallel => "parallel",
            Algorithm::Random => "random",
            Algorithm::Margin => "margin",
            Algorithm::Submodular => "submodular",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Algorithm::GreedyKCenter,
            Algorithm::Duke,
            Algorithm::DukePq,
            Algorithm::DukePqKnn,
            Algorithm::Parallel,
            Algorithm::Random,
            Algorithm::Margin,
            Algorithm::Submodular,
            Algorithm::Oracle,
        ]
        .into_iter()
        .find(|a| a.tag() == s)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig<T> {
    pub k: usize,
    pub lambda: T,
    /// Ball radius, in distance units.
    pub gamma: T,
    pub metric: DistanceMetric,
    pub seed: u64,
}

impl<T: Scalar> SelectionConfig<T> {
    pub fn new(k: usize, lambda: T, gamma: T, metric: DistanceMetric) -> Self {
        Self {
            k,
            lambda,
            gamma,
            metric,
            seed: 0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_budget(self.k, n)?;
        if !(self.lambda >= T::zero() && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(
                "lambda must be finite and >= 0".into(),
            ));
        }
        if !(self.gamma >= T::zero() && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig("gamma must be finite and >= 0".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_budget(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("budget k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::BudgetExceedsGroundSet { k, n });
    }
    Ok(())
}

/// The three components of the weighted objective for one center set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParts<T> {
    pub radius_term: T,
    pub weight_term: T,
    pub objective: T,
}

/// A selected subset together with its objective breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSolution<T> {
    /// Selected points in selection order.
    pub indices: Vec<usize>,
    pub radius_term: T,
    pub weight_term: T,
    pub objective: T,
    pub lambda: T,
    pub algorithm: Algorithm,
    pub gamma_used: Option<T>,
    /// Worker count for partitioned runs.
    pub machines: Option<usize>,
    /// Per-worker candidate sets for partitioned runs.
    pub worker_candidates: Vec<Vec<usize>>,
}

impl<T: Scalar> SubsetSolution<T> {
    /// Scores `indices` against the full ground set.
    pub fn evaluate(
        set: &EmbeddingSet<T>,
        metric: DistanceMetric,
        weights: &WeightVector<T>,
        lambda: T,
        indices: Vec<usize>,
        algorithm: Algorithm,
        gamma_used: Option<T>,
    ) -> Result<Self> {
        let parts = weighted_objective(set, metric, weights, lambda, &indices)?;
        Ok(Self {
            indices,
            radius_term: parts.radius_term,
            weight_term: parts.weight_term,
            objective: parts.objective,
            lambda,
            algorithm,
            gamma_used,
            machines: None,
            worker_candidates: Vec::new(),
        })
    }

    /// Re-scores the same indices under different weights or lambda.
    pub fn rescored(
        self,
        set: &EmbeddingSet<T>,
        metric: DistanceMetric,
        weights: &WeightVector<T>,
        lambda: T,
    ) -> Result<Self> {
        let parts = weighted_objective(set, metric, weights, lambda, &self.indices)?;
        Ok(Self {
            radius_term: parts.radius_term,
            weight_term: parts.weight_term,
            objective: parts.objective,
            lambda,
            ..self
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v
    }
}

fn check_centers<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    centers: &[usize],
) -> Result<()> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    for &c in centers {
        set.check_index(c)?;
    }
    set.check_metric(metric)
}

pub(crate) fn radius_unchecked<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    centers: &[usize],
) -> T {
    (0..set.len())
        .map(|i| {
            centers
                .iter()
                .map(|&c| set.distance(i, c, metric))
                .fold(T::infinity(), T::min)
        })
        .fold(T::zero(), T::max)
}

/// Largest distance from any point to its nearest center.
pub fn kcenter_cost<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    centers: &[usize],
) -> Result<T> {
    check_centers(set, metric, centers)?;
    Ok(radius_unchecked(set, metric, centers))
}

pub fn weighted_objective<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    weights: &WeightVector<T>,
    lambda: T,
    centers: &[usize],
) -> Result<ObjectiveParts<T>> {
    check_centers(set, metric, centers)?;
    weights.check_len(set.len())?;
    let radius_term = radius_unchecked(set, metric, centers);
    let weight_term = weights.total(centers);
    Ok(ObjectiveParts {
        radius_term,
        weight_term,
        objective: radius_term + lambda * weight_term,
    })
}

/// Farthest-point greedy k-center from `start`. Ties go to the lowest index.
/// The result carries `lambda = 0` and a zero weight term.
pub fn greedy_kcenter<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    k: usize,
    start: usize,
) -> Result<SubsetSolution<T>> {
    let n = set.len();
    check_budget(k, n)?;
    set.check_index(start)?;
    set.check_metric(metric)?;

    let mut selected = vec![false; n];
    let mut near = vec![T::infinity(); n];
    let mut indices = Vec::with_capacity(k);
    let mut next = start;
    loop {
        selected[next] = true;
        indices.push(next);
        for (i, d) in near.iter_mut().enumerate() {
            *d = d.min(set.distance(i, next, metric));
        }
        if indices.len() == k {
            break;
        }
        let mut far: Option<usize> = None;
        for i in (0..n).filter(|&i| !selected[i]) {
            if far.is_none_or(|f| near[i] > near[f]) {
                far = Some(i);
            }
        }
        next = far.expect("k <= n leaves an unselected point");
    }
    let radius_term = near.into_iter().fold(T::zero(), T::max);
    Ok(SubsetSolution {
        indices,
        radius_term,
        weight_term: T::zero(),
        objective: radius_term,
        lambda: T::zero(),
        algorithm: Algorithm::GreedyKCenter,
        gamma_used: None,
        machines: None,
        worker_candidates: Vec::new(),
    })
}

/// Lowest-weight index among `candidates`, ties to the lowest index.
#[inline]
pub(crate) fn lighter<T: Scalar>(
    weights: &WeightVector<T>,
    current: Option<usize>,
    i: usize,
) -> bool {
    match current {
        None => true,
        Some(c) => {
            let (wi, wc) = (weights.get(i), weights.get(c));
            wi < wc || (wi == wc && i < c)
        }
    }
}

/// Selection order of the reference procedure; shared by the partitioned driver.
pub(crate) fn reference_order<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    weights: &WeightVector<T>,
    k: usize,
    gamma: T,
) -> Vec<usize> {
    let n = set.len();
    let exclusion = T::lit(3.0) * gamma;
    let mut selected = vec![false; n];
    // distance from each point to its nearest selected center
    let mut near = vec![T::infinity(); n];
    let mut order = Vec::with_capacity(k);

    let mut seed = None;
    for i in 0..n {
        if lighter(weights, seed, i) {
            seed = Some(i);
        }
    }
    let mut next = seed.expect("nonempty ground set");
    loop {
        selected[next] = true;
        order.push(next);
        for (i, d) in near.iter_mut().enumerate() {
            *d = d.min(set.distance(i, next, metric));
        }
        if order.len() == k {
            break;
        }

        let mut far = None;
        for i in (0..n).filter(|&i| near[i] > exclusion) {
            if lighter(weights, far, i) {
                far = Some(i);
            }
        }
        let mut pick = None;
        match far {
            // everything is covered within 3*gamma: take the lightest remaining point
            None => {
                for i in (0..n).filter(|&i| !selected[i]) {
                    if lighter(weights, pick, i) {
                        pick = Some(i);
                    }
                }
            }
            // lightest point in the gamma-ball around the lightest uncovered point
            Some(c) => {
                for j in (0..n).filter(|&j| !selected[j]) {
                    if set.distance(c, j, metric) <= gamma && lighter(weights, pick, j) {
                        pick = Some(j);
                    }
                }
            }
        }
        next = pick.expect("candidate set is never empty");
    }
    order
}

/// Reference weighted k-center selection with exact metric balls.
///
/// Starts from the globally lightest point. While fewer than `k` points are
/// chosen: if some point lies strictly farther than `3 * gamma` from the
/// selection, take the lightest such point and add the lightest point within
/// `gamma` of it (itself included); otherwise add the lightest unselected
/// point. All ties resolve to the lowest index.
pub fn weighted_kcenter<T: Scalar>(
    set: &EmbeddingSet<T>,
    weights: &WeightVector<T>,
    config: &SelectionConfig<T>,
) -> Result<SubsetSolution<T>> {
    config.validate(set.len())?;
    weights.check_len(set.len())?;
    set.check_metric(config.metric)?;
    let order = reference_order(set, config.metric, weights, config.k, config.gamma);
    SubsetSolution::evaluate(
        set,
        config.metric,
        weights,
        config.lambda,
        order,
        Algorithm::Duke,
        Some(config.gamma),
    )
}
