//! Exhaustive solvers used as ground truth on small instances.

use crate::dataset::{DistanceMetric, EmbeddingSet, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::wkcenter::check_budget;

pub const DEFAULT_SUBSET_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    /// Optimal subset in ascending index order.
    pub best_subset: Vec<usize>,
    pub objective: T,
    pub radius_term: T,
    pub weight_term: T,
    /// Subsets accounted for, pruned branches included; always `C(n, k)`.
    pub enumerated: u128,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Enumerates all `C(n, k)` subsets in lexicographic order, pruning branches
/// whose weight penalty alone already reaches the incumbent.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub cap: u128,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            cap: DEFAULT_SUBSET_CAP,
        }
    }
}

struct Search<'a, T> {
    n: usize,
    k: usize,
    lambda: T,
    dist: Vec<T>,
    weights: &'a [T],
    current: Vec<usize>,
    best: Option<(T, T, T, Vec<usize>)>,
    enumerated: u128,
}

impl<T: Scalar> Search<'_, T> {
    fn descend(&mut self, start: usize, partial_weight: T, near: &[T]) {
        let depth = self.current.len();
        if depth == self.k {
            let radius = near.iter().copied().fold(T::zero(), T::max);
            let objective = radius + self.lambda * partial_weight;
            self.enumerated += 1;
            if self.best.as_ref().is_none_or(|b| objective < b.0) {
                self.best = Some((objective, radius, partial_weight, self.current.clone()));
            }
            return;
        }
        let remaining = self.k - depth;
        for c in start..=(self.n - remaining) {
            let weight = partial_weight + self.weights[c];
            if let Some(best) = &self.best {
                if self.lambda * weight >= best.0 {
                    // no completion of this prefix can beat the incumbent
                    self.enumerated += binomial(self.n - c - 1, remaining - 1);
                    continue;
                }
            }
            let row = &self.dist[c * self.n..(c + 1) * self.n];
            let next: Vec<T> = near.iter().zip(row).map(|(&a, &b)| a.min(b)).collect();
            self.current.push(c);
            self.descend(c + 1, weight, &next);
            self.current.pop();
        }
    }
}

impl Oracle {
    pub fn with_cap(cap: u128) -> Self {
        Self { cap }
    }

    /// Exact minimizer of `radius + lambda * weight`; ties go to the
    /// lexicographically smallest subset.
    pub fn weighted<T: Scalar>(
        &self,
        set: &EmbeddingSet<T>,
        metric: DistanceMetric,
        weights: &WeightVector<T>,
        k: usize,
        lambda: T,
    ) -> Result<OracleResult<T>> {
        let n = set.len();
        check_budget(k, n)?;
        weights.check_len(n)?;
        set.check_metric(metric)?;
        if !(lambda >= T::zero() && lambda.is_finite()) {
            return Err(Error::InvalidConfig(
                "lambda must be finite and >= 0".into(),
            ));
        }
        let subsets = binomial(n, k);
        if subsets > self.cap {
            return Err(Error::InstanceTooLarge {
                subsets,
                cap: self.cap,
            });
        }
        let mut dist = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = set.distance(i, j, metric);
            }
        }
        let mut search = Search {
            n,
            k,
            lambda,
            dist,
            weights: weights.values(),
            current: Vec::with_capacity(k),
            best: None,
            enumerated: 0,
        };
        search.descend(0, T::zero(), &vec![T::infinity(); n]);
        let (objective, radius_term, weight_term, best_subset) =
            search.best.expect("at least one subset");
        debug_assert_eq!(search.enumerated, subsets);
        Ok(OracleResult {
            best_subset,
            objective,
            radius_term,
            weight_term,
            enumerated: search.enumerated,
        })
    }

    /// Exact k-center optimum; the weight term of the result is zero.
    pub fn kcenter<T: Scalar>(
        &self,
        set: &EmbeddingSet<T>,
        metric: DistanceMetric,
        k: usize,
    ) -> Result<OracleResult<T>> {
        let zero = WeightVector::uniform(set.len(), T::zero())?;
        self.weighted(set, metric, &zero, k, T::zero())
    }

    /// Radius of the optimal weighted solution.
    pub fn optimal_gamma<T: Scalar>(
        &self,
        set: &EmbeddingSet<T>,
        metric: DistanceMetric,
        weights: &WeightVector<T>,
        k: usize,
        lambda: T,
    ) -> Result<T> {
        Ok(self.weighted(set, metric, weights, k, lambda)?.radius_term)
    }
}

pub fn brute_force_weighted<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    weights: &WeightVector<T>,
    k: usize,
    lambda: T,
) -> Result<OracleResult<T>> {
    Oracle::default().weighted(set, metric, weights, k, lambda)
}

pub fn brute_force_kcenter<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    k: usize,
) -> Result<OracleResult<T>> {
    Oracle::default().kcenter(set, metric, k)
}

pub fn optimal_gamma<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    weights: &WeightVector<T>,
    k: usize,
    lambda: T,
) -> Result<T> {
    Oracle::default().optimal_gamma(set, metric, weights, k, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wkcenter::weighted_objective;

    const E: DistanceMetric = DistanceMetric::Euclidean;

    fn five() -> EmbeddingSet<f64> {
        EmbeddingSet::from_rows(&[0.0, 1.0, 2.0, 3.0, 10.0].map(|x| vec![x])).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(14, 6), 3003);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn line_kcenter_pair() {
        let r = brute_force_kcenter(&five(), E, 2).unwrap();
        assert_eq!(r.radius_term, 2.0);
        assert_eq!(r.best_subset, vec![1, 4]);
        assert_eq!(r.enumerated, 10);
    }

    #[test]
    fn two_points_one_center() {
        let set = EmbeddingSet::from_rows(&[vec![0.0f64], vec![10.0]]).unwrap();
        assert_eq!(brute_force_kcenter(&set, E, 1).unwrap().radius_term, 10.0);
    }

    #[test]
    fn full_budget() {
        let w = WeightVector::new(vec![0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let r = brute_force_weighted(&five(), E, &w, 5, 1.0).unwrap();
        assert_eq!(r.radius_term, 0.0);
        assert_eq!(r.weight_term, w.total(&[0, 1, 2, 3, 4]));
        assert_eq!(optimal_gamma(&five(), E, &w, 5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn cap_enforced() {
        let set =
            EmbeddingSet::from_rows(&(0..30).map(|x| vec![x as f64]).collect::<Vec<_>>()).unwrap();
        assert!(matches!(
            brute_force_kcenter(&set, E, 15),
            Err(Error::InstanceTooLarge {
                subsets: 155_117_520,
                ..
            })
        ));
        assert!(Oracle::with_cap(10).kcenter(&five(), E, 2).is_ok());
        assert!(Oracle::with_cap(9).kcenter(&five(), E, 2).is_err());
    }

    #[test]
    fn pruned_search_matches_plain_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.random_range(3..10);
            let k = rng.random_range(1..=n);
            let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
            let set = EmbeddingSet::from_rows(&rows).unwrap();
            let w = WeightVector::new((0..n).map(|_| rng.random()).collect()).unwrap();
            let lambda = [0.0, 0.1, 1.0, 10.0][rng.random_range(0..4)];
            let got = brute_force_weighted(&set, E, &w, k, lambda).unwrap();
            assert_eq!(got.enumerated, binomial(n, k));

            // plain lexicographic enumeration
            let mut best: Option<(f64, Vec<usize>)> = None;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let obj = weighted_objective(&set, E, &w, lambda, &s)
                    .unwrap()
                    .objective;
                let better = match &best {
                    None => true,
                    Some((b, bs)) => obj < *b || (obj == *b && s < *bs),
                };
                if better {
                    best = Some((obj, s));
                }
            }
            let (obj, subset) = best.unwrap();
            assert_eq!(got.objective, obj);
            assert_eq!(got.best_subset, subset);
        }
    }
}
