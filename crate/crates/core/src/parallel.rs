//! Partitioned weighted k-center: select per worker, then once more over the
//! union of the worker selections.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{EmbeddingSet, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::wkcenter::{reference_order, Algorithm, SelectionConfig, SubsetSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartitionStrategy {
    #[default]
    RoundRobin,
    Random,
}

impl fmt::Display for PartitionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionStrategy::RoundRobin => "round-robin",
            PartitionStrategy::Random => "random",
        })
    }
}

impl FromStr for PartitionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "round-robin" => Ok(PartitionStrategy::RoundRobin),
            "random" => Ok(PartitionStrategy::Random),
            other => Err(Error::InvalidConfig(format!(
                "unknown partition strategy {other:?}"
            ))),
        }
    }
}

/// Assignment of every point to one of `m` workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    m: usize,
    assignment: Vec<usize>,
    seed: u64,
}

impl PartitionPlan {
    pub fn machines(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Members of each worker in ascending index order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut parts = vec![Vec::new(); self.m];
        for (i, &w) in self.assignment.iter().enumerate() {
            parts[w].push(i);
        }
        parts
    }
}

/// Balanced partition: worker sizes differ by at most one.
pub fn make_partition(
    n: usize,
    m: usize,
    seed: u64,
    strategy: PartitionStrategy,
) -> Result<PartitionPlan> {
    if m == 0 {
        return Err(Error::InvalidConfig("need at least one worker".into()));
    }
    if m > n {
        return Err(Error::TooManyWorkers { m, n });
    }
    let assignment = match strategy {
        PartitionStrategy::RoundRobin => (0..n).map(|i| i % m).collect(),
        PartitionStrategy::Random => {
            let mut slots: Vec<usize> = (0..n).map(|i| i % m).collect();
            slots.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            slots
        }
    };
    Ok(PartitionPlan {
        m,
        assignment,
        seed,
    })
}

/// How worker selections are executed. Both modes give identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Threaded,
}

fn select_on<T: Scalar>(
    members: &[usize],
    set: &EmbeddingSet<T>,
    weights: &WeightVector<T>,
    config: &SelectionConfig<T>,
) -> Result<Vec<usize>> {
    let local_set = set.subset(members)?;
    let local_weights = WeightVector::new(members.iter().map(|&i| weights.get(i)).collect())?;
    let k = config.k.min(members.len());
    let order = reference_order(&local_set, config.metric, &local_weights, k, config.gamma);
    Ok(order.into_iter().map(|local| members[local]).collect())
}

/// Runs the reference selector on every partition with the shared `gamma`,
/// then on the union of the worker picks. Each worker's budget is capped at
/// its partition size. The returned solution is scored over the full set.
pub fn parallel_weighted_kcenter<T: Scalar>(
    set: &EmbeddingSet<T>,
    weights: &WeightVector<T>,
    config: &SelectionConfig<T>,
    plan: &PartitionPlan,
    execution: Execution,
) -> Result<SubsetSolution<T>> {
    config.validate(set.len())?;
    weights.check_len(set.len())?;
    set.check_metric(config.metric)?;
    if plan.assignment.len() != set.len() {
        return Err(Error::LengthMismatch {
            what: "partition plan".into(),
            expected: set.len(),
            found: plan.assignment.len(),
        });
    }

    let parts = plan.members();
    let candidates: Vec<Vec<usize>> = match execution {
        Execution::Sequential => parts
            .iter()
            .map(|members| select_on(members, set, weights, config))
            .collect::<Result<_>>()?,
        Execution::Threaded => parts
            .par_iter()
            .map(|members| select_on(members, set, weights, config))
            .collect::<Result<_>>()?,
    };

    let flat: Vec<usize> = candidates.iter().flatten().copied().collect();
    let indices = if flat.len() <= config.k {
        // the reducer would have to keep every candidate
        flat
    } else {
        let mut union = flat;
        union.sort_unstable();
        select_on(&union, set, weights, config)?
    };

    let mut solution = SubsetSolution::evaluate(
        set,
        config.metric,
        weights,
        config.lambda,
        indices,
        Algorithm::Parallel,
        Some(config.gamma),
    )?;
    solution.machines = Some(plan.m);
    solution.worker_candidates = candidates;
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DistanceMetric;
    use crate::wkcenter::weighted_kcenter;

    #[test]
    fn round_robin_layout() {
        let plan = make_partition(10, 2, 0, PartitionStrategy::RoundRobin).unwrap();
        assert_eq!(
            plan.members(),
            vec![vec![0, 2, 4, 6, 8], vec![1, 3, 5, 7, 9]]
        );
        let single = make_partition(4, 1, 0, PartitionStrategy::Random).unwrap();
        assert_eq!(single.assignment(), &[0, 0, 0, 0]);
    }

    #[test]
    fn balanced_sizes() {
        for strategy in [PartitionStrategy::RoundRobin, PartitionStrategy::Random] {
            let plan = make_partition(7, 3, 5, strategy).unwrap();
            let mut sizes: Vec<usize> = plan.members().iter().map(Vec::len).collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            assert_eq!(sizes, vec![3, 2, 2]);
        }
        assert!(matches!(
            make_partition(3, 4, 0, PartitionStrategy::RoundRobin),
            Err(Error::TooManyWorkers { m: 4, n: 3 })
        ));
    }

    #[test]
    fn random_partition_depends_on_seed_only() {
        let a = make_partition(50, 4, 9, PartitionStrategy::Random).unwrap();
        let b = make_partition(50, 4, 9, PartitionStrategy::Random).unwrap();
        let c = make_partition(50, 4, 10, PartitionStrategy::Random).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.assignment(), c.assignment());
    }

    fn sample() -> (EmbeddingSet<f64>, WeightVector<f64>) {
        let xs = [0.0, 0.4, 3.0, 3.2, 7.0, 7.1, 12.0, 12.5, 20.0];
        let set = EmbeddingSet::from_rows(&xs.map(|x| vec![x])).unwrap();
        let w = WeightVector::new(vec![0.9, 0.2, 0.5, 0.6, 0.1, 0.3, 0.8, 0.4, 0.7]).unwrap();
        (set, w)
    }

    #[test]
    fn single_worker_equals_sequential() {
        let (set, w) = sample();
        for gamma in [0.3, 1.0, 2.5] {
            let cfg = SelectionConfig::new(4, 1.0, gamma, DistanceMetric::Euclidean);
            let plan = make_partition(set.len(), 1, 0, PartitionStrategy::RoundRobin).unwrap();
            let par =
                parallel_weighted_kcenter(&set, &w, &cfg, &plan, Execution::Sequential).unwrap();
            let seq = weighted_kcenter(&set, &w, &cfg).unwrap();
            assert_eq!(par.indices, seq.indices);
            assert_eq!(par.machines, Some(1));
        }
    }

    #[test]
    fn threaded_matches_sequential_and_small_partitions_clamp() {
        let (set, w) = sample();
        let cfg = SelectionConfig::new(4, 0.5, 1.0, DistanceMetric::Euclidean);
        for m in 1..=5 {
            let plan = make_partition(set.len(), m, 3, PartitionStrategy::Random).unwrap();
            let a =
                parallel_weighted_kcenter(&set, &w, &cfg, &plan, Execution::Sequential).unwrap();
            let b = parallel_weighted_kcenter(&set, &w, &cfg, &plan, Execution::Threaded).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.indices.len(), 4);
            let union: usize = a.worker_candidates.iter().map(Vec::len).sum();
            assert!(union <= 4 * m);
            for (cands, members) in a.worker_candidates.iter().zip(plan.members()) {
                assert_eq!(cands.len(), 4.min(members.len()));
            }
        }
    }
}
