use super::{
    check_budget, greedy_kcenter, radius_unchecked, weighted_kcenter, SelectionConfig,
    SubsetSolution,
};
use crate::dataset::{DistanceMetric, EmbeddingSet, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest grid value; keeps the geometric grid away from zero.
pub const GAMMA_FLOOR: f64 = 1e-12;

/// `0.1 / k`.
pub fn default_lambda<T: Scalar>(k: usize) -> T {
    T::lit(0.1) / T::lit(k.max(1) as f64)
}

/// Bracket for the radius of the optimal weighted solution.
///
/// The upper end is the cost of the `k` lightest points, the `lambda -> inf`
/// solution. The lower end divides the greedy k-center radius from point 0
/// by its approximation factor, so it never exceeds the optimal k-center
/// radius. That factor is 2 for true metrics. Cosine distance is half the
/// squared chord between normalized vectors; greedy makes the same picks
/// under the chord metric, so the factor becomes `2^2 = 4`.
pub fn gamma_bounds<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    weights: &WeightVector<T>,
    k: usize,
) -> Result<(T, T)> {
    check_budget(k, set.len())?;
    weights.check_len(set.len())?;
    set.check_metric(metric)?;
    let lightest: Vec<usize> = weights.ascending_order().into_iter().take(k).collect();
    let hi = radius_unchecked(set, metric, &lightest);
    let factor = match metric {
        DistanceMetric::Cosine => 4.0,
        DistanceMetric::Euclidean | DistanceMetric::Manhattan => 2.0,
    };
    let lo = greedy_kcenter(set, metric, k, 0)?.radius_term / T::lit(factor);
    Ok((lo, hi))
}

/// `size` geometrically spaced values over `[max(lo, floor), max(hi, floor)]`.
/// A single-point grid sits at the geometric midpoint.
pub fn gamma_grid<T: Scalar>(lo: T, hi: T, size: usize) -> Result<Vec<T>> {
    if size == 0 {
        return Err(Error::InvalidConfig(
            "gamma grid needs at least one point".into(),
        ));
    }
    let floor = T::lit(GAMMA_FLOOR);
    let lo = lo.max(floor);
    let hi = hi.max(lo);
    if size == 1 {
        return Ok(vec![(lo * hi).sqrt()]);
    }
    let ratio = (hi / lo).ln();
    let last = T::lit((size - 1) as f64);
    let mut grid: Vec<T> = (0..size)
        .map(|i| lo * (ratio * T::lit(i as f64) / last).exp())
        .collect();
    // pin the endpoints exactly
    grid[0] = lo;
    grid[size - 1] = hi;
    Ok(grid)
}

#[derive(Debug, Clone)]
pub struct GammaSearch<T> {
    pub best: SubsetSolution<T>,
    /// `(gamma, objective)` for every grid point, in grid order.
    pub trace: Vec<(T, T)>,
}

/// Runs `select` at every grid value and keeps the lowest objective; ties go
/// to the earlier grid value.
pub fn gamma_search_with<T, F>(grid: &[T], mut select: F) -> Result<GammaSearch<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<SubsetSolution<T>>,
{
    let mut best: Option<SubsetSolution<T>> = None;
    let mut trace = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let solution = select(gamma)?;
        trace.push((gamma, solution.objective));
        if best
            .as_ref()
            .is_none_or(|b| solution.objective < b.objective)
        {
            best = Some(solution);
        }
    }
    let best = best.ok_or_else(|| Error::InvalidConfig("empty gamma grid".into()))?;
    Ok(GammaSearch { best, trace })
}

/// Grid search over `gamma` for the reference selector.
pub fn gamma_search<T: Scalar>(
    set: &EmbeddingSet<T>,
    metric: DistanceMetric,
    weights: &WeightVector<T>,
    k: usize,
    lambda: T,
    grid_size: usize,
) -> Result<GammaSearch<T>> {
    let (lo, hi) = gamma_bounds(set, metric, weights, k)?;
    let grid = gamma_grid(lo, hi, grid_size)?;
    gamma_search_with(&grid, |gamma| {
        weighted_kcenter(
            set,
            weights,
            &SelectionConfig::new(k, lambda, gamma, metric),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: DistanceMetric = DistanceMetric::Euclidean;

    fn five() -> EmbeddingSet<f64> {
        EmbeddingSet::from_rows(&[0.0, 1.0, 2.0, 3.0, 10.0].map(|x| vec![x])).unwrap()
    }

    #[test]
    fn lambda_defaults() {
        assert_eq!(default_lambda::<f64>(10), 0.01);
        assert_eq!(default_lambda::<f64>(1), 0.1);
        assert!((default_lambda::<f64>(4500) - 2.222_222e-5).abs() < 1e-10);
    }

    #[test]
    fn bounds_examples() {
        let set = five();
        let w = WeightVector::new(vec![0.1, 0.1, 1.0, 1.0, 1.0]).unwrap();
        let (lo, hi) = gamma_bounds(&set, E, &w, 2).unwrap();
        assert_eq!(hi, 9.0);
        // greedy from 0 picks {0, 10} with radius 3
        assert_eq!(lo, 1.5);

        assert_eq!(gamma_bounds(&set, E, &w, 5).unwrap(), (0.0, 0.0));

        let uniform = WeightVector::uniform(5, 0.5).unwrap();
        let (_, hi) = gamma_bounds(&set, E, &uniform, 3).unwrap();
        assert_eq!(hi, kcenter_cost_of(&set, &[0, 1, 2]));

        // cosine: greedy from (1,0) with one center has radius 2
        let ring =
            EmbeddingSet::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let flat = WeightVector::uniform(3, 0.5).unwrap();
        assert_eq!(
            gamma_bounds(&ring, DistanceMetric::Cosine, &flat, 1).unwrap(),
            (0.5, 2.0)
        );
    }

    fn kcenter_cost_of(set: &EmbeddingSet<f64>, c: &[usize]) -> f64 {
        crate::wkcenter::kcenter_cost(set, E, c).unwrap()
    }

    #[test]
    fn grid_shapes() {
        let g = gamma_grid(1.0f64, 128.0, 8).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!((g[0], g[7]), (1.0, 128.0));
        for w in g.windows(2) {
            assert!((w[1] / w[0] - 2.0).abs() < 1e-12);
        }
        assert_eq!(gamma_grid(2.0f64, 8.0, 1).unwrap(), vec![4.0]);
        assert_eq!(gamma_grid(0.0f64, 0.0, 3).unwrap(), vec![GAMMA_FLOOR; 3]);
        assert!(gamma_grid(1.0f64, 2.0, 0).is_err());
    }

    #[test]
    fn search_single_point_grid() {
        let set = five();
        let w = WeightVector::new(vec![0.1, 0.1, 1.0, 1.0, 1.0]).unwrap();
        let out = gamma_search(&set, E, &w, 2, 1.0, 1).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace[0].0, (1.5f64 * 9.0).sqrt());
        assert_eq!(out.best.gamma_used, Some(out.trace[0].0));
    }

    #[test]
    fn search_keeps_first_minimum() {
        let set = five();
        let w = WeightVector::uniform(5, 0.5).unwrap();
        let out = gamma_search(&set, E, &w, 2, 0.0, 8).unwrap();
        assert_eq!(out.trace.len(), 8);
        let min = out.trace.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        let first = out.trace.iter().find(|t| t.1 == min).unwrap();
        assert_eq!(out.best.objective, min);
        assert_eq!(out.best.gamma_used, Some(first.0));
    }
}
