//! Deterministic synthetic instances.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{EmbeddingSet, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The 14-point worked example in the plane (euclidean).
///
/// Two "red" clusters of weight 0.5, each a center with three unit-distance
/// satellites, sit 20 apart. Six "blue" points of weight 1.0 are placed at
/// distance 3 from a cluster center and exactly 2 from the nearest satellite.
/// With `k = 8`:
///
/// * the k-center optimum takes all blues plus both cluster centers, radius 1
///   and weight 7;
/// * at `lambda = 1` the weighted optimum takes all eight reds, radius 2 and
///   weight 4, objective 6.
///
/// Index order: red cluster A (center first), red cluster B (center first),
/// then the blues.
pub fn gen_figure1<T: Scalar>() -> (EmbeddingSet<T>, WeightVector<T>) {
    const POINTS: [[f64; 2]; 14] = [
        // red cluster A
        [0.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [-1.0, 0.0],
        // red cluster B
        [20.0, 0.0],
        [21.0, 0.0],
        [20.0, 1.0],
        [19.0, 0.0],
        // blue
        [3.0, 0.0],
        [0.0, 3.0],
        [-3.0, 0.0],
        [23.0, 0.0],
        [20.0, 3.0],
        [17.0, 0.0],
    ];
    let flat = POINTS.iter().flatten().map(|&v| T::lit(v)).collect();
    let set = EmbeddingSet::from_flat(flat, 2).expect("fixed fixture");
    let weights = (0..14)
        .map(|i| T::lit(if i < 8 { 0.5 } else { 1.0 }))
        .collect();
    (set, WeightVector::new(weights).expect("fixed fixture"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InstanceKind {
    Figure1,
    #[default]
    Clusters,
    UniformCube,
    Line,
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "figure1" => Ok(InstanceKind::Figure1),
            "clusters" => Ok(InstanceKind::Clusters),
            "uniform-cube" => Ok(InstanceKind::UniformCube),
            "line" => Ok(InstanceKind::Line),
            other => Err(Error::InvalidConfig(format!(
                "unknown instance kind {other:?}"
            ))),
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::Figure1 => "figure1",
            InstanceKind::Clusters => "clusters",
            InstanceKind::UniformCube => "uniform-cube",
            InstanceKind::Line => "line",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum WeightScheme {
    /// Every point gets the same weight.
    Constant(f64),
    /// Independent uniform draws in `[0, 1)`.
    #[default]
    Uniform,
    /// Cluster `c` of `m` gets weight `(c + 1) / m`.
    PerCluster,
    /// `1 / (1 + d / spread)` where `d` is the distance to the cluster
    /// centroid; points near a centroid look confident.
    CentroidDistance,
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(WeightScheme::Uniform),
            "per-cluster" => Ok(WeightScheme::PerCluster),
            "centroid-distance" => Ok(WeightScheme::CentroidDistance),
            other => other
                .strip_prefix("constant:")
                .and_then(|v| v.parse().ok())
                .map(WeightScheme::Constant)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown weight scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub kind: InstanceKind,
    pub n: usize,
    pub dim: usize,
    pub clusters: usize,
    /// Gaussian standard deviation for blobs, spacing for lines.
    pub spread: f64,
    pub seed: u64,
    pub weights: WeightScheme,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            kind: InstanceKind::Clusters,
            n: 100,
            dim: 2,
            clusters: 4,
            spread: 1.0,
            seed: 0,
            weights: WeightScheme::Uniform,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.kind == InstanceKind::Figure1 {
            return Ok(());
        }
        if self.n == 0 || self.dim == 0 {
            return Err(Error::InvalidConfig("n and dim must be positive".into()));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return Err(Error::InvalidConfig(
                "spread must be finite and >= 0".into(),
            ));
        }
        if self.kind == InstanceKind::Clusters && (self.clusters == 0 || self.clusters > self.n) {
            return Err(Error::InvalidConfig("need 1 <= clusters <= n".into()));
        }
        if self.kind != InstanceKind::Clusters
            && matches!(
                self.weights,
                WeightScheme::PerCluster | WeightScheme::CentroidDistance
            )
        {
            return Err(Error::InvalidConfig(format!(
                "weight scheme {:?} needs a clustered instance",
                self.weights
            )));
        }
        if let WeightScheme::Constant(c) = self.weights {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidConfig(
                    "constant weight must be finite and >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Generates an instance; identical specs give identical output.
pub fn generate<T: Scalar>(spec: &SyntheticSpec) -> Result<(EmbeddingSet<T>, WeightVector<T>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, dim) = (spec.n, spec.dim);
    let mut membership = vec![0usize; n];
    let mut centroid_dist = vec![0.0f64; n];
    let flat: Vec<f64> = match spec.kind {
        InstanceKind::Figure1 => {
            let (set, w) = gen_figure1::<T>();
            return Ok((set, w));
        }
        InstanceKind::UniformCube => (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
        InstanceKind::Line => (0..n)
            .flat_map(|i| (0..dim).map(move |d| if d == 0 { i as f64 * spec.spread } else { 0.0 }))
            .collect(),
        InstanceKind::Clusters => {
            let centroids: Vec<Vec<f64>> = (0..spec.clusters)
                .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
                .collect();
            let mut flat = Vec::with_capacity(n * dim);
            for i in 0..n {
                let c = i % spec.clusters;
                membership[i] = c;
                let mut sq = 0.0;
                for &mu in &centroids[c] {
                    let z: f64 = rng.sample(StandardNormal);
                    let offset = spec.spread * z;
                    sq += offset * offset;
                    flat.push(mu + offset);
                }
                centroid_dist[i] = sq.sqrt();
            }
            flat
        }
    };
    let weights: Vec<f64> = match spec.weights {
        WeightScheme::Constant(c) => vec![c; n],
        WeightScheme::Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
        WeightScheme::PerCluster => membership
            .iter()
            .map(|&c| (c + 1) as f64 / spec.clusters as f64)
            .collect(),
        WeightScheme::CentroidDistance => centroid_dist
            .iter()
            .map(|&d| {
                if spec.spread > 0.0 {
                    1.0 / (1.0 + d / spec.spread)
                } else {
                    1.0
                }
            })
            .collect(),
    };
    let set = EmbeddingSet::from_flat(flat.into_iter().map(T::lit).collect(), dim)?;
    let weights = WeightVector::new(weights.into_iter().map(T::lit).collect())?;
    Ok((set, weights))
}

pub fn gen_clusters<T: Scalar>(spec: &SyntheticSpec) -> Result<(EmbeddingSet<T>, WeightVector<T>)> {
    generate(&SyntheticSpec {
        kind: InstanceKind::Clusters,
        ..*spec
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DistanceMetric;
    use crate::wkcenter::kcenter_cost;

    #[test]
    fn figure1_layout() {
        let (set, w) = gen_figure1::<f64>();
        assert_eq!((set.len(), set.dim()), (14, 2));
        assert_eq!(w.total(&(0..8).collect::<Vec<_>>()), 4.0);
        let e = DistanceMetric::Euclidean;
        // each blue is exactly 2 from its nearest red satellite
        for blue in 8..14 {
            let nearest = (0..8)
                .map(|r| set.distance(blue, r, e))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(nearest, 2.0);
        }
        assert_eq!(
            kcenter_cost(&set, e, &(0..8).collect::<Vec<_>>()).unwrap(),
            2.0
        );
        let (set32, _) = gen_figure1::<f32>();
        assert_eq!(
            kcenter_cost(&set32, e, &[0, 4, 8, 9, 10, 11, 12, 13]).unwrap(),
            1.0f32
        );
    }

    #[test]
    fn zero_spread_collapses_blobs() {
        let spec = SyntheticSpec {
            n: 10,
            dim: 3,
            clusters: 2,
            spread: 0.0,
            seed: 4,
            ..Default::default()
        };
        let (set, _) = gen_clusters::<f64>(&spec).unwrap();
        // round-robin membership: 0 is in blob 0, 1 in blob 1
        assert_eq!(
            kcenter_cost(&set, DistanceMetric::Euclidean, &[0, 1]).unwrap(),
            0.0
        );
    }

    #[test]
    fn deterministic_by_seed() {
        let spec = SyntheticSpec {
            n: 50,
            dim: 4,
            weights: WeightScheme::CentroidDistance,
            seed: 9,
            ..Default::default()
        };
        let a = gen_clusters::<f64>(&spec).unwrap();
        let b = gen_clusters::<f64>(&spec).unwrap();
        assert_eq!(a, b);
        let c = gen_clusters::<f64>(&SyntheticSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a.0, c.0);
        assert!(a.1.values().iter().all(|&w| (0.0..=1.0).contains(&w)));
    }

    #[test]
    fn other_kinds() {
        let cube = SyntheticSpec {
            kind: InstanceKind::UniformCube,
            n: 20,
            dim: 5,
            ..Default::default()
        };
        let (set, _) = generate::<f32>(&cube).unwrap();
        assert!(set.features().iter().all(|v| (-1.0..1.0).contains(v)));

        let line = SyntheticSpec {
            kind: InstanceKind::Line,
            n: 4,
            dim: 1,
            spread: 2.0,
            weights: WeightScheme::Constant(0.5),
            ..Default::default()
        };
        let (set, w) = generate::<f64>(&line).unwrap();
        assert_eq!(set.features(), &[0.0, 2.0, 4.0, 6.0]);
        assert_eq!(w.values(), &[0.5; 4]);

        let bad = SyntheticSpec {
            weights: WeightScheme::PerCluster,
            ..line
        };
        assert!(generate::<f64>(&bad).is_err());
        assert!(generate::<f64>(&SyntheticSpec { n: 0, ..cube }).is_err());
        assert!("constant:0.25".parse::<WeightScheme>().unwrap() == WeightScheme::Constant(0.25));
    }
}
