//! Wall-clock scaling ladder for the priority-queue selector and the greedy
//! k-center baseline.

use std::time::Instant;

use crate::dataset::{DistanceMetric, EmbeddingSet, WeightVector};
use crate::error::{Error, Result};
use crate::instances::{generate, InstanceKind, SyntheticSpec, WeightScheme};
use crate::report::{fmt_sig, Report};
use crate::scalar::Scalar;
use crate::wkcenter::{greedy_kcenter, weighted_kcenter_pq, Neighborhood, SelectionConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub dim: usize,
    pub k: usize,
    /// Back-to-back pairs timed per ratio.
    pub reps: usize,
    pub seed: u64,
    pub metric: DistanceMetric,
    /// `gamma` as a fraction of the greedy radius on the smallest rung.
    /// Small values keep the exclusion balls from draining the queue early,
    /// so every rung does the full `k` rounds.
    pub gamma_fraction: f64,
    /// Also time `2k` on the largest rung.
    pub double_k: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![25_000, 50_000, 100_000, 200_000],
            dim: 64,
            k: 100,
            reps: 5,
            seed: 0,
            metric: DistanceMetric::Cosine,
            gamma_fraction: 0.05,
            double_k: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub k: usize,
    pub pq_ms: f64,
    pub greedy_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub config: BenchConfig,
    pub gamma: f64,
    /// Fastest time seen per rung over all measurements.
    pub rows: Vec<BenchRow>,
    /// `2k` on the largest rung.
    pub k_doubling: Option<BenchRow>,
    pq_ratios: Vec<f64>,
    greedy_ratios: Vec<f64>,
    k_doubling_ratio: Option<f64>,
}

impl BenchResult {
    /// Successive `t(n_{i+1}) / t(n_i)` for the selector: the median over
    /// repetitions of back-to-back pairs. Need not equal the quotient of the
    /// per-rung minima in `rows`.
    pub fn pq_ratios(&self) -> Vec<f64> {
        self.pq_ratios.clone()
    }

    pub fn greedy_ratios(&self) -> Vec<f64> {
        self.greedy_ratios.clone()
    }

    /// `t(2k) / t(k)` on the largest rung.
    pub fn k_doubling_ratio(&self) -> Option<f64> {
        self.k_doubling_ratio
    }

    pub fn write_report(&self, report: &mut Report) {
        let c = &self.config;
        report
            .section("bench")
            .put(
                "sizes",
                c.sizes
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
            )
            .put("dim", c.dim)
            .put("k", c.k)
            .put("reps", c.reps)
            .put("seed", c.seed)
            .put("metric", c.metric)
            .num("gamma", self.gamma);
        let t = report.section("timing");
        for r in &self.rows {
            t.num(format!("pq_ms_n{}", r.n), r.pq_ms)
                .num(format!("greedy_ms_n{}", r.n), r.greedy_ms);
        }
        if let Some(d) = &self.k_doubling {
            t.num(format!("pq_ms_n{}_k{}", d.n, d.k), d.pq_ms);
        }
        let join = |v: Vec<f64>| v.into_iter().map(fmt_sig).collect::<Vec<_>>().join(" ");
        let s = report.section("scaling");
        s.put("pq_ratios", join(self.pq_ratios()))
            .put("greedy_ratios", join(self.greedy_ratios()));
        if let Some(r) = self.k_doubling_ratio() {
            s.num("k_doubling_ratio", r);
        }
    }
}

fn time_ms<R>(f: impl FnOnce() -> Result<R>) -> Result<f64> {
    let start = Instant::now();
    std::hint::black_box(f()?);
    Ok(start.elapsed().as_secs_f64() * 1e3)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

fn instance<T: Scalar>(cfg: &BenchConfig, n: usize) -> Result<(EmbeddingSet<T>, WeightVector<T>)> {
    generate(&SyntheticSpec {
        kind: InstanceKind::UniformCube,
        n,
        dim: cfg.dim,
        clusters: 1,
        spread: 1.0,
        seed: cfg.seed,
        weights: WeightScheme::Uniform,
    })
}

/// Runs the ladder. Instances are uniform-cube points with uniform weights.
pub fn run_bench<T: Scalar>(cfg: &BenchConfig) -> Result<BenchResult> {
    if cfg.sizes.is_empty() {
        return Err(Error::InvalidConfig("bench needs at least one size".into()));
    }
    if !(cfg.gamma_fraction >= 0.0 && cfg.gamma_fraction.is_finite()) {
        return Err(Error::InvalidConfig(
            "gamma fraction must be finite and >= 0".into(),
        ));
    }
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    let lambda = T::lit(0.1 / cfg.k as f64);

    let instances: Vec<(EmbeddingSet<T>, WeightVector<T>)> = sizes
        .iter()
        .map(|&n| instance::<T>(cfg, n))
        .collect::<Result<_>>()?;
    let radius = greedy_kcenter(&instances[0].0, cfg.metric, cfg.k.min(sizes[0]), 0)?.radius_term;
    let gamma = radius * T::lit(cfg.gamma_fraction);

    let mut rows: Vec<BenchRow> = sizes
        .iter()
        .map(|&n| BenchRow {
            n,
            k: cfg.k,
            pq_ms: f64::INFINITY,
            greedy_ms: f64::INFINITY,
        })
        .collect();
    let config = SelectionConfig::new(cfg.k, lambda, gamma, cfg.metric);
    let measure = |rung: usize, rows: &mut [BenchRow]| -> Result<(f64, f64)> {
        let (set, weights) = &instances[rung];
        let g = time_ms(|| greedy_kcenter(set, cfg.metric, cfg.k, 0))?;
        let p = time_ms(|| weighted_kcenter_pq(set, weights, &config, Neighborhood::ExactBall))?;
        rows[rung].greedy_ms = rows[rung].greedy_ms.min(g);
        rows[rung].pq_ms = rows[rung].pq_ms.min(p);
        Ok((p, g))
    };

    // Shared machines drift between fast and slow stretches, so each ratio
    // comes from back-to-back runs of the two rungs; the median over
    // repetitions discards the odd lucky or unlucky run.
    let reps = cfg.reps.max(1);
    let (mut pq_ratios, mut greedy_ratios) = (Vec::new(), Vec::new());
    if sizes.len() == 1 {
        for _ in 0..reps {
            measure(0, &mut rows)?;
        }
    }
    for lo in 0..sizes.len().saturating_sub(1) {
        // warm-up, untimed for the ratios
        measure(lo, &mut rows)?;
        measure(lo + 1, &mut rows)?;
        let (mut pq, mut greedy) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
        for _ in 0..reps {
            let (p0, g0) = measure(lo, &mut rows)?;
            let (p1, g1) = measure(lo + 1, &mut rows)?;
            pq.push(p1 / p0);
            greedy.push(g1 / g0);
        }
        pq_ratios.push(median(pq));
        greedy_ratios.push(median(greedy));
    }

    let (mut k_doubling, mut k_doubling_ratio) = (None, None);
    if cfg.double_k {
        let (set, weights) = instances.last().expect("at least one rung");
        let k2 = (2 * cfg.k).min(set.len());
        let doubled = SelectionConfig::new(k2, lambda, gamma, cfg.metric);
        let run = |c: &SelectionConfig<T>| {
            time_ms(|| weighted_kcenter_pq(set, weights, c, Neighborhood::ExactBall))
        };
        let mut best = f64::INFINITY;
        let mut ratios = Vec::with_capacity(reps);
        for _ in 0..reps {
            let base = run(&config)?;
            let twice = run(&doubled)?;
            best = best.min(twice);
            ratios.push(twice / base);
        }
        k_doubling = Some(BenchRow {
            n: set.len(),
            k: k2,
            pq_ms: best,
            greedy_ms: f64::NAN,
        });
        k_doubling_ratio = Some(median(ratios));
    }

    Ok(BenchResult {
        config: BenchConfig {
            sizes,
            ..cfg.clone()
        },
        gamma: gamma.as_f64(),
        rows,
        k_doubling,
        pq_ratios,
        greedy_ratios,
        k_doubling_ratio,
    })
}
