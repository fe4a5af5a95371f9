//! Randomized property harness: small instances are solved exactly and the
//! approximation guarantees of the selectors are checked against the optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{lowest_margin, submodular_value, EdgeSimilarity, DEFAULT_LAMBDA_S};
use crate::dataset::{DistanceMetric, EmbeddingSet, WeightVector};
use crate::error::{Error, Result};
use crate::nngraph::build_knn_graph;
use crate::oracle::Oracle;
use crate::parallel::{make_partition, parallel_weighted_kcenter, Execution, PartitionStrategy};
use crate::report::{fmt_sig, Report, Section};
use crate::wkcenter::{
    gamma_bounds, greedy_kcenter, kcenter_cost, weighted_kcenter, weighted_kcenter_pq,
    Neighborhood, SelectionConfig,
};

/// Relative slack for floating-point comparisons of objective values.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub n_max: usize,
    pub k_max: usize,
    pub seed: u64,
    pub lambdas: Vec<f64>,
    pub metrics: Vec<DistanceMetric>,
    /// Over-estimation factors applied to the optimal radius.
    pub alphas: Vec<f64>,
    /// Worker counts whose objective is bounded.
    pub machines: Vec<usize>,
    /// Worker counts whose objective ratio to the sequential run is only reported.
    pub degradation_machines: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            n_max: 14,
            k_max: 6,
            seed: 0,
            lambdas: vec![0.0, 0.1, 1.0],
            metrics: vec![DistanceMetric::Euclidean, DistanceMetric::Cosine],
            alphas: vec![1.5, 2.0],
            machines: vec![1, 2, 3],
            degradation_machines: vec![2, 4, 6, 8],
        }
    }
}

/// A replayable test instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub trial: usize,
    pub metric: DistanceMetric,
    pub k: usize,
    pub lambda: f64,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Instance {
    /// Draws a random instance. Half of the draws use small integer
    /// coordinates and quantized weights so that ties are common.
    pub fn random(cfg: &VerifyConfig, trial: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(
            cfg.seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let n = rng.random_range(2..=cfg.n_max.max(2));
        let k = rng.random_range(1..=cfg.k_max.clamp(1, n));
        let metric = cfg.metrics[trial % cfg.metrics.len()];
        let lambda = cfg.lambdas[(trial / cfg.metrics.len()) % cfg.lambdas.len()];
        let dim = rng.random_range(2..=3);
        let grid = rng.random_bool(0.5);
        let mut points = Vec::with_capacity(n);
        while points.len() < n {
            let p: Vec<f64> = (0..dim)
                .map(|_| {
                    if grid {
                        rng.random_range(-2..=2) as f64
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect();
            if metric == DistanceMetric::Cosine && p.iter().all(|&v| v == 0.0) {
                continue;
            }
            points.push(p);
        }
        let weights = (0..n)
            .map(|_| {
                if grid {
                    rng.random_range(0..=4) as f64 / 4.0
                } else {
                    rng.random()
                }
            })
            .collect();
        Self {
            trial,
            metric,
            k,
            lambda,
            points,
            weights,
        }
    }

    pub fn build(&self) -> Result<(EmbeddingSet<f64>, WeightVector<f64>)> {
        Ok((
            EmbeddingSet::from_rows(&self.points)?,
            WeightVector::new(self.weights.clone())?,
        ))
    }

    pub fn to_section(&self, name: &str) -> Section {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        let mut s = Section::new(name);
        s.put("trial", self.trial)
            .put("metric", self.metric)
            .put("k", self.k)
            .put("lambda", self.lambda)
            .put("weights", join(&self.weights));
        for (i, p) in self.points.iter().enumerate() {
            s.put(format!("point_{i}"), join(p));
        }
        s
    }

    pub fn from_section(s: &Section) -> Result<Self> {
        let field = |key: &str| {
            s.get(key).ok_or_else(|| Error::Report {
                line: 0,
                msg: format!("missing {key}"),
            })
        };
        let bad = |key: &str| Error::Report {
            line: 0,
            msg: format!("bad {key}"),
        };
        let floats = |text: &str, key: &str| -> Result<Vec<f64>> {
            text.split_whitespace()
                .map(|t| t.parse().map_err(|_| bad(key)))
                .collect()
        };
        let weights = floats(field("weights")?, "weights")?;
        let points = (0..weights.len())
            .map(|i| {
                let key = format!("point_{i}");
                floats(field(&key)?, &key)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            trial: field("trial")?.parse().map_err(|_| bad("trial"))?,
            metric: field("metric")?.parse()?,
            k: field("k")?.parse().map_err(|_| bad("k"))?,
            lambda: field("lambda")?.parse().map_err(|_| bad("lambda"))?,
            points,
            weights,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub detail: String,
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteStats {
    pub name: String,
    /// `None` for suites that only report measurements.
    pub bound: Option<f64>,
    /// False when the bound's proof needs the triangle inequality and the
    /// distance in use lacks it. Violations are still counted.
    pub enforced: bool,
    pub checks: usize,
    pub violations: usize,
    pub worst_ratio: Option<f64>,
    ratio_sum: f64,
    pub first_violation: Option<Violation>,
}

impl SuiteStats {
    fn new(name: String, bound: Option<f64>, enforced: bool) -> Self {
        Self {
            name,
            bound,
            enforced: enforced && bound.is_some(),
            checks: 0,
            violations: 0,
            worst_ratio: None,
            ratio_sum: 0.0,
            first_violation: None,
        }
    }

    pub fn asserted(&self) -> bool {
        self.enforced
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn mean_ratio(&self) -> Option<f64> {
        (self.checks > 0 && self.worst_ratio.is_some()).then(|| self.ratio_sum / self.checks as f64)
    }

    fn observe(
        &mut self,
        ratio: Option<f64>,
        ok: bool,
        instance: &Instance,
        detail: impl FnOnce() -> String,
    ) {
        self.checks += 1;
        if let Some(r) = ratio {
            self.ratio_sum += r;
            self.worst_ratio = Some(self.worst_ratio.map_or(r, |w| w.max(r)));
        }
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(Violation {
                    detail: detail(),
                    instance: instance.clone(),
                });
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySummary {
    pub config: VerifyConfig,
    pub suites: Vec<SuiteStats>,
}

impl VerifySummary {
    fn new(config: VerifyConfig) -> Self {
        Self {
            config,
            suites: Vec::new(),
        }
    }

    fn suite(&mut self, name: String, bound: Option<f64>, enforced: bool) -> &mut SuiteStats {
        match self.suites.iter().position(|s| s.name == name) {
            Some(i) => &mut self.suites[i],
            None => {
                self.suites.push(SuiteStats::new(name, bound, enforced));
                self.suites.last_mut().expect("just pushed")
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&SuiteStats> {
        self.suites.iter().find(|s| s.name == name)
    }

    /// Every suite whose name starts with `prefix`, across metrics.
    pub fn family<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a SuiteStats> + 'a {
        self.suites
            .iter()
            .filter(move |s| s.name == prefix || s.name.starts_with(&format!("{prefix}[")))
    }

    pub fn passed(&self) -> bool {
        self.suites
            .iter()
            .filter(|s| s.asserted())
            .all(SuiteStats::passed)
    }

    pub fn write_report(&self, report: &mut Report) {
        let c = &self.config;
        let list = |v: &[f64]| v.iter().map(|x| fmt_sig(*x)).collect::<Vec<_>>().join(" ");
        report
            .section("verify")
            .put("trials", c.trials)
            .put("n_max", c.n_max)
            .put("k_max", c.k_max)
            .put("seed", c.seed)
            .put("lambdas", list(&c.lambdas))
            .put(
                "metrics",
                c.metrics
                    .iter()
                    .map(|m| m.name())
                    .collect::<Vec<_>>()
                    .join(" "),
            )
            .put("alphas", list(&c.alphas))
            .put("tolerance", fmt_sig(TOLERANCE))
            .put("status", if self.passed() { "pass" } else { "fail" });
        for s in &self.suites {
            let sec = report.section(&format!("suite {}", s.name));
            sec.put(
                "kind",
                match (s.asserted(), s.bound) {
                    (true, _) => "asserted",
                    (false, Some(_)) => "reported-nonmetric",
                    (false, None) => "reported",
                },
            );
            if let Some(b) = s.bound {
                sec.num("bound", b);
            }
            sec.put("checks", s.checks).put("violations", s.violations);
            match s.worst_ratio {
                Some(r) => sec.num("worst_ratio", r),
                None => sec.put("worst_ratio", "none"),
            };
            if let Some(m) = s.mean_ratio() {
                sec.num("mean_ratio", m);
            }
            sec.put("status", if s.passed() { "pass" } else { "fail" });
        }
        for s in &self.suites {
            if let Some(v) = &s.first_violation {
                let mut sec = v.instance.to_section(&format!("violation {}", s.name));
                sec.entries.insert(0, ("detail".into(), v.detail.clone()));
                report.sections.push(sec);
            }
        }
    }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + TOLERANCE * b.abs().max(1.0)
}

fn ratio(achieved: f64, optimum: f64) -> f64 {
    if optimum > 0.0 {
        achieved / optimum
    } else if le(achieved, 0.0) {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Runs `cfg.trials` random instances through every suite.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifySummary> {
    if cfg.metrics.is_empty() || cfg.lambdas.is_empty() {
        return Err(Error::InvalidConfig(
            "need at least one metric and one lambda".into(),
        ));
    }
    if cfg.n_max < 2 || cfg.k_max == 0 {
        return Err(Error::InvalidConfig(
            "need n_max >= 2 and k_max >= 1".into(),
        ));
    }
    let mut summary = VerifySummary::new(cfg.clone());
    for trial in 0..cfg.trials {
        let instance = Instance::random(cfg, trial);
        check_instance(&instance, cfg, &mut summary)?;
    }
    Ok(summary)
}

/// Checks one instance against every suite, accumulating into `summary`.
pub fn check_instance(
    inst: &Instance,
    cfg: &VerifyConfig,
    summary: &mut VerifySummary,
) -> Result<()> {
    let (set, weights) = inst.build()?;
    let (n, k, lambda, metric) = (set.len(), inst.k, inst.lambda, inst.metric);
    let tag = |name: &str| format!("{name}[{}]", metric.name());
    let metric_ok = metric != DistanceMetric::Cosine;
    let oracle = Oracle::default();

    let opt = oracle.weighted(&set, metric, &weights, k, lambda)?;
    let gamma_star = opt.radius_term;
    let kc = oracle.kcenter(&set, metric, k)?;
    let gamma1 = kc.radius_term;

    // approximation at the optimal radius
    let cfg_star = SelectionConfig::new(k, lambda, gamma_star, metric);
    let seq = weighted_kcenter(&set, &weights, &cfg_star)?;
    {
        let r = ratio(seq.objective, opt.objective);
        let ok = le(seq.objective, 3.0 * opt.objective)
            && le(seq.weight_term, opt.weight_term)
            && le(seq.radius_term, 3.0 * gamma_star);
        summary
            .suite(tag("theorem1"), Some(3.0), metric_ok)
            .observe(Some(r), ok, inst, || {
                format!(
                    "objective {} vs optimum {}; weight {} vs {}; radius {} vs 3*gamma* {}",
                    fmt_sig(seq.objective),
                    fmt_sig(opt.objective),
                    fmt_sig(seq.weight_term),
                    fmt_sig(opt.weight_term),
                    fmt_sig(seq.radius_term),
                    fmt_sig(3.0 * gamma_star)
                )
            });
    }

    let pq = weighted_kcenter_pq(&set, &weights, &cfg_star, Neighborhood::ExactBall)?;
    summary
        .suite(tag("pq_equivalence"), Some(1.0), true)
        .observe(None, pq.indices == seq.indices, inst, || {
            format!(
                "pq {:?} vs reference {:?} at gamma {}",
                pq.indices,
                seq.indices,
                fmt_sig(gamma_star)
            )
        });

    for &alpha in &cfg.alphas {
        let over = weighted_kcenter(
            &set,
            &weights,
            &SelectionConfig::new(k, lambda, alpha * gamma_star, metric),
        )?;
        let bound = 3.0 * alpha;
        summary
            .suite(
                tag(&format!("overestimate_{alpha}")),
                Some(bound),
                metric_ok,
            )
            .observe(
                Some(ratio(over.objective, opt.objective)),
                le(over.objective, bound * opt.objective),
                inst,
                || {
                    format!(
                        "objective {} > {bound} x {}",
                        fmt_sig(over.objective),
                        fmt_sig(opt.objective)
                    )
                },
            );
    }

    // range of the optimal radius
    {
        let lightest = lowest_margin(&weights, k)?;
        let gamma2 = kcenter_cost(&set, metric, &lightest)?;
        let ok = le(gamma1, gamma_star) && le(gamma_star, gamma2);
        let r = ratio(gamma1, gamma_star).max(ratio(gamma_star, gamma2));
        summary
            .suite(tag("lemma"), Some(1.0), true)
            .observe(Some(r), ok, inst, || {
                format!(
                    "gamma1 {} gamma* {} gamma2 {}",
                    fmt_sig(gamma1),
                    fmt_sig(gamma_star),
                    fmt_sig(gamma2)
                )
            });

        // the bracket used by the grid search must contain both radii
        let (lo, hi) = gamma_bounds(&set, metric, &weights, k)?;
        let ok = le(lo, gamma1) && le(gamma_star, hi);
        summary
            .suite(tag("search_range"), Some(1.0), true)
            .observe(None, ok, inst, || {
                format!(
                    "[{}, {}] misses gamma1 {} or gamma* {}",
                    fmt_sig(lo),
                    fmt_sig(hi),
                    fmt_sig(gamma1),
                    fmt_sig(gamma_star)
                )
            });
    }

    for &m in cfg.machines.iter().filter(|&&m| m <= n) {
        let plan = make_partition(n, m, inst.trial as u64, PartitionStrategy::Random)?;
        let par =
            parallel_weighted_kcenter(&set, &weights, &cfg_star, &plan, Execution::Sequential)?;
        summary
            .suite(tag("parallel"), Some(14.0), metric_ok)
            .observe(
                Some(ratio(par.objective, opt.objective)),
                le(par.objective, 14.0 * opt.objective),
                inst,
                || {
                    format!(
                        "m={m}: objective {} > 14 x {}",
                        fmt_sig(par.objective),
                        fmt_sig(opt.objective)
                    )
                },
            );
        if m == 1 {
            summary
                .suite(tag("parallel_identity"), Some(1.0), true)
                .observe(None, par.indices == seq.indices, inst, || {
                    format!("m=1 {:?} vs sequential {:?}", par.indices, seq.indices)
                });
        }
    }

    for &m in cfg.degradation_machines.iter().filter(|&&m| m <= n) {
        let plan = make_partition(n, m, inst.trial as u64, PartitionStrategy::Random)?;
        let par =
            parallel_weighted_kcenter(&set, &weights, &cfg_star, &plan, Execution::Sequential)?;
        summary
            .suite(tag(&format!("degradation_m{m}")), None, true)
            .observe(
                Some(ratio(par.objective, seq.objective)),
                true,
                inst,
                String::new,
            );
    }

    {
        let greedy = greedy_kcenter(&set, metric, k, 0)?;
        summary
            .suite(tag("gonzalez"), Some(2.0), metric_ok)
            .observe(
                Some(ratio(greedy.radius_term, gamma1)),
                le(greedy.radius_term, 2.0 * gamma1),
                inst,
                || {
                    format!(
                        "greedy radius {} > 2 x {}",
                        fmt_sig(greedy.radius_term),
                        fmt_sig(gamma1)
                    )
                },
            );
    }

    // diminishing returns of the submodular baseline's objective
    {
        let graph = build_knn_graph(&set, 3.min(n - 1).max(1), metric)?;
        let sim = EdgeSimilarity::for_metric(&graph, metric);
        let utilities: Vec<f64> = weights.values().iter().map(|w| 1.0 - w).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(inst.trial as u64);
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let x = order[n - 1];
        let b_len = rng.random_range(0..n);
        let a_len = rng.random_range(0..=b_len);
        let (a, b) = (&order[..a_len], &order[..b_len]);
        let f = |s: &[usize]| submodular_value(&utilities, &sim, DEFAULT_LAMBDA_S, s);
        let with = |s: &[usize]| {
            let mut v = s.to_vec();
            v.push(x);
            v
        };
        let gain_a = f(&with(a)) - f(a);
        let gain_b = f(&with(b)) - f(b);
        summary.suite(tag("submodular"), Some(1.0), true).observe(
            None,
            le(gain_b, gain_a),
            inst,
            || {
                format!(
                    "gain on superset {} exceeds gain on subset {}",
                    fmt_sig(gain_b),
                    fmt_sig(gain_a)
                )
            },
        );
    }
    Ok(())
}

/// Re-runs the violating instance stored in a report section.
pub fn replay(section: &Section, cfg: &VerifyConfig) -> Result<VerifySummary> {
    let instance = Instance::from_section(section)?;
    let mut summary = VerifySummary::new(cfg.clone());
    check_instance(&instance, cfg, &mut summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_vacuous() {
        let summary = run_verify(&VerifyConfig {
            trials: 0,
            ..Default::default()
        })
        .unwrap();
        assert!(summary.suites.is_empty());
        assert!(summary.passed());
    }

    #[test]
    fn instances_are_reproducible_and_round_trip() {
        let cfg = VerifyConfig::default();
        let a = Instance::random(&cfg, 5);
        assert_eq!(a, Instance::random(&cfg, 5));
        let back = Instance::from_section(&a.to_section("x")).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn euclidean_suites_hold() {
        let cfg = VerifyConfig {
            trials: 40,
            metrics: vec![DistanceMetric::Euclidean],
            ..Default::default()
        };
        let summary = run_verify(&cfg).unwrap();
        for s in &summary.suites {
            assert!(s.passed(), "{}: {:?}", s.name, s.first_violation);
        }
        assert!(summary.get("theorem1[euclidean]").unwrap().checks == 40);
    }

    #[test]
    fn cosine_bounds_are_reported_not_enforced() {
        let cfg = VerifyConfig {
            trials: 60,
            metrics: vec![DistanceMetric::Cosine],
            ..Default::default()
        };
        let summary = run_verify(&cfg).unwrap();
        assert!(!summary.get("theorem1[cosine]").unwrap().asserted());
        assert!(summary.get("lemma[cosine]").unwrap().asserted());
        assert!(summary.passed());
    }

    #[test]
    fn violations_replay_from_report() {
        let cfg = VerifyConfig::default();
        let inst = Instance::random(&cfg, 3);
        let mut report = Report::new();
        report
            .sections
            .push(inst.to_section("violation theorem1[euclidean]"));
        let parsed = Report::parse(&report.to_string()).unwrap();
        let section = parsed.get_section("violation theorem1[euclidean]").unwrap();
        let summary = replay(section, &cfg).unwrap();
        assert_eq!(
            summary.family("theorem1").map(|s| s.checks).sum::<usize>(),
            1
        );
    }
}
