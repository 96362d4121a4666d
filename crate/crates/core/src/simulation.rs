//! Monotone synthetic models, data generation and Monte-Carlo error/power
//! estimates.
//!
//! A model fixes `η(x)` on the whole lattice `{0,1}^d`, an exposure
//! distribution and the fraction of observations labelled red. Monotonicity
//! is checked on every cover pair `x ⋖ x + e_i` at construction.
//!
//! Replicate `r` of a run with seed `s` draws from ChaCha8 stream `r` of key
//! `s`, so every replicate is reproducible on its own and the result does not
//! depend on scheduling. Rates carry 95% Wilson intervals.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Group, Observation};
use crate::error::{Error, Result};
use crate::evidence::{NeighborOrder, PValueKernel, ThresholdConfig};
use crate::lattice::{BinaryProfile, ParentStrategy};
use crate::testing::iss_with_kernel;
use crate::turnover::{run_turnover_with, TurnoverConfig};

/// Largest dimension with a tabulated model.
pub const MAX_MODEL_DIMENSION: usize = 20;

/// Sequences up to this length use a precomputed p-value table.
pub const KERNEL_TABLE_LIMIT: usize = 4096;

const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaLevel {
    pub generator: BinaryProfile,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaEntry {
    pub profile: BinaryProfile,
    pub eta: f64,
}

/// How `η` is specified in a model file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaSpec {
    Constant(f64),
    /// `η(x) = max(base, max{eta : generator ⪯ x})`.
    UpSet { base: f64, levels: Vec<EtaLevel> },
    /// Every profile listed explicitly.
    Table(Vec<EtaEntry>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedProfile {
    pub profile: BinaryProfile,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exposure {
    /// Independent coordinates with these rates.
    Bernoulli(Vec<f64>),
    /// Profiles drawn in proportion to their weights.
    Profiles(Vec<WeightedProfile>),
}

fn default_red_fraction() -> f64 {
    0.5
}

/// Model file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dimension: usize,
    pub eta: EtaSpec,
    pub exposure: Exposure,
    #[serde(default = "default_red_fraction")]
    pub red_fraction: f64,
}

/// A validated model with `η` tabulated by profile bits.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticModel {
    spec: ModelSpec,
    eta: Vec<f64>,
    /// Cumulative weights for `Exposure::Profiles`.
    cumulative: Vec<(u32, f64)>,
}

fn check_probability(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            expected: "0 <= x <= 1",
        })
    }
}

impl SyntheticModel {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let d = spec.dimension;
        if d == 0 || d > MAX_MODEL_DIMENSION {
            return Err(Error::UnsupportedDimension(d));
        }
        check_probability("red_fraction", spec.red_fraction)?;
        let size = 1usize << d;
        let profile = |bits: usize| BinaryProfile::new(d, bits as u32);
        let eta: Vec<f64> = match &spec.eta {
            EtaSpec::Constant(v) => vec![*v; size],
            EtaSpec::UpSet { base, levels } => {
                for l in levels {
                    if l.generator.dimension() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: l.generator.dimension(),
                        });
                    }
                }
                (0..size)
                    .map(|bits| {
                        let x = profile(bits)?;
                        Ok(levels
                            .iter()
                            .filter(|l| l.generator.precedes(&x))
                            .fold(*base, |m, l| m.max(l.eta)))
                    })
                    .collect::<Result<_>>()?
            }
            EtaSpec::Table(entries) => {
                let mut table = vec![f64::NAN; size];
                for e in entries {
                    if e.profile.dimension() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: e.profile.dimension(),
                        });
                    }
                    let slot = &mut table[e.profile.bits() as usize];
                    if !slot.is_nan() {
                        return Err(Error::DuplicateProfile(e.profile.to_string()));
                    }
                    *slot = e.eta;
                }
                if let Some(bits) = table.iter().position(|v| v.is_nan()) {
                    return Err(Error::InvalidConfig(format!("eta table has no entry for {}", profile(bits)?)));
                }
                table
            }
        };
        for &v in &eta {
            check_probability("eta", v)?;
        }
        for bits in 0..size {
            for i in 0..d {
                let up = bits | (1 << i);
                if up != bits && eta[bits] > eta[up] {
                    return Err(Error::NonMonotoneModel {
                        lower: profile(bits)?.to_string(),
                        upper: profile(up)?.to_string(),
                        lower_value: eta[bits],
                        upper_value: eta[up],
                    });
                }
            }
        }
        let cumulative = match &spec.exposure {
            Exposure::Bernoulli(rates) => {
                if rates.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: rates.len(),
                    });
                }
                for &r in rates {
                    check_probability("exposure", r)?;
                }
                Vec::new()
            }
            Exposure::Profiles(weights) => {
                let mut acc = 0.0;
                let mut cum = Vec::with_capacity(weights.len());
                for w in weights {
                    if w.profile.dimension() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: w.profile.dimension(),
                        });
                    }
                    if !(w.weight >= 0.0 && w.weight.is_finite()) {
                        return Err(Error::OutOfRange {
                            name: "weight",
                            value: w.weight,
                            expected: "finite and >= 0",
                        });
                    }
                    acc += w.weight;
                    cum.push((w.profile.bits(), acc));
                }
                if acc <= 0.0 {
                    return Err(Error::InvalidConfig("exposure weights sum to zero".into()));
                }
                cum
            }
        };
        Ok(Self { spec, eta, cumulative })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn eta(&self, x: &BinaryProfile) -> f64 {
        self.eta[x.bits() as usize]
    }

    pub fn sup_eta(&self) -> f64 {
        self.eta.iter().copied().fold(0.0, f64::max)
    }

    /// Profiles with `η(x) ≥ τ`.
    pub fn signal_profiles(&self, tau: f64) -> Vec<BinaryProfile> {
        (0..self.eta.len())
            .filter(|&b| self.eta[b] >= tau)
            .map(|b| BinaryProfile::new(self.dimension(), b as u32).expect("valid bits"))
            .collect()
    }

    fn draw_profile<R: Rng>(&self, rng: &mut R) -> u32 {
        match &self.spec.exposure {
            Exposure::Bernoulli(rates) => {
                let d = self.dimension();
                let mut bits = 0u32;
                for (i, &r) in rates.iter().enumerate() {
                    if rng.random::<f64>() < r {
                        bits |= 1 << (d - 1 - i);
                    }
                }
                bits
            }
            Exposure::Profiles(_) => {
                let total = self.cumulative.last().expect("non-empty").1;
                let u = rng.random::<f64>() * total;
                let i = self.cumulative.partition_point(|&(_, c)| c <= u);
                self.cumulative[i.min(self.cumulative.len() - 1)].0
            }
        }
    }

    fn generate_with<R: Rng>(&self, n: usize, rng: &mut R) -> Dataset {
        let d = self.dimension();
        let n_red = (n as f64 * self.spec.red_fraction).round() as usize;
        let observations = (0..n)
            .map(|i| {
                let bits = self.draw_profile(rng);
                let y = rng.random::<f64>() < self.eta[bits as usize];
                let group = if i < n_red { Group::Red } else { Group::Blue };
                Observation::new(BinaryProfile::new(d, bits).expect("valid bits"), y).in_group(group)
            })
            .collect();
        Dataset::new(d, observations).expect("dimension checked")
    }
}

/// Generator for replicate `replicate` under `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// `n` observations; the first `round(n · red_fraction)` are red.
pub fn generate(model: &SyntheticModel, n: usize, seed: u64) -> Dataset {
    model.generate_with(n, &mut replicate_rng(seed, 0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// Single-sample ISS over all observations.
    Iss,
    #[default]
    Turnover,
}

/// What counts as finding a profile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Finding {
    /// Rejected by ISS, or in at least one turnover direction.
    Rejected,
    /// Replicable turnover finding; the same as `Rejected` for ISS.
    #[default]
    Replicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub pipeline: Pipeline,
    /// Observations per replicate, both groups together.
    pub n: usize,
    pub thresholds: ThresholdConfig,
    pub strategy: ParentStrategy,
    /// Hypotheses; the whole lattice when absent.
    pub candidates: Option<Vec<BinaryProfile>>,
    pub order: NeighborOrder,
    pub finding: Finding,
}

impl SimulationConfig {
    pub fn new(pipeline: Pipeline, n: usize, thresholds: ThresholdConfig, strategy: ParentStrategy) -> Self {
        Self {
            pipeline,
            n,
            thresholds,
            strategy,
            candidates: None,
            order: NeighborOrder::default(),
            finding: Finding::default(),
        }
    }

    pub fn with_strategy(&self, strategy: ParentStrategy) -> Self {
        Self {
            strategy,
            ..self.clone()
        }
    }

    fn candidates(&self, model: &SyntheticModel) -> Result<Vec<BinaryProfile>> {
        match &self.candidates {
            Some(c) => {
                for x in c {
                    if x.dimension() != model.dimension() {
                        return Err(Error::DimensionMismatch {
                            expected: model.dimension(),
                            found: x.dimension(),
                        });
                    }
                }
                Ok(c.clone())
            }
            None => BinaryProfile::all(model.dimension()),
        }
    }
}

/// Kernel for sequences of at most `n` outcomes; tabulated when small.
pub fn kernel_for(tau: f64, n: usize) -> Result<PValueKernel> {
    if n <= KERNEL_TABLE_LIMIT {
        PValueKernel::with_table(tau, n)
    } else {
        PValueKernel::new(tau)
    }
}

/// Profiles found in one replicate, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplicateOutcome {
    pub rejected: Vec<BinaryProfile>,
    pub replicable: Vec<BinaryProfile>,
}

impl ReplicateOutcome {
    pub fn found(&self, finding: Finding) -> &[BinaryProfile] {
        match finding {
            Finding::Rejected => &self.rejected,
            Finding::Replicable => &self.replicable,
        }
    }
}

/// Generates replicate `replicate` and runs the configured pipeline on it.
pub fn run_replicate(
    model: &SyntheticModel,
    config: &SimulationConfig,
    kernel: &PValueKernel,
    candidates: &[BinaryProfile],
    seed: u64,
    replicate: u64,
) -> Result<ReplicateOutcome> {
    let mut rng = replicate_rng(seed, replicate);
    let forest_seed = rng.next_u64();
    let data = model.generate_with(config.n, &mut rng);
    match config.pipeline {
        Pipeline::Iss => {
            let out = iss_with_kernel(
                kernel,
                config.order,
                &data,
                candidates,
                config.thresholds.alpha,
                config.strategy,
                forest_seed,
            )?;
            let mut rejected = out.rejections.rejected_profiles(&out.forest);
            rejected.sort();
            Ok(ReplicateOutcome {
                replicable: rejected.clone(),
                rejected,
            })
        }
        Pipeline::Turnover => {
            let mut cfg = TurnoverConfig::new(config.thresholds, forest_seed);
            cfg.strategy = config.strategy;
            cfg.order = config.order;
            let report = run_turnover_with(kernel, &data, candidates, &cfg)?;
            Ok(ReplicateOutcome {
                rejected: report.global_null,
                replicable: report.replicable,
            })
        }
    }
}

/// Runs every replicate, in parallel, returning outcomes in replicate order.
pub fn run_replicates(
    model: &SyntheticModel,
    config: &SimulationConfig,
    replicates: usize,
    seed: u64,
) -> Result<Vec<ReplicateOutcome>> {
    config.thresholds.validate()?;
    let candidates = config.candidates(model)?;
    if replicates == 0 {
        return Ok(Vec::new());
    }
    let max_k = match config.pipeline {
        Pipeline::Iss => config.n,
        Pipeline::Turnover => {
            let red = (config.n as f64 * model.spec.red_fraction).round() as usize;
            red.max(config.n - red)
        }
    };
    let kernel = kernel_for(config.thresholds.tau, max_k)?;
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(model, config, &kernel, &candidates, seed, r))
        .collect()
}

/// Binomial rate with a 95% Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub strategy: ParentStrategy,
    /// Profile the rate refers to; `None` for "any profile".
    pub node: Option<BinaryProfile>,
    pub hits: usize,
    pub replicates: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub fn new(strategy: ParentStrategy, node: Option<BinaryProfile>, hits: usize, replicates: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, replicates);
        Self {
            strategy,
            node,
            hits,
            replicates,
            rate: if replicates == 0 { 0.0 } else { hits as f64 / replicates as f64 },
            ci_low,
            ci_high,
        }
    }
}

/// 95% Wilson score interval; `(0, 1)` with no trials.
pub fn wilson_interval(hits: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let low = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if hits == trials { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

/// Fraction of replicates with any rejection. The model must be a global
/// null: `sup η < τ`.
pub fn estimate_fwer(
    model: &SyntheticModel,
    config: &SimulationConfig,
    replicates: usize,
    seed: u64,
) -> Result<RateEstimate> {
    let sup = model.sup_eta();
    if sup >= config.thresholds.tau {
        return Err(Error::InvalidConfig(format!(
            "sup eta = {sup} is not below tau = {}; the run would not measure FWER",
            config.thresholds.tau
        )));
    }
    let outcomes = run_replicates(model, config, replicates, seed)?;
    let hits = outcomes.iter().filter(|o| !o.rejected.is_empty()).count();
    Ok(RateEstimate::new(config.strategy, None, hits, replicates))
}

/// How often `target` is found.
pub fn estimate_power(
    model: &SyntheticModel,
    config: &SimulationConfig,
    target: &BinaryProfile,
    replicates: usize,
    seed: u64,
) -> Result<RateEstimate> {
    let outcomes = run_replicates(model, config, replicates, seed)?;
    let hits = outcomes
        .iter()
        .filter(|o| o.found(config.finding).binary_search(target).is_ok())
        .count();
    Ok(RateEstimate::new(config.strategy, Some(*target), hits, replicates))
}

/// Per-strategy finding rate for every true-signal candidate. All strategies
/// see the same datasets. Zero replicates give an empty table.
pub fn compare_strategies(
    model: &SyntheticModel,
    config: &SimulationConfig,
    strategies: &[ParentStrategy],
    replicates: usize,
    seed: u64,
) -> Result<Vec<RateEstimate>> {
    if replicates == 0 {
        return Ok(Vec::new());
    }
    let signals: Vec<BinaryProfile> = config
        .candidates(model)?
        .into_iter()
        .filter(|x| model.eta(x) >= config.thresholds.tau)
        .collect();
    let mut rows = Vec::new();
    for &strategy in strategies {
        let cfg = config.with_strategy(strategy);
        let outcomes = run_replicates(model, &cfg, replicates, seed)?;
        for x in &signals {
            let hits = outcomes
                .iter()
                .filter(|o| o.found(cfg.finding).binary_search(x).is_ok())
                .count();
            rows.push(RateEstimate::new(strategy, Some(*x), hits, replicates));
        }
    }
    Ok(rows)
}

/// CSV with header `strategy,node,rejections,replicates,rate,ci_low,ci_high`;
/// `node` is `any` for FWER rows.
pub fn write_results_csv<W: Write>(rows: &[RateEstimate], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["strategy", "node", "rejections", "replicates", "rate", "ci_low", "ci_high"])?;
    for r in rows {
        w.write_record([
            r.strategy.name().to_string(),
            r.node.map_or_else(|| "any".to_string(), |x| x.to_string()),
            r.hits.to_string(),
            r.replicates.to_string(),
            r.rate.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn default_c() -> f64 {
    2.0
}
fn default_p0() -> f64 {
    0.094
}
fn default_alpha() -> f64 {
    0.05
}
fn default_kappa() -> f64 {
    0.025
}
fn default_strategies() -> Vec<ParentStrategy> {
    vec![ParentStrategy::PGuided]
}

/// Simulation file: a model plus the pipeline settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub model: ModelSpec,
    #[serde(default)]
    pub pipeline: Pipeline,
    pub n: usize,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_p0")]
    pub p0: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// The first entry is used outside strategy comparisons.
    #[serde(default = "default_strategies")]
    pub strategies: Vec<ParentStrategy>,
    #[serde(default)]
    pub candidates: Option<Vec<BinaryProfile>>,
    /// Profile whose power is estimated.
    #[serde(default)]
    pub target: Option<BinaryProfile>,
    #[serde(default)]
    pub finding: Finding,
}

impl SimulationSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        if spec.strategies.is_empty() {
            return Err(Error::InvalidConfig("at least one strategy is required".into()));
        }
        Ok(spec)
    }

    pub fn model(&self) -> Result<SyntheticModel> {
        SyntheticModel::new(self.model.clone())
    }

    pub fn config(&self) -> Result<SimulationConfig> {
        let thresholds = ThresholdConfig::from_odds(self.c, self.p0, self.alpha, self.kappa)?;
        let mut cfg = SimulationConfig::new(self.pipeline, self.n, thresholds, self.strategies[0]);
        cfg.candidates = self.candidates.clone();
        cfg.finding = self.finding;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> BinaryProfile {
        s.parse().unwrap()
    }

    fn constant(d: usize, eta: f64) -> SyntheticModel {
        SyntheticModel::new(ModelSpec {
            dimension: d,
            eta: EtaSpec::Constant(eta),
            exposure: Exposure::Bernoulli(vec![0.3; d]),
            red_fraction: 0.5,
        })
        .unwrap()
    }

    #[test]
    fn degenerate_outcomes() {
        assert!(generate(&constant(3, 0.0), 500, 1).observations().iter().all(|o| !o.outcome));
        assert!(generate(&constant(3, 1.0), 500, 1).observations().iter().all(|o| o.outcome));
    }

    #[test]
    fn generation_is_seeded() {
        let m = constant(4, 0.3);
        assert_eq!(generate(&m, 300, 9), generate(&m, 300, 9));
        assert_ne!(generate(&m, 300, 9), generate(&m, 300, 10));
    }

    #[test]
    fn group_split_is_exact() {
        let mut spec = constant(2, 0.3).spec().clone();
        spec.red_fraction = 0.3;
        let data = generate(&SyntheticModel::new(spec).unwrap(), 1000, 2);
        let (red, blue) = data.split_by_group().unwrap();
        assert_eq!((red.len(), blue.len()), (300, 700));
    }

    #[test]
    fn up_set_levels() {
        let m = SyntheticModel::new(ModelSpec {
            dimension: 3,
            eta: EtaSpec::UpSet {
                base: 0.1,
                levels: vec![
                    EtaLevel { generator: p("110"), eta: 0.3 },
                    EtaLevel { generator: p("010"), eta: 0.2 },
                ],
            },
            exposure: Exposure::Bernoulli(vec![0.5; 3]),
            red_fraction: 0.5,
        })
        .unwrap();
        assert_eq!(m.eta(&p("000")), 0.1);
        assert_eq!(m.eta(&p("011")), 0.2);
        assert_eq!(m.eta(&p("111")), 0.3);
        assert_eq!(m.signal_profiles(0.25), vec![p("110"), p("111")]);
    }

    #[test]
    fn non_monotone_table_names_the_pair() {
        let mut entries: Vec<EtaEntry> = BinaryProfile::all(2)
            .unwrap()
            .into_iter()
            .map(|x| EtaEntry { profile: x, eta: 0.1 * x.weight() as f64 })
            .collect();
        entries[1].eta = 0.5; // profile 01
        let err = SyntheticModel::new(ModelSpec {
            dimension: 2,
            eta: EtaSpec::Table(entries),
            exposure: Exposure::Bernoulli(vec![0.5; 2]),
            red_fraction: 0.5,
        })
        .unwrap_err();
        match err {
            Error::NonMonotoneModel { lower, upper, .. } => {
                assert_eq!((lower.as_str(), upper.as_str()), ("01", "11"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn profile_exposure_draws_listed_profiles() {
        let m = SyntheticModel::new(ModelSpec {
            dimension: 3,
            eta: EtaSpec::Constant(0.2),
            exposure: Exposure::Profiles(vec![
                WeightedProfile { profile: p("101"), weight: 1.0 },
                WeightedProfile { profile: p("011"), weight: 0.0 },
                WeightedProfile { profile: p("111"), weight: 3.0 },
            ]),
            red_fraction: 0.5,
        })
        .unwrap();
        let data = generate(&m, 4000, 5);
        let ones = data.observations().iter().filter(|o| o.profile == p("111")).count();
        assert!(data.observations().iter().all(|o| o.profile != p("011")));
        assert!((ones as f64 / 4000.0 - 0.75).abs() < 0.03);
    }

    #[test]
    fn wilson_reference() {
        let (lo, hi) = wilson_interval(10, 100);
        assert!((lo - 0.055_229_137_060_675_085).abs() < 1e-9, "{lo}");
        assert!((hi - 0.174_365_661_504_913_46).abs() < 1e-9, "{hi}");
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn fwer_refuses_signal_models() {
        let cfg = SimulationConfig::new(Pipeline::Iss, 100, ThresholdConfig::protocol_default(), ParentStrategy::Random);
        assert!(estimate_fwer(&constant(2, 0.2), &cfg, 10, 1).is_err());
        let r = estimate_fwer(&constant(2, 0.0), &cfg, 20, 1).unwrap();
        assert_eq!(r.hits, 0);
    }

    #[test]
    fn zero_alpha_never_rejects() {
        let thresholds = ThresholdConfig::protocol_default().with_alpha(0.0);
        let cfg = SimulationConfig::new(Pipeline::Turnover, 400, thresholds, ParentStrategy::PGuided);
        let r = estimate_fwer(&constant(3, 0.17), &cfg, 30, 4).unwrap();
        assert_eq!(r.hits, 0);
    }

    #[test]
    fn zero_replicates_give_empty_table() {
        let cfg = SimulationConfig::new(Pipeline::Turnover, 100, ThresholdConfig::protocol_default(), ParentStrategy::PGuided);
        let rows = compare_strategies(&constant(2, 0.5), &cfg, &ParentStrategy::ALL, 0, 1).unwrap();
        assert!(rows.is_empty());
        let mut buf = Vec::new();
        write_results_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "strategy,node,rejections,replicates,rate,ci_low,ci_high\n");
    }

    #[test]
    fn spec_file_defaults() {
        let text = r#"{"model": {"dimension": 2, "eta": {"constant": 0.094},
                        "exposure": {"bernoulli": [0.3, 0.3]}}, "n": 200}"#;
        let spec = SimulationSpec::from_json(text).unwrap();
        let cfg = spec.config().unwrap();
        assert_eq!(cfg.pipeline, Pipeline::Turnover);
        assert_eq!(cfg.strategy, ParentStrategy::PGuided);
        assert!((cfg.thresholds.tau - 0.171_846_435_100_548_42).abs() < 1e-15);
        assert_eq!(spec.model().unwrap().sup_eta(), 0.094);
    }
}
