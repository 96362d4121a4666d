//! Anytime-valid classification p-values for Bernoulli outcomes.
//!
//! For a centre profile `x`, the neighbours `I(x) = {j : X_j ⪯ x}` are put in a
//! fixed, outcome-independent order and their outcomes accumulated into
//! `S_k = Y_(1) + … + Y_(k)`. The p-value for `H₀: η(x) < τ` is
//!
//! ```text
//! p_τ(x) = min_{1≤k≤n(x)}  τ^S_k (1-τ)^(k-S_k+1) / B(1-τ; k-S_k+1, S_k+1)
//! ```
//!
//! with `B` the lower, non-regularized incomplete Beta function. Each term is
//! the reciprocal of a uniform-prior mixture likelihood ratio over `θ ∈ [τ, 1]`,
//! a nonnegative supermartingale under the null, so Ville's inequality gives
//! `P(p_τ(x) ≤ α) ≤ α` uniformly over stopping times.
//!
//! Terms are evaluated as logarithms. An empty neighbourhood yields `p = 1`
//! and values are capped at 1.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::Dataset;
use crate::error::{check_open_unit, Error, Result};
use crate::lattice::BinaryProfile;
use crate::special::ln_incomplete_beta;

/// `τ` such that the odds `τ/(1-τ)` are `c` times the baseline odds `p0/(1-p0)`.
pub fn odds_threshold(c: f64, p0: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::OutOfRange {
            name: "c",
            value: c,
            expected: "c > 0",
        });
    }
    check_open_unit("p0", p0)?;
    Ok(c * p0 / (1.0 + (c - 1.0) * p0))
}

/// Threshold and error-rate settings shared by the testing pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub c: f64,
    pub p0: f64,
    pub tau: f64,
    pub alpha: f64,
    pub kappa: f64,
}

impl ThresholdConfig {
    /// Derives `tau` from the odds multiplier `c` and baseline `p0`.
    pub fn from_odds(c: f64, p0: f64, alpha: f64, kappa: f64) -> Result<Self> {
        let cfg = Self {
            c,
            p0,
            tau: odds_threshold(c, p0)?,
            alpha,
            kappa,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `c = 2`, `p0 = 0.094`, `alpha = 0.05`, `kappa = 0.025`.
    pub fn protocol_default() -> Self {
        Self::from_odds(2.0, 0.094, 0.05, 0.025).expect("default thresholds are valid")
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// `alpha` may be 0 (nothing is ever rejected); every other field is in `(0, 1)`.
    pub fn validate(&self) -> Result<()> {
        check_open_unit("tau", self.tau)?;
        check_open_unit("kappa", self.kappa)?;
        check_open_unit("p0", self.p0)?;
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: self.alpha,
                expected: "0 <= alpha < 1",
            });
        }
        Ok(())
    }
}

/// Order in which the neighbours of a centre profile are visited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborOrder {
    /// Ascending Hamming distance from the centre, then observation index.
    #[default]
    NearestFirst,
    /// Observation index only.
    ObservationIndex,
}

/// Neighbours of a centre profile in visiting order with running outcome sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborSequence {
    pub center: BinaryProfile,
    pub ordered_indices: Vec<usize>,
    /// `partial_sums[k]` is `S_k`; `partial_sums[0] = 0`.
    pub partial_sums: Vec<usize>,
}

impl NeighborSequence {
    pub fn build(center: BinaryProfile, data: &Dataset, order: NeighborOrder) -> Result<Self> {
        if center.dimension() != data.dimension() {
            return Err(Error::DimensionMismatch {
                expected: data.dimension(),
                found: center.dimension(),
            });
        }
        let obs = data.observations();
        let mut ordered_indices: Vec<usize> = obs
            .iter()
            .enumerate()
            .filter(|(_, o)| o.profile.precedes(&center))
            .map(|(i, _)| i)
            .collect();
        if order == NeighborOrder::NearestFirst {
            // Stable sort keeps index order within a distance class.
            ordered_indices.sort_by_key(|&i| obs[i].profile.hamming(&center));
        }
        let mut partial_sums = Vec::with_capacity(ordered_indices.len() + 1);
        partial_sums.push(0);
        let mut s = 0;
        for &i in &ordered_indices {
            s += obs[i].outcome as usize;
            partial_sums.push(s);
        }
        Ok(Self {
            center,
            ordered_indices,
            partial_sums,
        })
    }

    /// `n(x)`, the neighbour count.
    pub fn len(&self) -> usize {
        self.ordered_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered_indices.is_empty()
    }

    pub fn outcomes<'a>(&'a self, data: &'a Dataset) -> impl Iterator<Item = bool> + 'a {
        self.ordered_indices
            .iter()
            .map(move |&i| data.observations()[i].outcome)
    }
}

/// Evaluates the p-value terms for a fixed `τ`, optionally from a
/// precomputed table of `ln term(k, s)` for `k` up to some bound.
#[derive(Clone, Debug)]
pub struct PValueKernel {
    tau: f64,
    ln_tau: f64,
    ln_one_minus_tau: f64,
    table: Vec<f64>,
    table_max_k: usize,
}

impl PValueKernel {
    pub fn new(tau: f64) -> Result<Self> {
        check_open_unit("tau", tau)?;
        Ok(Self {
            tau,
            ln_tau: tau.ln(),
            ln_one_minus_tau: (-tau).ln_1p(),
            table: Vec::new(),
            table_max_k: 0,
        })
    }

    /// Precomputes every term with `k <= max_k` (about `max_k²/2` entries).
    pub fn with_table(tau: f64, max_k: usize) -> Result<Self> {
        let mut kernel = Self::new(tau)?;
        let rows: Vec<Vec<f64>> = (0..=max_k)
            .into_par_iter()
            .map(|k| {
                (0..=k)
                    .map(|s| {
                        if k == 0 {
                            Ok(0.0)
                        } else {
                            kernel.compute_log_term(k, s)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        kernel.table = rows.into_iter().flatten().collect();
        kernel.table_max_k = max_k;
        Ok(kernel)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `ln[τ^s (1-τ)^(k-s+1) / B(1-τ; k-s+1, s+1)]` for `1 <= k`, `s <= k`.
    pub fn log_term(&self, k: usize, s: usize) -> Result<f64> {
        debug_assert!(k >= 1 && s <= k);
        if k <= self.table_max_k && !self.table.is_empty() {
            Ok(self.table[k * (k + 1) / 2 + s])
        } else {
            self.compute_log_term(k, s)
        }
    }

    /// `min(0, ln term(k, s))`. When `s ≤ τk` every likelihood ratio in the
    /// mixture is at most one, so the term is at least one and is skipped.
    fn capped_log_term(&self, k: usize, s: usize) -> Result<f64> {
        if (s as f64) <= self.tau * k as f64 {
            Ok(0.0)
        } else {
            Ok(self.log_term(k, s)?.min(0.0))
        }
    }

    fn compute_log_term(&self, k: usize, s: usize) -> Result<f64> {
        let failures = (k - s) as f64;
        let successes = s as f64;
        let ln_b = ln_incomplete_beta(1.0 - self.tau, failures + 1.0, successes + 1.0)?;
        Ok(successes * self.ln_tau + (failures + 1.0) * self.ln_one_minus_tau - ln_b)
    }

    /// `ln p` for an outcome sequence in visiting order; `0` for an empty sequence.
    pub fn log_p_value<I>(&self, outcomes: I) -> Result<f64>
    where
        I: IntoIterator<Item = bool>,
    {
        let mut best = 0.0f64;
        let mut s = 0;
        for (k, y) in outcomes.into_iter().enumerate() {
            s += y as usize;
            best = best.min(self.capped_log_term(k + 1, s)?);
        }
        Ok(best)
    }

    pub fn p_value<I>(&self, outcomes: I) -> Result<f64>
    where
        I: IntoIterator<Item = bool>,
    {
        Ok(self.log_p_value(outcomes)?.exp())
    }

    /// Running p-values: entry `k-1` is the p-value after `k` outcomes.
    pub fn p_value_path<I>(&self, outcomes: I) -> Result<Vec<f64>>
    where
        I: IntoIterator<Item = bool>,
    {
        let mut best = 0.0f64;
        let mut s = 0;
        let mut path = Vec::new();
        for (k, y) in outcomes.into_iter().enumerate() {
            s += y as usize;
            best = best.min(self.capped_log_term(k + 1, s)?);
            path.push(best.exp());
        }
        Ok(path)
    }

    pub fn sequence_p_value(&self, seq: &NeighborSequence) -> Result<f64> {
        let mut best = 0.0f64;
        for k in 1..seq.partial_sums.len() {
            best = best.min(self.capped_log_term(k, seq.partial_sums[k])?);
        }
        Ok(best.exp())
    }
}

/// Anytime-valid p-value for `H₀: η(center) < τ`, neighbours visited nearest first.
pub fn anytime_valid_pvalue(center: BinaryProfile, data: &Dataset, tau: f64) -> Result<f64> {
    let kernel = PValueKernel::new(tau)?;
    let seq = NeighborSequence::build(center, data, NeighborOrder::default())?;
    kernel.sequence_p_value(&seq)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEntry {
    pub profile: BinaryProfile,
    /// Neighbour count `n(x)`.
    pub n: usize,
    pub p: f64,
}

/// Per-profile p-values; serialized as a JSON array of `{profile, n, p}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvidenceTable {
    entries: Vec<EvidenceEntry>,
    index: HashMap<BinaryProfile, usize>,
}

impl EvidenceTable {
    pub fn from_entries(entries: Vec<EvidenceEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.profile, i).is_some() {
                return Err(Error::DuplicateProfile(e.profile.to_string()));
            }
        }
        Ok(Self { entries, index })
    }

    /// Table with neighbour counts left at zero, for externally supplied p-values.
    pub fn from_p_values(pairs: impl IntoIterator<Item = (BinaryProfile, f64)>) -> Result<Self> {
        Self::from_entries(
            pairs
                .into_iter()
                .map(|(profile, p)| EvidenceEntry { profile, n: 0, p })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[EvidenceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, profile: &BinaryProfile) -> Option<&EvidenceEntry> {
        self.index.get(profile).map(|&i| &self.entries[i])
    }

    pub fn p_value(&self, profile: &BinaryProfile) -> Option<f64> {
        self.get(profile).map(|e| e.p)
    }

    pub fn profiles(&self) -> impl Iterator<Item = BinaryProfile> + '_ {
        self.entries.iter().map(|e| e.profile)
    }

    /// Entries satisfying `keep`, in the original order.
    pub fn filter(&self, keep: impl Fn(&EvidenceEntry) -> bool) -> Self {
        Self::from_entries(self.entries.iter().filter(|e| keep(e)).copied().collect())
            .expect("subset of a valid table")
    }
}

impl Serialize for EvidenceTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EvidenceTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<EvidenceEntry>::deserialize(deserializer)?;
        EvidenceTable::from_entries(entries).map_err(serde::de::Error::custom)
    }
}

/// p-values for every node, nearest-first ordering.
pub fn evidence_table(nodes: &[BinaryProfile], data: &Dataset, tau: f64) -> Result<EvidenceTable> {
    evidence_table_with(&PValueKernel::new(tau)?, nodes, data, NeighborOrder::default())
}

/// p-values for every node using a caller-supplied kernel. Nodes are evaluated
/// in parallel; the result is identical to serial evaluation.
pub fn evidence_table_with(
    kernel: &PValueKernel,
    nodes: &[BinaryProfile],
    data: &Dataset,
    order: NeighborOrder,
) -> Result<EvidenceTable> {
    let entries = nodes
        .par_iter()
        .map(|&profile| {
            let seq = NeighborSequence::build(profile, data, order)?;
            Ok(EvidenceEntry {
                profile,
                n: seq.len(),
                p: kernel.sequence_p_value(&seq)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvidenceTable::from_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Observation;

    const TAU: f64 = 0.172;

    fn p(s: &str) -> BinaryProfile {
        s.parse().unwrap()
    }

    #[test]
    fn protocol_threshold() {
        let tau = odds_threshold(2.0, 0.094).unwrap();
        assert_eq!((tau * 1000.0).round() / 1000.0, 0.172);
        let cfg = ThresholdConfig::protocol_default();
        assert!((cfg.tau - 2.0 * 0.094 / (1.0 + 0.094)).abs() < 1e-12);
    }

    #[test]
    fn terms_below_tau_are_at_least_one() {
        for tau in [0.05, 0.172, 0.5, 0.9] {
            let kernel = PValueKernel::new(tau).unwrap();
            for k in 1..=400usize {
                let mut s = 0;
                while (s as f64) <= tau * k as f64 {
                    assert!(kernel.log_term(k, s).unwrap() >= 0.0, "tau={tau} k={k} s={s}");
                    s += 1;
                }
            }
        }
    }

    #[test]
    fn unit_odds_ratio_is_identity() {
        for p0 in [0.01, 0.094, 0.5, 0.93] {
            assert!((odds_threshold(1.0, p0).unwrap() - p0).abs() < 1e-15);
        }
    }

    #[test]
    fn odds_threshold_hand_value() {
        assert!((odds_threshold(3.0, 0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn odds_threshold_domain() {
        assert!(odds_threshold(0.0, 0.1).is_err());
        assert!(odds_threshold(2.0, 0.0).is_err());
        assert!(odds_threshold(2.0, 1.0).is_err());
        assert!(odds_threshold(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn empty_neighbourhood_is_one() {
        let data = Dataset::from_pairs(&[p("11")], &[true]).unwrap();
        assert_eq!(anytime_valid_pvalue(p("01"), &data, TAU).unwrap(), 1.0);
    }

    #[test]
    fn single_success() {
        // τ(1-τ) / B(1-τ; 1, 2) with B(z; 1, 2) = z - z²/2.
        let data = Dataset::from_pairs(&[p("1")], &[true]).unwrap();
        let z = 1.0 - TAU;
        let want = TAU * z / (z - z * z / 2.0);
        let got = anytime_valid_pvalue(p("1"), &data, TAU).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - 0.293_515_358_361_774_7).abs() < 1e-12);
    }

    #[test]
    fn fifty_successes() {
        // 50-digit reference: min over k of τ^k (1-τ) / B(1-τ; 1, k+1), attained at k = 50.
        let data = Dataset::from_pairs(&vec![p("1"); 50], &[true; 50]).unwrap();
        let got = anytime_valid_pvalue(p("1"), &data, TAU).unwrap();
        let want = 2.523_613_594_564_887_6e-37;
        assert!(got < 0.001);
        assert!((got / want - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tau_out_of_range() {
        let data = Dataset::from_pairs(&[p("1")], &[true]).unwrap();
        assert!(anytime_valid_pvalue(p("1"), &data, 0.0).is_err());
        assert!(anytime_valid_pvalue(p("1"), &data, 1.0).is_err());
    }

    #[test]
    fn all_zero_outcomes_clamp_to_one() {
        let profiles: Vec<_> = BinaryProfile::all(2).unwrap().into_iter().cycle().take(40).collect();
        let data = Dataset::from_pairs(&profiles, &[false; 40]).unwrap();
        let table = evidence_table(&BinaryProfile::all(2).unwrap(), &data, TAU).unwrap();
        assert!(table.entries().iter().all(|e| e.p == 1.0));
        // Each raw term equals k + 1.
        let kernel = PValueKernel::new(TAU).unwrap();
        for k in 1..30 {
            assert!((kernel.log_term(k, 0).unwrap() - ((k + 1) as f64).ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn table_matches_elementwise_calls() {
        let profiles: Vec<_> = ["00", "01", "10", "11", "01", "11", "11", "10"]
            .iter()
            .map(|s| p(s))
            .collect();
        let outcomes = [false, true, false, true, true, true, false, true];
        let data = Dataset::from_pairs(&profiles, &outcomes).unwrap();
        let nodes = BinaryProfile::all(2).unwrap();
        let table = evidence_table(&nodes, &data, TAU).unwrap();
        for node in &nodes {
            assert_eq!(
                table.p_value(node).unwrap(),
                anytime_valid_pvalue(*node, &data, TAU).unwrap()
            );
        }
        assert!(evidence_table(&[], &data, TAU).unwrap().is_empty());
    }

    #[test]
    fn nearest_first_ordering() {
        let profiles: Vec<_> = ["000", "011", "001", "010", "111", "011"]
            .iter()
            .map(|s| p(s))
            .collect();
        let data = Dataset::from_pairs(&profiles, &[true; 6]).unwrap();
        let seq = NeighborSequence::build(p("011"), &data, NeighborOrder::NearestFirst).unwrap();
        assert_eq!(seq.ordered_indices, vec![1, 5, 2, 3, 0]);
        let seq = NeighborSequence::build(p("011"), &data, NeighborOrder::ObservationIndex).unwrap();
        assert_eq!(seq.ordered_indices, vec![0, 1, 2, 3, 5]);
        assert_eq!(seq.partial_sums, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn cached_kernel_agrees() {
        let plain = PValueKernel::new(TAU).unwrap();
        let cached = PValueKernel::with_table(TAU, 60).unwrap();
        for k in 1..=80 {
            for s in (0..=k).step_by(7) {
                assert_eq!(plain.log_term(k, s).unwrap(), cached.log_term(k, s).unwrap());
            }
        }
    }

    #[test]
    fn evidence_json_shape() {
        let table = EvidenceTable::from_entries(vec![EvidenceEntry {
            profile: p("0101"),
            n: 12,
            p: 0.25,
        }])
        .unwrap();
        let v = serde_json::to_value(&table).unwrap();
        assert_eq!(v, serde_json::json!([{"profile": "0101", "n": 12, "p": 0.25}]));
        let back: EvidenceTable = serde_json::from_value(v).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let data = Dataset::new(2, vec![Observation::new(p("01"), true)]).unwrap();
        assert!(anytime_valid_pvalue(p("011"), &data, TAU).is_err());
    }
}
