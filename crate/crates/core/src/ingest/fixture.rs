use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EncodedRecord, ExclusionSummary, SurveyRecord};
use crate::dataset::Group;
use crate::error::{Error, Result};

const BLUE: [&str; 5] = ["10", "34", "41", "44", "51"];
const RED: [&str; 5] = ["12", "13", "29", "32", "47"];
const OTHER: [&str; 3] = ["6", "36", "48"];
const MISSING: [Option<i64>; 3] = [Some(7), Some(9), None];

/// Parameters of the synthetic raw-file generator. The file follows the
/// default BRFSS codebook.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureConfig {
    pub records: usize,
    pub seed: u64,
    /// Per-item exposure probability.
    pub exposure: f64,
    pub depression: f64,
    pub missing_item_rate: f64,
    pub missing_outcome_rate: f64,
    pub other_state_rate: f64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            records: 500,
            seed: 2023,
            exposure: 0.25,
            depression: 0.2,
            missing_item_rate: 0.05,
            missing_outcome_rate: 0.03,
            other_state_rate: 0.05,
        }
    }
}

/// Raw records plus the encoding the generator intended for each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub config: FixtureConfig,
    pub records: Vec<SurveyRecord>,
    pub expected: Vec<EncodedRecord>,
    pub summary: ExclusionSummary,
}

fn pick_subset<R: Rng>(rng: &mut R, n: usize) -> Vec<bool> {
    loop {
        let s: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        if s.iter().any(|&b| b) {
            return s;
        }
    }
}

pub fn generate_fixture(config: &FixtureConfig) -> Result<Fixture> {
    for (name, v) in [
        ("exposure", config.exposure),
        ("depression", config.depression),
        ("missing_item_rate", config.missing_item_rate),
        ("missing_outcome_rate", config.missing_outcome_rate),
        ("other_state_rate", config.other_state_rate),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange {
                name,
                value: v,
                expected: "0 <= x <= 1",
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::with_capacity(config.records);
    let mut expected = Vec::with_capacity(config.records);
    for i in 0..config.records {
        let (state, group) = if rng.random_bool(config.other_state_rate) {
            (OTHER.choose(&mut rng).map(|s| s.to_string()), None)
        } else if rng.random_bool(0.5) {
            (BLUE.choose(&mut rng).map(|s| s.to_string()), Some(Group::Blue))
        } else {
            (RED.choose(&mut rng).map(|s| s.to_string()), Some(Group::Red))
        };
        let bits: Vec<bool> = (0..10).map(|_| rng.random_bool(config.exposure)).collect();
        // Source variables of each item with their raw codes.
        let mut items: Vec<Vec<(&str, Option<i64>)>> = Vec::with_capacity(10);
        let yes_no = |b: bool| Some(if b { 1 } else { 2 });
        items.push(vec![("ACEDEPRS", yes_no(bits[0]))]);
        let sub = if bits[1] { pick_subset(&mut rng, 2) } else { vec![false; 2] };
        items.push(vec![("ACEDRINK", yes_no(sub[0])), ("ACEDRUGS", yes_no(sub[1]))]);
        items.push(vec![("ACEPRISN", yes_no(bits[2]))]);
        let divrc = if bits[3] { 1 } else { *[2, 8].choose(&mut rng).unwrap() };
        items.push(vec![("ACEDIVRC", Some(divrc))]);
        for (k, var) in [(4, "ACEPUNCH"), (5, "ACEHURT1"), (6, "ACESWEAR")] {
            let code = if bits[k] { rng.random_range(2..=3) } else { 1 };
            items.push(vec![(var, Some(code))]);
        }
        let sex = if bits[7] { pick_subset(&mut rng, 3) } else { vec![false; 3] };
        items.push(
            ["ACETOUCH", "ACETTHEM", "ACEHVSEX"]
                .iter()
                .zip(&sex)
                .map(|(&v, &s)| (v, Some(if s { rng.random_range(2..=3) } else { 1 })))
                .collect(),
        );
        for (k, var) in [(8, "ACEADSAF"), (9, "ACEADNED")] {
            let code = if bits[k] { rng.random_range(1..=2) } else { rng.random_range(3..=5) };
            items.push(vec![(var, Some(code))]);
        }

        let mut truth: Vec<Option<bool>> = bits.iter().map(|&b| Some(b)).collect();
        if rng.random_bool(config.missing_item_rate) {
            let k = rng.random_range(0..10);
            for src in items[k].iter_mut() {
                src.1 = *MISSING.choose(&mut rng).unwrap();
            }
            truth[k] = None;
        }
        let (depression, outcome) = if rng.random_bool(config.missing_outcome_rate) {
            (*MISSING.choose(&mut rng).unwrap(), None)
        } else {
            let y = rng.random_bool(config.depression);
            (Some(if y { 1 } else { 2 }), Some(y))
        };

        records.push(SurveyRecord {
            line: i + 2,
            state: state.clone(),
            items: items
                .iter()
                .flatten()
                .map(|&(v, c)| (v.to_string(), c))
                .collect(),
            depression,
        });
        expected.push(EncodedRecord {
            line: i + 2,
            state,
            items: truth,
            outcome,
            group,
        });
    }

    let mut summary = ExclusionSummary {
        input: expected.len(),
        ..Default::default()
    };
    for e in &expected {
        if e.group.is_none() {
            summary.excluded_state += 1;
        } else if e.items.iter().any(Option::is_none) {
            summary.incomplete_ace += 1;
        } else if e.outcome.is_none() {
            summary.missing_outcome += 1;
        } else {
            summary.retained += 1;
        }
    }
    Ok(Fixture {
        config: config.clone(),
        records,
        expected,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{encode_records, EncodingRules};

    #[test]
    fn fixture_is_deterministic() {
        let cfg = FixtureConfig::default();
        assert_eq!(generate_fixture(&cfg).unwrap(), generate_fixture(&cfg).unwrap());
    }

    #[test]
    fn fixture_truth_matches_encoder() {
        let fx = generate_fixture(&FixtureConfig {
            records: 2000,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(encode_records(&fx.records, &EncodingRules::default()), fx.expected);
        assert!(fx.summary.incomplete_ace > 0 && fx.summary.missing_outcome > 0);
        assert!(fx.summary.excluded_state > 0);
    }

    #[test]
    fn rates_are_checked() {
        let cfg = FixtureConfig {
            exposure: 1.5,
            ..Default::default()
        };
        assert!(generate_fixture(&cfg).is_err());
    }
}
